"""
Simulator Package

Synthetic correlated videos, the proxy segmentation model, the AL loop
and curve metrics
"""

from .loop import (
    RunContext,
    RunResult,
    SimulationConfig,
    SimulationResult,
    StepRecord,
    VideoSplit,
    evaluate,
    prepare_embeddings,
    run_al_step,
    run_simulation,
    simulate,
    simulate_parallel,
    split_videos,
)
from .metrics import aualc, min_pairwise_distance, sign_test, summarize
from .proxy import ProxyLearner, dice, mean_dice, proxy_predict
from .world import SyntheticWorld, WorldParams, generate_world, initial_frames, write_world

__all__ = [
    "ProxyLearner",
    "RunContext",
    "RunResult",
    "SimulationConfig",
    "SimulationResult",
    "StepRecord",
    "SyntheticWorld",
    "VideoSplit",
    "WorldParams",
    "aualc",
    "dice",
    "evaluate",
    "generate_world",
    "initial_frames",
    "mean_dice",
    "min_pairwise_distance",
    "prepare_embeddings",
    "proxy_predict",
    "run_al_step",
    "run_simulation",
    "sign_test",
    "simulate",
    "simulate_parallel",
    "split_videos",
    "summarize",
    "write_world",
]

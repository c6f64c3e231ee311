"""
Active Learning Simulation

Runs a strategy for T selection rounds on a synthetic world: fit the proxy
on the labeled frames, score the pool, select Q frames, move them to the
labeled set and record DICE on held-out videos. Independent (strategy,
config) cells run in parallel through asyncio and a process pool.
"""

from __future__ import annotations

import asyncio
import logging
import math
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..config import Settings
from ..data.io import DiceRecord
from ..data.types import ALCurve, ALState, DatasetManifest, FrameRef
from ..errors import BadParams, BudgetExceedsPool
from ..representation import EncoderParams, encode, train_encoder
from ..scoring import FrameScore
from ..strategies import Strategy, StrategyInput, get_registry
from .metrics import aualc, summarize
from .proxy import ProxyLearner, mean_dice
from .world import SyntheticWorld, WorldParams, generate_world, initial_frames

logger = logging.getLogger(__name__)

EmbeddingSource = Literal["features", "contrastive"]


class SimulationConfig(BaseModel):
    """One strategy evaluated over R runs on one world"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    strategy: str = "cowal"
    budget: int = Field(default=10, ge=1)
    steps: int = Field(default=6, ge=0)
    runs: int = Field(default=10, ge=1)
    seed: int = Field(default=0, ge=0)
    initial_videos: int = Field(default=10, ge=1)
    val_fraction: float = Field(default=1 / 3, ge=0, lt=1)
    proxy_bandwidth: float = Field(default=0.5, gt=0)
    restarts: int = Field(default=2, ge=1)
    embedding_source: EmbeddingSource = "features"
    world: WorldParams = Field(default_factory=WorldParams)
    encoder: EncoderParams = Field(default_factory=EncoderParams)

    @classmethod
    def parse(cls, **values) -> SimulationConfig:
        try:
            return cls(**values)
        except ValidationError as e:
            raise BadParams(f"invalid simulation config: {e.errors()[0]['msg']}") from e

    @classmethod
    def from_settings(cls, settings: Settings, **overrides) -> SimulationConfig:
        """Defaults from Settings, then explicit overrides"""
        values = dict(
            budget=settings.budget,
            steps=settings.steps,
            runs=settings.runs,
            seed=settings.seed,
            initial_videos=settings.initial_videos,
            val_fraction=settings.val_fraction,
            proxy_bandwidth=settings.proxy_bandwidth,
            restarts=settings.restarts,
            encoder=EncoderParams(
                hidden_dim=settings.hidden_dim,
                embed_dim=settings.embed_dim,
                epochs=settings.epochs,
                lr=settings.lr,
                batch_pairs=settings.batch_pairs,
                temperature=settings.temperature,
                jitter=settings.jitter,
                weight_decay=settings.weight_decay,
            ),
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.parse(**values)


@dataclass(frozen=True)
class VideoSplit:
    """Video-level train / validation / test partition"""

    train: tuple[int, ...]
    val: tuple[int, ...]
    test: tuple[int, ...]


def split_videos(videos: int, val_fraction: float, rng: np.random.Generator) -> VideoSplit:
    """
    Test = last ceil(V/3) videos; the rest is shuffled and split into
    validation (val_fraction of them, rounded) and train (at least one video)
    """
    n_test = math.ceil(videos / 3)
    rest = videos - n_test
    if rest < 1:
        raise BadParams(f"{videos} videos leave none for training")
    order = [int(v) for v in rng.permutation(rest)]
    n_val = min(int(round(rest * val_fraction)), rest - 1)
    return VideoSplit(
        train=tuple(order[n_val:]),
        val=tuple(sorted(order[:n_val])),
        test=tuple(range(rest, videos)),
    )


@dataclass(frozen=True)
class RunContext:
    """Everything one run reads; nothing in it changes between steps"""

    world: SyntheticWorld
    config: SimulationConfig
    split: VideoSplit
    embeddings: np.ndarray
    strategy: Strategy
    run_seed: int

    @property
    def manifest(self) -> DatasetManifest:
        return self.world.manifest

    def fit(self, labeled: Sequence[int]) -> ProxyLearner:
        return ProxyLearner.fit(
            self.embeddings,
            labeled,
            self.world.masks,
            self.config.proxy_bandwidth,
            difficulty=self.world.difficulty,
        )

    def _dice(self, learner: ProxyLearner, videos: Sequence[int]) -> float:
        idx = self.world.frames_of(videos)
        return mean_dice(learner.predict_masks(idx), self.world.masks[idx])

    def test_dice(self, learner: ProxyLearner) -> float:
        return self._dice(learner, self.split.test)

    def val_dice(self, learner: ProxyLearner) -> Optional[float]:
        return self._dice(learner, self.split.val) if self.split.val else None


@dataclass(frozen=True)
class StepRecord:
    """Scores of the proxy fit on A_t and the frames selected from U_t"""

    step: int
    test_dice: float
    val_dice: Optional[float]
    selected: tuple[FrameRef, ...] = ()
    reasons: tuple[str, ...] = ()


def _step_seed(run_seed: int, step: int) -> int:
    return int(np.random.SeedSequence([run_seed, step]).generate_state(1)[0])


def evaluate(state: ALState, ctx: RunContext) -> StepRecord:
    """Fit the proxy on the labeled frames and score the held-out videos"""
    learner = ctx.fit([ctx.manifest.global_index(f) for f in state.labeled])
    return StepRecord(
        step=state.step, test_dice=ctx.test_dice(learner), val_dice=ctx.val_dice(learner)
    )


def run_al_step(state: ALState, ctx: RunContext) -> tuple[ALState, StepRecord]:
    """
    One AL step: refit, score, select Q frames, move them to the labeled set

    Returns:
        (next state, record of the step's DICE and selection)

    Raises:
        BudgetExceedsPool: Fewer than Q unlabeled frames
    """
    q = ctx.config.budget
    if len(state.unlabeled) < q:
        raise BudgetExceedsPool(f"step {state.step}: {len(state.unlabeled)} frames left, Q={q}")

    manifest = ctx.manifest
    labeled = [manifest.global_index(f) for f in state.labeled]
    pool = np.array([manifest.global_index(f) for f in state.unlabeled], dtype=np.int64)
    learner = ctx.fit(labeled)
    entropies = learner.entropies(pool)

    selection = ctx.strategy.select(
        StrategyInput(
            manifest=manifest,
            embeddings=ctx.embeddings,
            state=state,
            budget=q,
            seed=_step_seed(ctx.run_seed, state.step),
            frame_entropies=tuple(
                FrameScore(f, float(h)) for f, h in zip(state.unlabeled, entropies)
            ),
            restarts=ctx.config.restarts,
        )
    )
    record = StepRecord(
        step=state.step,
        test_dice=ctx.test_dice(learner),
        val_dice=ctx.val_dice(learner),
        selected=selection.frames,
        reasons=selection.reasons,
    )
    logger.debug(
        "%s run %d step %d: test DICE %.4f, selected %s",
        ctx.strategy.metadata.name,
        ctx.run_seed,
        state.step,
        record.test_dice,
        [str(f) for f in selection.frames],
    )
    return state.advance(selection.frames), record


@dataclass(frozen=True)
class RunResult:
    """One run: its seed, split, per-step records and curves"""

    seed: int
    split: VideoSplit
    records: tuple[StepRecord, ...]
    full_data_dice: float

    @property
    def curve(self) -> ALCurve:
        return ALCurve(
            points=tuple((r.step, r.test_dice) for r in self.records),
            full_data_dice=self.full_data_dice,
        )


@dataclass(frozen=True)
class SimulationResult:
    """All runs of one strategy plus their per-step median"""

    config: SimulationConfig
    runs: tuple[RunResult, ...]

    @property
    def strategy(self) -> str:
        return self.config.strategy

    @property
    def curves(self) -> list[ALCurve]:
        return [r.curve for r in self.runs]

    @property
    def summary(self) -> ALCurve:
        return summarize(self.curves)

    @property
    def references(self) -> dict[int, float]:
        return {r.seed: r.full_data_dice for r in self.runs}

    def dice_records(self) -> list[DiceRecord]:
        return [
            DiceRecord(self.strategy, run.seed, rec.step, rec.test_dice)
            for run in self.runs
            for rec in run.records
        ]

    def val_dice_records(self) -> list[DiceRecord]:
        """Validation DICE per step; runs without validation videos contribute none"""
        return [
            DiceRecord(self.strategy, run.seed, rec.step, rec.val_dice)
            for run in self.runs
            for rec in run.records
            if rec.val_dice is not None
        ]

    def aualc_rows(self) -> list[tuple[str, int, float]]:
        """(strategy, seed, AuALC) per run; empty when curves hold a single point"""
        if self.config.steps == 0:
            return []
        return [(self.strategy, run.seed, aualc(run.curve)) for run in self.runs]


def prepare_embeddings(world: SyntheticWorld, config: SimulationConfig) -> np.ndarray:
    """Normalized world features, or a contrastive encoder's embedding of them"""
    if config.embedding_source == "features":
        return world.feature_matrix().data.astype(np.float64)

    params = config.encoder
    if params.batch_pairs > world.total_frames:
        params = params.model_copy(update={"batch_pairs": world.total_frames})
        logger.info("batch_pairs lowered to %d to fit the world", world.total_frames)
    encoder = train_encoder(world.features, params, seed=config.seed)
    return encode(encoder, world.features).data.astype(np.float64)


def run_single(
    config: SimulationConfig,
    world: SyntheticWorld,
    embeddings: np.ndarray,
    strategy: Strategy,
    run_index: int,
) -> RunResult:
    """One run: split, seed the labeled set with middle frames, then T steps"""
    run_seed = config.seed + run_index
    split = split_videos(world.params.videos, config.val_fraction, np.random.default_rng(run_seed))
    ctx = RunContext(world, config, split, embeddings, strategy, run_seed)
    manifest = ctx.manifest

    seeded = initial_frames(world, split.train[: config.initial_videos])
    pool = world.frames_of(split.train)
    needed = config.budget * config.steps
    if needed > len(pool) - len(seeded):
        raise BudgetExceedsPool(
            f"{config.steps} steps of {config.budget} need {needed} frames, "
            f"the training pool has {len(pool) - len(seeded)}"
        )

    state = ALState.initial(
        (manifest.frame_ref(int(i)) for i in pool),
        (manifest.frame_ref(i) for i in seeded),
        seed=run_seed,
    )
    records = []
    for _ in range(config.steps):
        state, record = run_al_step(state, ctx)
        records.append(record)
    records.append(evaluate(state, ctx))

    full = ctx.test_dice(ctx.fit(pool))
    return RunResult(seed=run_seed, split=split, records=tuple(records), full_data_dice=full)


def run_simulation(config: SimulationConfig) -> SimulationResult:
    """
    R runs of one strategy on the world generated from config.seed

    Runs share the world and embeddings; run r uses seed config.seed + r
    for its split and selections, so different strategies see paired runs.
    """
    strategy = get_registry().get(config.strategy)
    world = generate_world(config.world, config.seed)
    embeddings = prepare_embeddings(world, config)
    runs = tuple(run_single(config, world, embeddings, strategy, r) for r in range(config.runs))
    result = SimulationResult(config=config, runs=runs)
    logger.info(
        "%s: %d runs, median final DICE %.4f",
        config.strategy,
        config.runs,
        result.summary.scores[-1],
    )
    return result


async def simulate_parallel(
    configs: Sequence[SimulationConfig], jobs: int = 1, executor: Executor | None = None
) -> list[SimulationResult]:
    """
    Run simulation cells concurrently

    Args:
        configs: One config per cell
        jobs: Worker processes; 1 runs the cells one after another
        executor: Executor to use instead of a fresh process pool

    Returns:
        Results sorted by (strategy, seed)
    """
    loop = asyncio.get_running_loop()
    if executor is None and jobs <= 1:
        results = [run_simulation(c) for c in configs]
    else:
        pool = executor or ProcessPoolExecutor(max_workers=jobs)
        try:
            futures = [loop.run_in_executor(pool, run_simulation, c) for c in configs]
            results = list(await asyncio.gather(*futures))
        finally:
            if executor is None:
                pool.shutdown()
    return sorted(results, key=lambda r: (r.strategy, r.config.seed))


def simulate(configs: Sequence[SimulationConfig], jobs: int = 1) -> list[SimulationResult]:
    return asyncio.run(simulate_parallel(configs, jobs))

#!/usr/bin/env python3
"""
COWAL - Correlation-aware batch active learning for video frames

Main entry point for the CLI
"""

import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import click
import numpy as np
from rich.console import Console
from rich.logging import RichHandler

from .cli.options import RunConfig
from .cli.plot import emit_plot
from .cli.ui import (
    print_aualc_table,
    print_error,
    print_info,
    print_run_header,
    print_strategies,
)
from .config import get_settings
from .data import ALCurve, ALState, parse_manifest, read_matrix, read_prob_map, write_curve_csv
from .data.io import (
    read_dice_csv,
    read_reference_csv,
    write_aualc_csv,
    write_dice_csv,
    write_matrix,
    write_reference_csv,
)
from .errors import CowalError, InconsistentCounts
from .representation import EncoderParams, encode, save_encoder, train_encoder
from .scoring import FrameScore, frame_entropy
from .simulator import (
    SimulationConfig,
    WorldParams,
    aualc,
    generate_world,
    sign_test,
    simulate,
    write_world,
)
from .strategies import StrategyInput, get_registry

logger = logging.getLogger("cowal")


def configure_logging(level: str, log_file: Optional[Path] = None) -> None:
    """Rich handler on standard error, plus an optional plain file handler"""
    handlers: list[logging.Handler] = [
        RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=False)
    ]
    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(
            logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
        )
        handlers.append(file_handler)
    logging.basicConfig(
        level=level.upper(), format="%(message)s", datefmt="[%X]", handlers=handlers, force=True
    )
    logging.getLogger("PIL").setLevel(logging.WARNING)


def _pick(flag, default):
    return default if flag is None else flag


@click.group()
@click.option("--log-level", help="Override the log level (DEBUG, INFO, WARNING, ...)")
@click.option("--log-file", type=click.Path(path_type=Path), help="Also log to this file")
def cli(log_level: Optional[str], log_file: Optional[Path]) -> None:
    """Correlation-aware active learning for video frame annotation."""
    settings = get_settings()
    configure_logging(
        _pick(log_level, settings.log_level), _pick(log_file, settings.expanded_log_file)
    )


@cli.command()
@click.option("--videos", type=int, default=12, show_default=True, help="Number of videos")
@click.option("--frames", type=int, default=40, show_default=True, help="Frames per video")
@click.option("--step", type=float, default=0.02, show_default=True, help="Walk step size")
@click.option("--scenes", type=int, default=3, show_default=True, help="Scene anchors (0 = none)")
@click.option("--feature-dim", type=int, default=32, show_default=True)
@click.option("--noise", type=float, default=0.02, show_default=True, help="Feature noise")
@click.option("--grid", type=int, default=24, show_default=True, help="Mask side length")
@click.option("--radius", type=float, default=0.2, show_default=True, help="Mask disk radius")
@click.option("--seed", type=int, default=None, help="World seed")
@click.option("-o", "--out", "out_dir", type=click.Path(path_type=Path), required=True)
def gen(
    videos: int,
    frames: int,
    step: float,
    scenes: int,
    feature_dim: int,
    noise: float,
    grid: int,
    radius: float,
    seed: Optional[int],
    out_dir: Path,
) -> None:
    """Generate a synthetic correlated-video dataset."""
    settings = get_settings()
    params = WorldParams.parse(
        videos=videos,
        frames=frames,
        step=step,
        scenes=scenes,
        feature_dim=feature_dim,
        noise=noise,
        grid=grid,
        radius=radius,
    )
    world = generate_world(params, RunConfig.resolve("gen", settings, seed=seed).seed)
    manifest_path = write_world(world, out_dir, bandwidth=settings.proxy_bandwidth)
    print_info(f"Wrote {world.total_frames} frames to {manifest_path}")


@cli.command()
@click.option("--features", type=click.Path(path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Embedding file")
@click.option("--checkpoint", type=click.Path(path_type=Path), help="Also save the encoder")
@click.option("--epochs", type=int)
@click.option("--lr", type=float)
@click.option("--batch-pairs", type=int)
@click.option("--temperature", type=float)
@click.option("--jitter", type=float)
@click.option("--hidden", type=int)
@click.option("--dim", type=int)
@click.option("--seed", type=int)
def embed(
    features: Path,
    out: Path,
    checkpoint: Optional[Path],
    epochs: Optional[int],
    lr: Optional[float],
    batch_pairs: Optional[int],
    temperature: Optional[float],
    jitter: Optional[float],
    hidden: Optional[int],
    dim: Optional[int],
    seed: Optional[int],
) -> None:
    """Train the contrastive encoder and write an embedding file."""
    settings = get_settings()
    try:
        params = EncoderParams(
            hidden_dim=_pick(hidden, settings.hidden_dim),
            embed_dim=_pick(dim, settings.embed_dim),
            epochs=_pick(epochs, settings.epochs),
            lr=_pick(lr, settings.lr),
            batch_pairs=_pick(batch_pairs, settings.batch_pairs),
            temperature=_pick(temperature, settings.temperature),
            jitter=_pick(jitter, settings.jitter),
            weight_decay=settings.weight_decay,
        )
    except ValueError as e:
        raise click.UsageError(str(e)) from e

    run = RunConfig.resolve("embed", settings, seed=seed)
    raw = read_matrix(features, normalize=False).data
    encoder = train_encoder(raw, params, seed=run.seed)
    write_matrix(encode(encoder, raw), out)
    if checkpoint is not None:
        save_encoder(encoder, checkpoint)
    print_info(
        f"Trained {params.epochs} epochs, loss {encoder.loss_trace[0]:.4f} -> "
        f"{encoder.loss_trace[-1]:.4f}; wrote {out}"
    )


@cli.command()
@click.option("--manifest", type=click.Path(path_type=Path), required=True)
@click.option("--strategy", required=True, help="Strategy name (see `cowal strategies`)")
@click.option("--budget", type=int, help="Frames to select (Q)")
@click.option("--seed", type=int)
@click.option("--embedding", type=click.Path(path_type=Path), help="Override the embedding file")
@click.option("--no-normalize", is_flag=True, help="Use embeddings without unit normalization")
@click.option("--restarts", type=int, help="k-means++ restarts")
def select(
    manifest: Path,
    strategy: str,
    budget: Optional[int],
    seed: Optional[int],
    embedding: Optional[Path],
    no_normalize: bool,
    restarts: Optional[int],
) -> None:
    """Select frames for annotation; prints `video_id,frame_idx,reason` lines."""
    run = RunConfig.resolve(
        "select",
        get_settings(),
        strategies=(strategy,),
        budget=budget,
        seed=seed,
        restarts=restarts,
        embedding=embedding,
        normalize=False if no_normalize else None,
    )
    chosen = get_registry().get(strategy)

    dataset = parse_manifest(manifest)
    embedding_path = _pick(run.embedding, dataset.embedding_path)
    matrix = read_matrix(embedding_path, normalize=run.normalize)
    if matrix.rows != dataset.total_frames:
        raise InconsistentCounts(
            f"'{embedding_path}' has {matrix.rows} rows, the manifest lists "
            f"{dataset.total_frames} frames"
        )

    state = ALState.initial(dataset.all_frames(), dataset.labeled_frames(), seed=run.seed)
    scores = []
    for frame in state.unlabeled:
        path = dataset.prob_map_path(frame)
        if path is not None:
            scores.append(FrameScore(frame, frame_entropy(read_prob_map(path))))
    logger.info(
        "%d labeled, %d unlabeled, %d entropy scores",
        len(state.labeled),
        len(state.unlabeled),
        len(scores),
    )

    selection = chosen.select(
        StrategyInput(
            manifest=dataset,
            embeddings=matrix,
            state=state,
            budget=run.budget,
            seed=run.seed,
            frame_entropies=tuple(scores),
            restarts=run.restarts,
            max_iter=run.max_iter,
            tol=run.tol,
        )
    )
    for line in selection.lines():
        click.echo(line)


@cli.command(name="simulate")
@click.option("--strategies", default="cowal,random,entropy", show_default=True)
@click.option("--budget", type=int)
@click.option("--steps", type=int)
@click.option("--runs", type=int)
@click.option("--seed", type=int)
@click.option("--videos", type=int, default=12, show_default=True)
@click.option("--frames", type=int, default=40, show_default=True)
@click.option("--step", type=float, default=0.02, show_default=True, help="Walk step size")
@click.option("--scenes", type=int, default=3, show_default=True)
@click.option(
    "--embedding-source",
    type=click.Choice(["features", "contrastive"]),
    default="features",
    show_default=True,
)
@click.option("--jobs", type=int, help="Worker processes")
@click.option("-o", "--out", "out_dir", type=click.Path(path_type=Path))
def simulate_cmd(
    strategies: str,
    budget: Optional[int],
    steps: Optional[int],
    runs: Optional[int],
    seed: Optional[int],
    videos: int,
    frames: int,
    step: float,
    scenes: int,
    embedding_source: str,
    jobs: Optional[int],
    out_dir: Optional[Path],
) -> None:
    """Simulate AL runs and write dice/aualc/reference/curves CSV files."""
    settings = get_settings()
    registry = get_registry()
    names = [s.strip() for s in strategies.split(",") if s.strip()]
    if not names:
        raise click.UsageError("--strategies is empty")
    if len(set(names)) != len(names):
        raise click.UsageError("--strategies lists a strategy twice")
    run = RunConfig.resolve(
        "simulate",
        settings,
        strategies=tuple(names),
        budget=budget,
        steps=steps,
        runs=runs,
        seed=seed,
        jobs=jobs,
        out_dir=out_dir,
    )
    for name in run.strategies:
        registry.get(name)

    world = WorldParams.parse(videos=videos, frames=frames, step=step, scenes=scenes)
    configs = [
        SimulationConfig.from_settings(
            settings,
            strategy=name,
            budget=run.budget,
            steps=run.steps,
            runs=run.runs,
            seed=run.seed,
            restarts=run.restarts,
            embedding_source=embedding_source,
            world=world,
        )
        for name in run.strategies
    ]
    out_dir = _pick(run.out_dir, settings.expanded_output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    first = configs[0]
    print_run_header(
        "Simulation",
        {
            "strategies": ", ".join(names),
            "budget": first.budget,
            "steps": first.steps,
            "runs": first.runs,
            "seed": first.seed,
            "world": f"{videos} videos x {frames} frames, step {step}",
            "output": out_dir,
        },
    )

    results = simulate(configs, run.jobs)
    by_name = {r.strategy: r for r in results}
    ordered = [by_name[name] for name in names]

    write_dice_csv([rec for r in results for rec in r.dice_records()], out_dir / "dice.csv")
    write_dice_csv(
        [rec for r in results for rec in r.val_dice_records()], out_dir / "val_dice.csv"
    )
    write_reference_csv(results[0].references, out_dir / "reference.csv")
    write_curve_csv([r.summary for r in ordered], names, out_dir / "curves.csv")
    aualc_rows = [row for r in results for row in r.aualc_rows()]
    write_aualc_csv(aualc_rows, out_dir / "aualc.csv")

    if aualc_rows:
        medians = {
            r.strategy: float(np.median([v for _, _, v in r.aualc_rows()])) for r in ordered
        }
        print_aualc_table([(name, medians[name], None, None) for name in names])
    print_info(f"Results written to {out_dir}")


@cli.command(name="eval")
@click.option("--results", "results_dir", type=click.Path(path_type=Path), required=True)
@click.option("--baseline", default="random", show_default=True, help="Strategy to compare with")
def eval_cmd(results_dir: Path, baseline: str) -> None:
    """Recompute AuALC from dice.csv and reference.csv."""
    records = read_dice_csv(results_dir / "dice.csv")
    references = read_reference_csv(results_dir / "reference.csv")

    points: dict[str, dict[int, list[tuple[int, float]]]] = {}
    for rec in records:
        points.setdefault(rec.strategy, {}).setdefault(rec.seed, []).append((rec.step, rec.dice))

    per_seed: dict[str, dict[int, float]] = {}
    rows = []
    for strategy, runs in points.items():
        per_seed[strategy] = {}
        for seed in sorted(runs):
            if seed not in references:
                raise InconsistentCounts(f"no full-data DICE for seed {seed} in reference.csv")
            curve = ALCurve(points=tuple(sorted(runs[seed])), full_data_dice=references[seed])
            per_seed[strategy][seed] = aualc(curve)
            rows.append((strategy, seed, per_seed[strategy][seed]))
    write_aualc_csv(rows, results_dir / "aualc.csv")

    if baseline not in per_seed:
        print_info(f"Baseline '{baseline}' is not in the results; margins omitted")
    table = []
    for strategy, values in per_seed.items():
        median = float(np.median(list(values.values())))
        margin = p_value = None
        if baseline in per_seed and strategy != baseline:
            base = per_seed[baseline]
            common = sorted(set(values) & set(base))
            margin = median - float(np.median(list(base.values())))
            p_value = sign_test([values[s] for s in common], [base[s] for s in common])
        table.append((strategy, median, margin, p_value))
    print_aualc_table(table, baseline if baseline in per_seed else None)


@cli.command()
@click.argument("curves_csv", type=click.Path(path_type=Path))
@click.option("-o", "--out", type=click.Path(path_type=Path), required=True, help="SVG file")
def plot(curves_csv: Path, out: Path) -> None:
    """Render a curves CSV as an SVG line chart."""
    emit_plot(curves_csv, out)
    print_info(f"Wrote {out}")


@cli.command(name="strategies")
def list_strategies() -> None:
    """List the available annotation strategies."""
    print_strategies(get_registry())


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI and return its exit code

    0 on success, 2 for usage and configuration errors, 3 for data and
    selection errors, 4 for numeric failures.
    """
    try:
        rv = cli.main(
            args=list(argv) if argv is not None else None,
            prog_name="cowal",
            standalone_mode=False,
        )
    except click.UsageError as e:
        e.show()
        return 2
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        print_error("Aborted")
        return 1
    except CowalError as e:
        print_error(f"{type(e).__name__}: {e}")
        return e.exit_code
    return rv if isinstance(rv, int) else 0


def main() -> None:
    """Console script entry point"""
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()

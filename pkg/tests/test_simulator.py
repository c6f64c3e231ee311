"""World generation, proxy model, AL loop and curve metrics"""

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from cowal.data import ALCurve, ALState, DatasetManifest, FrameRef
from cowal.errors import (
    BadParams,
    BudgetExceedsPool,
    EmptyInput,
    MismatchedGrids,
    NoLabeledData,
    NonPositiveReference,
    ShapeMismatch,
    TooFewCurvePoints,
)
from cowal.scoring import FrameScore
from cowal.simulator import (
    ProxyLearner,
    RunContext,
    SimulationConfig,
    WorldParams,
    aualc,
    dice,
    generate_world,
    initial_frames,
    min_pairwise_distance,
    prepare_embeddings,
    proxy_predict,
    run_al_step,
    run_simulation,
    sign_test,
    simulate_parallel,
    split_videos,
    summarize,
)
from cowal.strategies import StrategyInput, get_registry

SMALL_WORLD = WorldParams(videos=6, frames=12)


def small_config(**overrides) -> SimulationConfig:
    values = dict(
        strategy="random", budget=3, steps=2, runs=2, initial_videos=2, world=SMALL_WORLD
    )
    values.update(overrides)
    return SimulationConfig(**values)


def run_context(config: SimulationConfig, run_seed: int = 0):
    world = generate_world(config.world, config.seed)
    split = split_videos(world.params.videos, config.val_fraction, np.random.default_rng(run_seed))
    ctx = RunContext(
        world,
        config,
        split,
        prepare_embeddings(world, config),
        get_registry().get(config.strategy),
        run_seed,
    )
    seeded = split.train[: config.initial_videos]
    manifest = world.manifest
    state = ALState.initial(
        (manifest.frame_ref(int(i)) for i in world.frames_of(split.train)),
        (manifest.frame_ref(i) for i in initial_frames(world, seeded)),
        seed=run_seed,
    )
    return ctx, state


class TestWorld:
    def test_still_walk(self):
        world = generate_world(WorldParams(videos=2, frames=5, step=0.0), seed=1)
        for video in range(2):
            idx = world.frames_of([video])
            assert np.all(world.latents[idx] == world.latents[idx[0]])
            assert np.all(world.masks[idx] == world.masks[idx[0]])

    def test_same_seed_same_world(self):
        a = generate_world(SMALL_WORLD, seed=4)
        b = generate_world(SMALL_WORLD, seed=4)
        assert a.features.tobytes() == b.features.tobytes()
        assert a.masks.tobytes() == b.masks.tobytes()

    def test_small_steps_keep_videos_tight(self):
        def spread(step: float) -> float:
            params = WorldParams(videos=4, frames=20, step=step)
            total = 0.0
            for seed in range(20):
                world = generate_world(params, seed=seed)
                videos = [world.features[world.frames_of([v])] for v in range(4)]
                total += np.mean([pdist(frames).mean() for frames in videos])
            return total / 20

        assert spread(0.01) < spread(0.3)

    def test_scenes_share_anchors(self):
        world = generate_world(WorldParams(videos=6, frames=4, scenes=3), seed=0)
        assert world.scene_of_video == (0, 1, 2, 0, 1, 2)

    def test_tool_enters_and_withdraws(self):
        world = generate_world(WorldParams(), seed=0)
        f = world.params.frames
        activity = world.activity.reshape(-1, f)
        assert np.all(activity[:, f // 2] > activity[:, 0])
        assert np.all(activity[:, f // 2] > activity[:, -1])
        area = world.masks.reshape(-1, f, world.params.grid**2).sum(axis=2)
        assert area[:, f // 2].mean() > area[:, 0].mean()

    def test_one_haze_burst_per_video(self):
        world = generate_world(WorldParams(), seed=3)
        f = world.params.frames
        for haze in world.haze.reshape(-1, f):
            hazy = np.flatnonzero(haze)
            assert len(hazy) == 6
            assert np.all(np.diff(hazy) == 1)
            assert hazy[0] >= f // 4 and hazy[-1] < f - f // 4

    def test_haze_only_changes_difficulty(self):
        clear = generate_world(WorldParams(videos=4, frames=16, haze_frames=0), seed=7)
        hazy = generate_world(WorldParams(videos=4, frames=16), seed=7)
        assert clear.features.tobytes() == hazy.features.tobytes()
        assert clear.masks.tobytes() == hazy.masks.tobytes()
        assert not clear.haze.any()
        np.testing.assert_allclose(hazy.difficulty - clear.difficulty, 3.0 * hazy.haze)

    @pytest.mark.parametrize("values", [{"radius": 0.6}, {"grid": 2}, {"videos": 0}])
    def test_bad_params(self, values):
        with pytest.raises(BadParams):
            WorldParams.parse(**values)


class TestProxy:
    EMBEDDINGS = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [100.0, 0.0]])
    MASKS = np.stack([np.ones((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2))])

    def learner(self, **kwargs) -> ProxyLearner:
        return ProxyLearner.fit(self.EMBEDDINGS, [0], self.MASKS, bandwidth=0.5, **kwargs)

    def test_labeled_frame_recalls_mask(self):
        np.testing.assert_array_equal(self.learner().foreground([0])[0], np.ones((2, 2)))
        assert self.learner().entropies(np.array([0]))[0] == 0.0

    def test_distance_equal_to_bandwidth(self):
        p = self.learner().foreground([1])[0]
        np.testing.assert_allclose(p, 0.5 + 0.5 / math.e, atol=1e-12)
        assert p[0, 0] == pytest.approx(0.683940, abs=1e-6)

    def test_far_frame_is_uniform(self):
        entropy = self.learner().entropies(np.array([3]))[0]
        assert entropy == pytest.approx(4 * math.log(2), abs=1e-9)

    def test_entropy_grows_with_distance(self):
        assert np.all(np.diff(self.learner().entropies(np.arange(4))) >= 0)

    def test_difficulty_shortens_reach(self):
        learner = self.learner(difficulty=np.array([5.0, 1.0, 0.0, 0.0]))
        p = learner.foreground([1])[0]
        np.testing.assert_allclose(p, 0.5 + 0.5 * math.exp(-2.0), atol=1e-12)
        assert learner.entropies(np.array([0]))[0] == 0.0
        assert learner.entropies(np.array([1]))[0] > self.learner().entropies(np.array([1]))[0]

    def test_predict_by_frame_ref(self):
        learner = self.learner(manifest=DatasetManifest.from_frame_counts([4]))
        prediction = proxy_predict(learner, FrameRef(0, 1))
        assert prediction.classes == 2
        assert float(prediction.data[0, 0, 1]) == pytest.approx(0.683940, abs=1e-6)

    def test_frame_ref_without_manifest(self):
        with pytest.raises(ShapeMismatch):
            proxy_predict(self.learner(), FrameRef(0, 1))

    def test_no_labeled_frames(self):
        with pytest.raises(NoLabeledData):
            ProxyLearner.fit(self.EMBEDDINGS, [], self.MASKS)


class TestDice:
    def test_identical(self):
        mask = np.zeros((4, 4))
        mask[1:3, 1:3] = 1
        assert dice(mask, mask) == 1.0

    def test_disjoint(self):
        a, b = np.zeros((4, 4)), np.zeros((4, 4))
        a[0, :] = 1
        b[3, :] = 1
        assert dice(a, b) == 0.0

    def test_half_overlap(self):
        a, b = np.zeros((4, 4)), np.zeros((4, 4))
        a[0, :] = 1
        b[0, 2:] = 1
        b[1, :2] = 1
        assert dice(a, b) == 0.5
        assert dice(b, a) == 0.5

    def test_both_empty(self):
        assert dice(np.zeros((3, 3)), np.zeros((3, 3))) == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            dice(np.zeros((3, 3)), np.zeros((3, 4)))


class TestMetrics:
    def test_aualc_trapezoid(self):
        curve = ALCurve(points=((0, 0.5), (1, 0.75), (2, 1.0)), full_data_dice=1.0)
        assert aualc(curve) == pytest.approx(0.75, abs=1e-9)

    def test_aualc_flat_curves(self):
        assert aualc(ALCurve(((1, 0.8), (2, 0.8), (3, 0.8)), 0.8)) == pytest.approx(1.0, abs=1e-9)
        assert aualc(ALCurve(((1, 0.0), (2, 0.0)), 0.8)) == 0.0

    def test_aualc_scale_invariance(self):
        points = ((1, 0.31), (2, 0.47), (4, 0.52), (5, 0.66))
        base = aualc(ALCurve(points, 0.7))
        scaled = aualc(ALCurve(tuple((s, 3.7 * d) for s, d in points), 3.7 * 0.7))
        assert scaled == pytest.approx(base, abs=1e-9)

    def test_aualc_errors(self):
        with pytest.raises(TooFewCurvePoints):
            aualc(ALCurve(((1, 0.5),), 1.0))
        with pytest.raises(NonPositiveReference):
            aualc(ALCurve(((1, 0.5), (2, 0.6)), 0.0))

    def test_summarize_takes_medians(self):
        curves = [
            ALCurve(((1, 0.1), (2, 0.5)), 0.9),
            ALCurve(((1, 0.3), (2, 0.4)), 0.8),
            ALCurve(((1, 0.2), (2, 0.9)), 1.0),
        ]
        summary = summarize(curves)
        assert summary.points == ((1, 0.2), (2, 0.5))
        assert summary.full_data_dice == 0.9

    def test_summarize_errors(self):
        with pytest.raises(EmptyInput):
            summarize([])
        with pytest.raises(MismatchedGrids):
            summarize([ALCurve(((1, 0.1),), 1.0), ALCurve(((2, 0.1),), 1.0)])

    def test_sign_test(self):
        assert sign_test([1.0] * 10, [0.0] * 10) == pytest.approx(1 / 1024)
        assert sign_test([0.5, 0.5], [0.5, 0.5]) == 1.0
        with pytest.raises(ShapeMismatch):
            sign_test([1.0], [1.0, 2.0])

    def test_min_pairwise_distance(self):
        assert min_pairwise_distance(np.array([[0.0, 0.0], [3.0, 4.0], [10.0, 0.0]])) == 5.0
        assert min_pairwise_distance(np.ones((1, 2))) == math.inf


class TestSplit:
    def test_default_world(self):
        split = split_videos(12, 1 / 3, np.random.default_rng(0))
        assert split.test == (8, 9, 10, 11)
        assert len(split.val) == 3 and len(split.train) == 5
        assert sorted(split.train + split.val + split.test) == list(range(12))

    def test_two_videos(self):
        split = split_videos(2, 1 / 3, np.random.default_rng(0))
        assert split.train == (0,) and split.val == () and split.test == (1,)

    def test_single_video(self):
        with pytest.raises(BadParams):
            split_videos(1, 1 / 3, np.random.default_rng(0))


class TestLoop:
    def test_step_moves_budget_frames(self):
        ctx, state = run_context(small_config())
        after, record = run_al_step(state, ctx)
        assert len(after.labeled) == len(state.labeled) + 3
        assert set(after.labeled) >= set(state.labeled)
        assert not set(after.labeled) & set(after.unlabeled)
        assert set(record.selected) <= set(state.unlabeled)
        assert after.step == state.step + 1
        assert 0.0 <= record.test_dice <= 1.0

    def test_step_needs_enough_frames(self):
        ctx, state = run_context(small_config(budget=40))
        with pytest.raises(BudgetExceedsPool):
            run_al_step(state, ctx)

    def test_random_trajectory_is_reproducible(self):
        a = run_simulation(small_config())
        b = run_simulation(small_config())
        assert a.runs == b.runs

    def test_runs_use_consecutive_seeds(self):
        result = run_simulation(small_config(seed=5, runs=3))
        assert [r.seed for r in result.runs] == [5, 6, 7]

    def test_no_steps(self):
        result = run_simulation(small_config(steps=0))
        assert all(c.steps == [1] for c in result.curves)
        assert result.aualc_rows() == []

    def test_single_run_summary(self):
        result = run_simulation(small_config(runs=1))
        assert result.summary == result.curves[0]

    def test_records(self):
        result = run_simulation(small_config())
        assert len(result.dice_records()) == 2 * 3
        assert [s for _, s, _ in result.aualc_rows()] == [0, 1]
        assert set(result.references) == {0, 1}
        val = result.val_dice_records()
        assert len(val) == 2 * 3
        assert all(0.0 <= r.dice <= 1.0 for r in val)

    def test_pool_too_small_for_schedule(self):
        with pytest.raises(BudgetExceedsPool):
            run_simulation(small_config(budget=20, steps=2))

    def test_contrastive_embeddings(self):
        config = small_config(
            embedding_source="contrastive",
            encoder={"epochs": 2, "batch_pairs": 500, "hidden_dim": 8, "embed_dim": 4},
        )
        world = generate_world(config.world, config.seed)
        emb = prepare_embeddings(world, config)
        assert emb.shape == (72, 4)
        np.testing.assert_allclose(np.linalg.norm(emb, axis=1), 1.0, atol=1e-6)

    def test_cowal_skips_covered_cluster(self):
        world = generate_world(WorldParams(videos=3, frames=10, scenes=3, step=0.005), seed=2)
        embeddings = world.feature_matrix().data.astype(np.float64)
        manifest = world.manifest
        frames = list(manifest.all_frames())
        state = ALState.initial(frames, [FrameRef(0, 5)])
        pool = np.array([manifest.global_index(f) for f in state.unlabeled])
        entropies = ProxyLearner.fit(embeddings, [5], world.masks).entropies(pool)
        selection = get_registry().get("cowal").select(
            StrategyInput(
                manifest=manifest,
                embeddings=embeddings,
                state=state,
                budget=2,
                frame_entropies=tuple(
                    FrameScore(f, float(h)) for f, h in zip(state.unlabeled, entropies)
                ),
            )
        )
        assert sorted(f.video_id for f in selection.frames) == [1, 2]
        assert all(r.startswith("cluster=") for r in selection.reasons)


@pytest.mark.asyncio
async def test_parallel_cells_match_sequential():
    configs = [small_config(strategy=s) for s in ("random", "entropy")]
    with ThreadPoolExecutor(max_workers=2) as pool:
        threaded = await simulate_parallel(configs, jobs=2, executor=pool)
    sequential = await simulate_parallel(configs, jobs=1)
    assert [r.strategy for r in threaded] == ["entropy", "random"]
    assert [r.curves for r in threaded] == [r.curves for r in sequential]


def median_aualc(strategy: str, **overrides) -> tuple[float, list[float]]:
    result = run_simulation(SimulationConfig(strategy=strategy, **overrides))
    values = [v for _, _, v in result.aualc_rows()]
    return float(np.median(values)), values


@pytest.mark.slow
def test_strategy_ordering_on_redundant_world():
    cowal, cowal_runs = median_aualc("cowal", runs=20)
    random, _ = median_aualc("random", runs=20)
    entropy, entropy_runs = median_aualc("entropy", runs=20)
    coreset, _ = median_aualc("coreset", runs=20)
    assert cowal >= random >= entropy
    assert cowal >= coreset
    assert sign_test(cowal_runs, entropy_runs) < 0.05


@pytest.mark.slow
def test_ordering_holds_for_large_batches():
    world = WorldParams(videos=30)
    cowal, _ = median_aualc("cowal", runs=20, budget=50, steps=3, world=world)
    random, _ = median_aualc("random", runs=20, budget=50, steps=3, world=world)
    assert cowal >= random


@pytest.mark.slow
def test_cowal_batches_are_less_redundant():
    def spacing(strategy: str, seed: int) -> float:
        config = SimulationConfig(strategy=strategy, steps=1, runs=1, seed=seed)
        result = run_simulation(config)
        world = generate_world(config.world, seed)
        embeddings = prepare_embeddings(world, config)
        idx = [world.manifest.global_index(f) for f in result.runs[0].records[0].selected]
        return min_pairwise_distance(embeddings[idx])

    cowal = np.array([spacing("cowal", s) for s in range(20)])
    entropy = np.array([spacing("entropy", s) for s in range(20)])
    assert np.median(cowal) >= np.median(entropy)
    assert np.sum(cowal > entropy) >= 15

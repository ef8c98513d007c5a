import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from settlegen import blocks
from settlegen.evaluation import (CATEGORIES, DEFAULT_WEIGHTS, MetricError, accessibility_score,
                                  build_report, completeness, diversity_in_band, diversity_score,
                                  entrance_at_grade, evaluate, light_field, map_entry,
                                  material_localness, merge_weights, road_grade_score, role_variety,
                                  scorecard, spawn_safety_score, standing_mask, terrain_impact_score)
from settlegen.manifest import Building, Rect, RoadPlan, SettlementManifest, Yard
from settlegen.terrain import flat_world
from settlegen.voxel import BoundingBox, ShapeError, Vec3, VoxelWorld

import oracles

METRICS = sorted({m for table in DEFAULT_WEIGHTS.values() for m in table})


def hut(world, x0, z0, size=5, height=4, ground=None, door_face="north", block=blocks.STONE):
    """Hollow box on the ground with a doorway; returns its Building record."""
    g = ground if ground is not None else int(np.flatnonzero(world.ids[:, z0, x0] != 0).max())
    x1, z1 = x0 + size - 1, z0 + size - 1
    for x in range(x0, x1 + 1):
        for z in range(z0, z1 + 1):
            edge = x in (x0, x1) or z in (z0, z1)
            for y in range(g + 1, g + height + 1):
                world.ids[y, z, x] = block if edge else blocks.AIR
            world.ids[g + height + 1, z, x] = blocks.PLANKS
    dx = x0 + size // 2
    dz = z0 if door_face == "north" else z1
    world.ids[g + 1, dz, dx] = blocks.WOODEN_DOOR
    world.ids[g + 2, dz, dx] = blocks.WOODEN_DOOR
    world.data[g + 2, dz, dx] = 8
    return Building(BoundingBox(Vec3(x0, g, z0), Vec3(x1, g + height + 1, z1)), Vec3(dx, g + 1, dz),
                    "house", [block, blocks.PLANKS])


# -- accessibility ----------------------------------------------------------

def test_single_building_beside_spawn_reachable():
    w = flat_world(20, 16, 20, 4)
    b = hut(w, 8, 8)
    m = SettlementManifest([b], spawn=Vec3(10, 5, 4))
    acc = accessibility_score(w, m)
    assert acc.score == 1.0 and acc.reachable == [True]
    assert acc.mean_path_length == 4


def test_island_entrance_unreachable():
    w = flat_world(30, 16, 20, 4)
    w.ids[1:5, :, 12:18] = blocks.AIR
    w.ids[1:4, :, 12:18] = blocks.WATER
    a = hut(w, 2, 8)
    b = hut(w, 22, 8)
    m = SettlementManifest([a, b], spawn=Vec3(4, 5, 3))
    acc = accessibility_score(w, m)
    assert acc.reachable == [True, False] and acc.score == 0.5


def test_no_buildings_scores_zero():
    w = flat_world(8, 8, 8, 2)
    assert accessibility_score(w, SettlementManifest(spawn=Vec3(4, 3, 4))).score == 0.0


def test_spawn_inside_solid_column_uses_highest_standing():
    w = flat_world(10, 10, 10, 3)
    b = hut(w, 3, 3, door_face="south")
    m = SettlementManifest([b], spawn=Vec3(0, 0, 0))
    assert accessibility_score(w, m).score == 1.0


def random_small_world(rng, shape):
    ny, nz, nx = shape
    ids = np.zeros(shape, dtype=np.uint8)
    ground = rng.integers(1, ny - 2, size=(nz, nx))
    for z in range(nz):
        for x in range(nx):
            ids[:ground[z, x] + 1, z, x] = blocks.STONE
    noise = rng.random(shape)
    ids[noise < 0.05] = blocks.STONE
    ids[(noise > 0.97) & (ids == 0)] = blocks.TORCH
    ids[(noise > 0.5) & (noise < 0.52)] = blocks.WATER
    return ids


def test_accessibility_matches_flood_fill_oracle():
    rng = np.random.default_rng(30)
    for _ in range(15):
        shape = tuple(int(v) for v in rng.integers(4, 14, 3))
        ids = random_small_world(rng, shape)
        ny, nz, nx = shape
        w = VoxelWorld(nx, ny, nz, ids=ids)
        standing = standing_mask(w)
        states = np.argwhere(standing)
        if len(states) < 2:
            continue
        sy, sz, sx = states[rng.integers(len(states))]
        spawn_y = int(np.flatnonzero(standing[:, sz, sx]).max())
        reach = oracles.walk_reach_oracle(ids.tolist(), (int(sx), spawn_y, int(sz)))
        buildings = []
        for k in rng.integers(len(states), size=6):
            y, z, x = (int(v) for v in states[k])
            buildings.append(Building(BoundingBox(Vec3(x, y, z), Vec3(x, y, z)), Vec3(x, y, z), "house"))
        m = SettlementManifest(buildings, spawn=Vec3(int(sx), 0, int(sz)))
        acc = accessibility_score(w, m)
        want = [(b.entrance.x, b.entrance.y, b.entrance.z) in reach for b in buildings]
        assert acc.reachable == want


# -- light ------------------------------------------------------------------

def test_single_torch_levels():
    w = flat_world(15, 10, 15, 2)
    w.ids[3, 7, 7] = blocks.TORCH
    lf = light_field(w)
    assert lf.at(7, 3, 7) == 14
    assert lf.at(8, 3, 7) == lf.at(7, 4, 7) == lf.at(7, 3, 6) == 13
    assert lf.at(7, 2, 7) == 0          # the ground does not carry light
    assert lf.at(0, 3, 0) == 0          # 14 steps away


def test_two_torches_take_the_max():
    w = flat_world(20, 6, 3, 0)
    w.ids[1, 1, 2] = blocks.TORCH
    w.ids[1, 1, 12] = blocks.TORCH
    lf = light_field(w)
    row = [lf.at(x, 1, 1) for x in range(20)]
    want = [max(0, 14 - min(abs(x - 2), abs(x - 12))) for x in range(20)]
    assert row == want


def test_light_matches_oracle_on_random_worlds():
    rng = np.random.default_rng(31)
    for _ in range(10):
        shape = tuple(int(v) for v in rng.integers(3, 16, 3))
        ids = random_small_world(rng, shape)
        w = VoxelWorld(shape[2], shape[0], shape[1], ids=ids)
        assert light_field(w).level.tolist() == oracles.light_oracle(ids.tolist())


def test_light_field_sub_box():
    w = flat_world(10, 8, 10, 2)
    w.ids[3, 5, 5] = blocks.TORCH
    box = BoundingBox(Vec3(4, 3, 4), Vec3(9, 7, 9))
    assert light_field(w, box).at(5, 3, 5) == 14
    with pytest.raises(ValueError):
        light_field(w, BoundingBox(Vec3(0, 0, 0), Vec3(10, 7, 9)))


# -- spawn safety -----------------------------------------------------------

def plaza(torches):
    w = flat_world(9, 8, 9, 2)
    for x, z in torches:
        w.ids[3, z, x] = blocks.TORCH
    road = RoadPlan([Vec3(0, 2, 0), Vec3(8, 2, 8)], [False, False])
    return w, SettlementManifest(roads=[road])


def test_lit_plaza_is_safe():
    w, m = plaza([(2, 2), (2, 6), (6, 2), (6, 6)])
    assert spawn_safety_score(w, m, light_field(w)) == 1.0


def test_dark_plaza_is_unsafe():
    w, m = plaza([])
    assert spawn_safety_score(w, m, light_field(w)) == 0.0


def test_spawn_safety_matches_naive_audit():
    rng = np.random.default_rng(32)
    for _ in range(10):
        w = flat_world(24, 10, 24, 3)
        for _ in range(int(rng.integers(0, 4))):
            x, z = (int(v) for v in rng.integers(0, 24, 2))
            w.ids[4, z, x] = blocks.TORCH
        x0, z0 = (int(v) for v in rng.integers(0, 12, 2))
        road = RoadPlan([Vec3(x0, 3, z0), Vec3(x0 + 10, 3, z0 + 8)], [False, False])
        m = SettlementManifest(roads=[road])
        lf = light_field(w)
        ids = w.ids.tolist()
        walk = dark = 0
        for y in range(10):
            for z in range(z0, z0 + 9):
                for x in range(x0, x0 + 11):
                    if oracles.standing_oracle(ids, y, z, x):
                        walk += 1
                        dark += lf.at(x, y, z) < 8
        assert math.isclose(spawn_safety_score(w, m, lf), 1 - dark / walk)


# -- diversity --------------------------------------------------------------

def test_duplicates_have_zero_diversity():
    w = flat_world(30, 12, 12, 2)
    a, b = hut(w, 1, 1), hut(w, 10, 1)
    assert diversity_score(SettlementManifest([a, b]), w) == pytest.approx(0.0, abs=1e-12)
    assert diversity_score(SettlementManifest([a]), w) == 0.0


def test_diversity_hand_computed():
    w = flat_world(40, 14, 12, 2)
    bs = [hut(w, 1, 1, 5, 4), hut(w, 10, 1, 7, 6, block=blocks.COBBLESTONE),
          hut(w, 20, 1, 5, 3, block=blocks.SANDSTONE)]

    def feature(b):
        sx, sy, sz = b.bounds.size
        dims = np.array([sx, sz, sy], float) / math.sqrt(sx * sx + sy * sy + sz * sz)
        counts = {}
        for x in range(b.bounds.min.x, b.bounds.max.x + 1):
            for y in range(b.bounds.min.y, b.bounds.max.y + 1):
                for z in range(b.bounds.min.z, b.bounds.max.z + 1):
                    i = int(w.ids[y, z, x])
                    if i:
                        counts[i] = counts.get(i, 0) + 1
        hist = np.zeros(256)
        for i, c in counts.items():
            hist[i] = c
        return np.concatenate([dims, hist / math.sqrt(sum(c * c for c in counts.values()))])

    f = [feature(b) for b in bs]
    cos = lambda a, b: a @ b / math.sqrt((a @ a) * (b @ b))  # noqa: E731
    want = 1 - (cos(f[0], f[1]) + cos(f[0], f[2]) + cos(f[1], f[2])) / 3
    assert diversity_score(SettlementManifest(bs), w) == pytest.approx(want, abs=1e-9)


def test_diversity_band():
    assert diversity_in_band(0.5) == 1.0
    assert diversity_in_band(0.0) == diversity_in_band(1.0) == 0.0
    assert diversity_in_band(0.25) == pytest.approx(0.5)


# -- direct metrics ---------------------------------------------------------

def test_terrain_impact_examples():
    before = flat_world(16, 10, 16, 4)
    m = SettlementManifest()
    assert terrain_impact_score(before, before.copy(), m) == 1.0
    after = before.copy()
    after.ids[4, :8, :8] = blocks.STONE          # a quarter of the footprint
    assert terrain_impact_score(before, after, m) == 0.0
    after = before.copy()
    after.ids[4, :2, :8] = blocks.STONE          # 16 of 256 columns
    assert terrain_impact_score(before, after, m) == pytest.approx(0.75)


def test_terrain_impact_ignores_buildings_and_roads():
    before = flat_world(16, 10, 16, 4)
    after = before.copy()
    b = hut(after, 2, 2)
    after.ids[5, 10, 3:9] = blocks.GRAVEL
    road = RoadPlan([Vec3(x, 5, 10) for x in range(3, 9)], [False] * 6)
    assert terrain_impact_score(before, after, SettlementManifest([b], [road])) == 1.0


def test_terrain_impact_shape_mismatch():
    with pytest.raises(ShapeError):
        terrain_impact_score(flat_world(4, 4, 4, 1), flat_world(4, 5, 4, 1), SettlementManifest())


def test_road_grade_examples():
    flat = RoadPlan([Vec3(x, 5, 0) for x in range(6)], [False] * 6)
    assert road_grade_score(SettlementManifest(roads=[flat])) == 1.0
    ys = [5, 5, 6, 6, 9, 9, 8, 8, 8, 8]
    jumpy = RoadPlan([Vec3(x, y, 0) for x, y in enumerate(ys)], [False] * 10)
    assert road_grade_score(SettlementManifest(roads=[jumpy])) == pytest.approx(8 / 9)
    assert road_grade_score(SettlementManifest()) == 1.0


def test_road_grade_matches_recount():
    rng = np.random.default_rng(33)
    for _ in range(50):
        roads, ok, n = [], 0, 0
        for _ in range(int(rng.integers(1, 4))):
            ys = np.cumsum(rng.integers(-2, 3, int(rng.integers(2, 12))))
            roads.append(RoadPlan([Vec3(k, int(y), 0) for k, y in enumerate(ys)], [False] * len(ys)))
            d = np.abs(np.diff(ys))
            ok += int((d <= 1).sum())
            n += d.size
        assert road_grade_score(SettlementManifest(roads=roads)) == pytest.approx(ok / n)


def test_entrance_at_grade():
    w = flat_world(20, 14, 20, 4)
    good = hut(w, 2, 2)
    bad = Building(good.bounds, Vec3(good.entrance.x, good.entrance.y + 3, good.entrance.z), "house")
    assert entrance_at_grade(w, SettlementManifest([good])) == 1.0
    assert entrance_at_grade(w, SettlementManifest([good, bad])) == 0.5
    assert entrance_at_grade(w, SettlementManifest()) == 0.0


def test_material_localness():
    w = flat_world(10, 8, 10, 3)
    stone = Building(BoundingBox(Vec3(0, 0, 0), Vec3(1, 1, 1)), Vec3(0, 1, 0), "house",
                     [blocks.STONE, blocks.COBBLESTONE])
    assert material_localness(w, SettlementManifest([stone])) == 1.0
    brick = Building(stone.bounds, stone.entrance, "house", [blocks.STONE, blocks.BRICK])
    assert material_localness(w, SettlementManifest([brick])) == 0.5


def test_completeness_roofs_and_fences():
    w = flat_world(20, 12, 20, 3)
    b = hut(w, 2, 2)
    assert completeness(w, SettlementManifest([b])) == 1.0
    w.ids[b.bounds.max.y, 3, 3] = blocks.AIR                # one roof hole
    assert completeness(w, SettlementManifest([b])) == pytest.approx(24 / 25)
    yard = Yard(Rect(10, 10, 14, 14))
    for x, z in yard.rect.perimeter()[:8]:
        w.ids[4, z, x] = blocks.FENCE
    assert completeness(w, SettlementManifest([b], yards=[yard])) == pytest.approx((24 / 25 + 8 / 16) / 2)


def test_role_variety():
    b = lambda r: Building(BoundingBox(Vec3(0, 0, 0), Vec3(1, 1, 1)), Vec3(0, 0, 0), r)  # noqa: E731
    assert role_variety(SettlementManifest([b("house"), b("house")])) == pytest.approx(1 / 3)
    assert role_variety(SettlementManifest([b("house"), b("hall"), b("farm-plot"), b("x")])) == 1.0


# -- scorecard --------------------------------------------------------------

def test_scorecard_extremes():
    ones = scorecard({m: 1.0 for m in METRICS})
    assert ones.categories == {c: pytest.approx(10.0) for c in CATEGORIES}
    assert ones.total == pytest.approx(40.0)
    zeros = scorecard({m: 0.0 for m in METRICS})
    assert zeros.categories == {c: 0.0 for c in CATEGORIES}


@pytest.mark.parametrize("value", [-0.01, 1.5, float("nan")])
def test_scorecard_rejects_out_of_range(value):
    metrics = {m: 0.5 for m in METRICS}
    metrics["accessibility"] = value
    with pytest.raises(MetricError):
        scorecard(metrics)


def test_weights_override_and_validation():
    card = scorecard({m: 1.0 for m in METRICS}, {"narrative": {"role_variety": 0.5}})
    assert card.narrative == pytest.approx(5.0)
    clamp = scorecard({m: 1.0 for m in METRICS}, {"narrative": {"role_variety": 3.0}})
    assert clamp.narrative == 10.0
    for bad in ({"nope": {}}, {"narrative": {"role_variety": -1}}, {"narrative": 1},
                {"narrative": {"role_variety": True}}):
        with pytest.raises(MetricError):
            merge_weights(bad)


weights_st = st.fixed_dictionaries({
    cat: st.fixed_dictionaries({m: st.floats(0, 2) for m in table})
    for cat, table in DEFAULT_WEIGHTS.items()})
metrics_st = st.fixed_dictionaries({m: st.floats(0, 1) for m in METRICS})


@settings(max_examples=300, deadline=None)
@given(metrics_st, weights_st, st.sampled_from(METRICS), st.floats(0, 1))
def test_scorecard_monotone(metrics, weights, name, bump):
    low = scorecard(metrics, weights)
    raised = dict(metrics)
    raised[name] = max(metrics[name], bump)
    high = scorecard(raised, weights)
    for c in CATEGORIES:
        assert high.categories[c] >= low.categories[c]
        assert 0.0 <= high.categories[c] <= 10.0


# -- assembly ---------------------------------------------------------------

def test_evaluate_is_read_only_and_in_range():
    before = flat_world(24, 12, 24, 4)
    after = before.copy()
    b = hut(after, 3, 3)
    after.ids[5, 12, 12] = blocks.TORCH
    m = SettlementManifest([b], spawn=Vec3(12, 5, 12))
    snap_b, snap_a = before.copy(), after.copy()
    ev = evaluate(before, after, m)
    assert before.same_cells(snap_b) and after.same_cells(snap_a)
    assert all(0.0 <= v <= 1.0 for v in ev.metrics.values())
    assert ev.metrics["accessibility"] == 1.0
    entry = map_entry("m", ev)
    report = build_report([entry, entry], 1.5)
    assert set(report["maps"][0]["categories"]) == set(CATEGORIES)
    assert report["grand_total"] == pytest.approx(2 * entry["total"])
    assert report["notes"]


def test_degenerate_identical_worlds():
    w = flat_world(16, 8, 16, 3)
    ev = evaluate(w, w.copy(), SettlementManifest(spawn=Vec3(8, 4, 8)))
    assert ev.metrics["terrain_impact"] == 1.0 and ev.metrics["accessibility"] == 0.0


def test_evaluate_shape_mismatch():
    with pytest.raises(ShapeError):
        evaluate(flat_world(4, 4, 4, 1), flat_world(5, 4, 4, 1), SettlementManifest())

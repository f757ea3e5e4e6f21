from fractions import Fraction

import numpy as np
import pytest

from soldisk.action import (
    ActionError,
    DiskTree,
    fiber_disks,
    orbit_to_csv,
    tree_to_json,
)
from soldisk.plan import build, center
from soldisk.profile import standard_model

F = Fraction


# -- tree structure -------------------------------------------------------------


def test_level_counts(preset3_tree):
    assert [len(preset3_tree.level_disks(lv)) for lv in range(4)] == [1, 2, 6, 24]


def test_children_count_matches_group_order(preset3_tree):
    tree = preset3_tree
    for lv in range(1, 4):
        order = tree.chain.levels[lv - 1].group.order
        for node in tree.level_disks(lv - 1):
            assert len(tree.children(node)) == order


def test_labels_sorted_and_distinct(preset3_tree, auto_k2_tree):
    for tree in (preset3_tree, auto_k2_tree):
        for lv in range(1, tree.plan.levels + 1):
            labels = [n.label for n in tree.level_disks(lv)]
            assert labels == sorted(labels)
            assert len(set(labels)) == len(labels)


def test_disks_nest_strictly(preset3_tree, auto_k2_tree):
    for tree in (preset3_tree, auto_k2_tree):
        for lv in range(tree.plan.levels):
            r_parent, r_child = tree.radius_of(lv), tree.radius_of(lv + 1)
            for node in tree.level_disks(lv):
                for kid in tree.children(node):
                    d = float(np.linalg.norm(kid.center - node.center))
                    # inside the parent's inner plateau, with proper slack
                    assert d + r_child < (2 / 3) * r_parent


def test_sibling_disks_disjoint(preset3_tree, auto_k2_tree):
    for tree in (preset3_tree, auto_k2_tree):
        for lv in range(1, tree.plan.levels + 1):
            nodes = tree.level_disks(lv)
            r = tree.radius_of(lv)
            centers = np.array([n.center for n in nodes])
            for i in range(len(nodes)):
                d = np.linalg.norm(centers[i + 1:] - centers[i], axis=1)
                assert (d > 2 * r).all()


def test_node_cap(preset3):
    tree = DiskTree(preset3, max_nodes=3)
    level1 = tree.level_disks(1)  # 1 + 2 nodes, exactly at the cap
    with pytest.raises(ActionError):
        tree.children(level1[0])


def test_fiber_disks(preset3_tree):
    disks = fiber_disks(preset3_tree, 1)
    assert len(disks) == 2
    assert all(r == F(1, 8) for _, r in disks)
    centers = sorted(tuple(c) for c, _ in disks)
    assert abs(centers[0][0] + 0.5) < 1e-15 and abs(centers[1][0] - 0.5) < 1e-15
    base = fiber_disks(preset3_tree, 0)
    assert len(base) == 1
    assert np.array_equal(base[0][0], [0.0, 0.0]) and base[0][1] == F(1)


# -- locate ----------------------------------------------------------------------


def test_locate_center_full_depth(preset3_tree):
    tree = preset3_tree
    for node in tree.level_disks(3):
        itinerary = tree.locate(node.center)
        assert len(itinerary) == 3
        assert itinerary[-1].label == node.label
        for lv, step in enumerate(itinerary, start=1):
            assert step.level == lv


def test_locate_outside_everything(preset3_tree):
    assert preset3_tree.locate(np.array([0.9, 0.0])) == []
    assert preset3_tree.locate(np.array([0.0, 0.3])) == []  # between the disks


def test_locate_respects_depth(preset3_tree):
    node = preset3_tree.level_disks(2)[0]
    assert len(preset3_tree.locate(node.center, 1)) == 1


def test_itinerary_is_ancestor_chain(auto_k2_tree):
    tree = auto_k2_tree
    for node in tree.level_disks(2):
        itinerary = tree.locate(node.center, 2)
        assert itinerary[1].label == node.label
        assert itinerary[0].label in [p.label for p in tree.level_disks(1)]
        kids = tree.children(itinerary[0])
        assert node.label in [kid.label for kid in kids]


# -- stages and generators -------------------------------------------------------


def test_generator_rotation_values(preset3_tree):
    assert preset3_tree.generator_rotation(1, 0) == (F(1, 2),)
    assert preset3_tree.generator_rotation(2, 0) == (F(1, 6),)
    assert preset3_tree.generator_rotation(3, 0) == (F(1, 24),)
    assert preset3_tree.generator_rotation(2, 0, sign=-1) == (F(-1, 6),)


def test_stage_level_one_is_basic_map(preset3_tree):
    z = np.array([0.2, 0.1])
    rot = preset3_tree.generator_rotation(1, 0)
    assert np.array_equal(
        preset3_tree.stage_map(1, rot, z),
        standard_model(preset3_tree.profile, rot, z))


def test_stage_off_tree_is_identity(preset3_tree):
    z = np.array([0.0, 0.45])
    rot = preset3_tree.generator_rotation(2, 0)
    w = preset3_tree.stage_map(2, rot, z)
    assert np.array_equal(w, z) and w is not z


def test_stage_matches_manual_conjugation(preset3_tree):
    tree = preset3_tree
    node = tree.level_disks(1)[1]  # the disk at (+1/2, 0)
    z = node.center + np.array([0.01, 0.02])
    rot = tree.generator_rotation(2, 0)
    rad = tree.radius_of(1)
    want = node.center + rad * standard_model(
        tree.profile, rot, (z - node.center) / rad)
    assert np.array_equal(tree.stage_map(2, rot, z), want)


def test_generator_guards(preset3_tree):
    z = np.zeros(2)
    with pytest.raises(ActionError):
        preset3_tree.apply_generator(1, 1, z)
    with pytest.raises(ActionError):
        preset3_tree.apply_generator(0, 0, z)
    with pytest.raises(ActionError):
        preset3_tree.apply_generator(4, 0, z)


def test_generator_half_turn(preset3_tree):
    w = preset3_tree.apply_generator(1, 0, np.array([0.5, 0.0]))
    assert abs(w[0] + 0.5) < 1e-15 and abs(w[1]) < 1e-15


def test_generator_fixes_origin_exactly(preset3_tree, auto_k2_tree):
    for tree in (preset3_tree, auto_k2_tree):
        for j in range(tree.plan.k):
            w = tree.apply_generator(tree.plan.levels, j, np.zeros(tree.plan.q))
            assert np.array_equal(w, np.zeros(tree.plan.q))


def test_generator_fixes_boundary_bitwise(preset3_tree):
    z = np.array([0.6, 0.6])
    w = preset3_tree.apply_generator(3, 0, z)
    assert np.array_equal(w, z)


def test_generator_inverse(preset3_tree, auto_k2_tree):
    rng = np.random.default_rng(2)
    for tree in (preset3_tree, auto_k2_tree):
        depth = tree.plan.levels
        for _ in range(25):
            z = rng.uniform(-0.7, 0.7, tree.plan.q)
            for j in range(tree.plan.k):
                w = tree.apply_generator(depth, j, z)
                back = tree.apply_generator(depth, j, w, sign=-1)
                assert np.allclose(back, z, atol=1e-12)


def test_generator_moves_centers_to_shifted_labels(preset3_tree):
    tree = preset3_tree
    plan = tree.plan
    for lv in range(1, 4):
        n = 1
        for i in range(lv):
            n *= tree.chain.levels[i].group.order
        for node in tree.level_disks(lv):
            w = tree.apply_generator(lv, 0, node.center.copy())
            shifted = tree.chain.levels[lv - 1].coset_group.reduce(
                (node.label[0] + 1,))
            want = center(plan, lv, shifted)
            assert np.allclose(w, want, atol=1e-12)


def test_element_word_semantics(preset3_tree):
    tree = preset3_tree
    z = np.array([0.47, 0.06])
    assert np.array_equal(tree.apply_element(3, (1,), z),
                          tree.apply_generator(3, 0, z))
    assert np.array_equal(tree.apply_element(3, (0,), z), z)
    with pytest.raises(ActionError):
        tree.apply_element(3, (1, 1), z)


def test_element_inverse_word(auto_k2_tree):
    tree = auto_k2_tree
    rng = np.random.default_rng(4)
    for _ in range(10):
        z = rng.uniform(-0.6, 0.6, 2)
        w = tree.apply_element(3, (2, -1), z)
        back = tree.apply_element(3, (-2, 1), w)
        assert np.allclose(back, z, atol=1e-11)


def test_depth_one_period(preset3_tree):
    z = np.array([0.5, 0.0])
    w = preset3_tree.apply_element(1, (2,), z)
    assert np.allclose(w, z, atol=1e-12)


# -- periodic zones and orbits ---------------------------------------------------


def test_periodic_zone_level_zero(preset3_tree):
    assert preset3_tree.in_periodic_zone(0, np.array([0.1, 0.05]))
    assert not preset3_tree.in_periodic_zone(0, np.array([0.2, 0.0]))


def test_periodic_zone_level_one(preset3_tree):
    assert preset3_tree.in_periodic_zone(1, np.array([0.5 + 0.01, 0.0]))
    assert not preset3_tree.in_periodic_zone(1, np.array([0.5 + 0.03, 0.0]))
    assert not preset3_tree.in_periodic_zone(1, np.array([0.0, 0.3]))


def test_orbit_radius_zero(preset3_tree):
    z = np.array([0.31, -0.2])
    samples = preset3_tree.orbit_sample(3, z, 0)
    assert len(samples) == 1
    assert samples[0][0] == (0,)
    assert np.array_equal(samples[0][1], z)


def test_orbit_half_turn_collapses(preset3_tree):
    samples = preset3_tree.orbit_sample(1, np.array([0.5, 0.0]), 1)
    assert len(samples) == 2
    words = [w for w, _ in samples]
    assert words == [(-1,), (0,)]
    pts = {w: p for w, p in samples}
    assert np.array_equal(pts[(0,)], [0.5, 0.0])
    assert abs(pts[(-1,)][0] + 0.5) < 1e-15


def test_orbit_far_point_is_singleton(preset3_tree):
    z = np.array([0.8, 0.1])
    samples = preset3_tree.orbit_sample(3, z, 2)
    assert len(samples) == 1
    assert np.array_equal(samples[0][1], z)


def test_orbit_cap(preset3_tree):
    with pytest.raises(ActionError):
        preset3_tree.orbit_sample(1, np.zeros(2), 60, cap=100)


def test_orbit_count_bounded_by_box(auto_k2_tree):
    z = np.array([0.5, 0.0])
    samples = auto_k2_tree.orbit_sample(2, z, 1)
    assert 1 <= len(samples) <= 9
    assert len({pt.tobytes() for _, pt in samples}) == len(samples)


# -- exports ---------------------------------------------------------------------


def test_orbit_csv_round_trip(preset3_tree):
    samples = preset3_tree.orbit_sample(3, np.array([0.5, 0.0]), 1)
    text = orbit_to_csv(samples, 1, 2)
    lines = text.strip().split("\n")
    assert lines[0] == "g1,x1,x2"
    assert len(lines) == 1 + len(samples)
    for (word, pt), line in zip(samples, lines[1:]):
        cells = line.split(",")
        assert int(cells[0]) == word[0]
        assert [float(c) for c in cells[1:]] == list(pt)  # 17 digits round-trip


def test_tree_json_shape(preset3_tree):
    doc = tree_to_json(preset3_tree, 2)
    assert doc["level"] == 0 and doc["radius"] == 1.0 and doc["coset"] == [0]
    assert len(doc["children"]) == 2
    leaves = [g for kid in doc["children"] for g in kid["children"]]
    assert len(leaves) == 6
    assert all(leaf["children"] == [] for leaf in leaves)
    assert all(leaf["radius"] == 1 / 96 for leaf in leaves)


def test_tree_json_depth_guard(preset3_tree):
    with pytest.raises(ActionError):
        tree_to_json(preset3_tree, 4)

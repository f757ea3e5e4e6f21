"""Evaluation of the commuting disk action described by a plan.

The level-l disks form a tree: the root is the unit disk, and each level-l
node carries one coset label of the level's deck group.  Nodes expand
lazily (deep levels can be huge) under a global node cap, children sorted
by canonical label so every traversal is deterministic.

A generator acts as a composition of stage maps: stage 1 is the basic
rotation map on the unit disk; stage l >= 2 conjugates the basic map by
the affine frame of the level-(l-1) disk containing the current point,
with the level's renormalized rotation vector.  Outside the level-(l-1)
disks a stage is the identity, and once a point falls off the tree all
deeper stages are skipped.  Inverses negate every stage's rotation
vector; the stages commute on the regions where that matters (all stage
rotations live in one maximal torus, and nonlinearity is radial-only),
which the certification suite checks numerically.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .plan import SolenoidPlan
from .profile import Point, standard_model, torus_rotation


class ActionError(ValueError):
    pass


@dataclass
class DiskNode:
    level: int
    label: tuple[int, ...]
    center: Point
    children: list["DiskNode"] | None = field(default=None, repr=False)
    child_centers: np.ndarray | None = field(default=None, repr=False)


class DiskTree:
    """Lazy tree of nested disks for one plan, with action evaluation."""

    def __init__(self, plan: SolenoidPlan, max_nodes: int = 200_000):
        self.plan = plan
        self.profile = plan.profile
        self.chain = plan.chain
        self.max_nodes = max_nodes
        self.root = DiskNode(0, (0,) * plan.k, np.zeros(plan.q))
        self._radius_f = [float(plan.radius(lv)) for lv in range(plan.levels + 1)]
        self._count = 1
        self._lock = threading.Lock()
        self._gen_rot: dict[tuple[int, int, int], tuple[Fraction, ...]] = {}

    # -- structure -------------------------------------------------------

    def radius_of(self, level: int) -> float:
        return self._radius_f[level]

    def children(self, node: DiskNode) -> list[DiskNode]:
        if node.children is not None:
            return node.children
        with self._lock:
            if node.children is not None:
                return node.children
            lv = node.level + 1
            if lv > self.plan.levels:
                raise ActionError(f"plan has no level {lv}")
            level_data = self.chain.levels[lv - 1]
            count = level_data.group.order
            if self._count + count > self.max_nodes:
                raise ActionError(
                    f"expanding level {lv} needs {count} nodes and exceeds the "
                    f"cap {self.max_nodes}")
            cum_prev = self.chain.cumulative(lv - 1)
            seed = self.plan.seed_point(lv)
            kids = []
            for w in level_data.group.representatives():
                vec = tuple(
                    node.label[i] + sum(cum_prev[i][j] * w[j] for j in range(self.plan.k))
                    for i in range(self.plan.k))
                label = level_data.coset_group.reduce(vec)
                angles = self.chain.total_rotation(lv, label)
                kids.append(DiskNode(lv, label, node.center + torus_rotation(angles, seed)))
            kids.sort(key=lambda n: n.label)
            node.children = kids
            node.child_centers = np.array([n.center for n in kids])
            self._count += count
            return kids

    def level_disks(self, level: int) -> list[DiskNode]:
        """All nodes at a level, canonical label order (expands the tree)."""
        nodes = [self.root]
        for _ in range(level):
            nodes = [kid for n in nodes for kid in self.children(n)]
        if level > 0:
            nodes.sort(key=lambda n: n.label)
        return nodes

    def locate(self, z: Point, depth: int | None = None) -> list[DiskNode]:
        """Itinerary of disks containing z, from level 1 down, longest prefix."""
        if depth is None:
            depth = self.plan.levels
        out: list[DiskNode] = []
        node = self.root
        for lv in range(1, depth + 1):
            kids = self.children(node)
            centers = node.child_centers
            d2 = np.sum((centers - z) ** 2, axis=1)
            i = int(np.argmin(d2))
            if d2[i] <= self._radius_f[lv] ** 2:
                node = kids[i]
                out.append(node)
            else:
                break
        return out

    # -- action ----------------------------------------------------------

    def generator_rotation(self, level: int, j: int, sign: int = 1) -> tuple[Fraction, ...]:
        key = (level, j, sign)
        if key not in self._gen_rot:
            e = tuple(int(t == j) for t in range(self.plan.k))
            rot = self.chain.local_rotation(level, e)
            self._gen_rot[key] = tuple(sign * x for x in rot)
        return self._gen_rot[key]

    def stage_map(self, level: int, rotation: Sequence[Fraction], z: Point) -> Point:
        """The level-`level` correction stage at z (identity off the tree)."""
        if level == 1:
            return standard_model(self.profile, rotation, z)
        itinerary = self.locate(z, level - 1)
        if len(itinerary) < level - 1:
            return z.copy()
        node = itinerary[-1]
        rad = self._radius_f[node.level]
        w = (z - node.center) / rad
        w = standard_model(self.profile, rotation, w)
        return node.center + rad * w

    def apply_generator(self, depth: int, j: int, z: Point, sign: int = 1) -> Point:
        """One generator of the depth-`depth` action applied to z."""
        if not 0 <= j < self.plan.k:
            raise ActionError(f"generator index {j} out of range")
        if not 1 <= depth <= self.plan.levels:
            raise ActionError(f"depth {depth} outside plan levels")
        z = standard_model(self.profile, self.generator_rotation(1, j, sign), z)
        for lv in range(2, depth + 1):
            itinerary = self.locate(z, lv - 1)
            if len(itinerary) < lv - 1:
                break
            node = itinerary[-1]
            rad = self._radius_f[node.level]
            w = (z - node.center) / rad
            w = standard_model(self.profile, self.generator_rotation(lv, j, sign), w)
            z = node.center + rad * w
        return z

    def apply_element(self, depth: int, word: Sequence[int], z: Point) -> Point:
        """Apply the group element with the given generator exponents."""
        if len(word) != self.plan.k:
            raise ActionError("word length must equal the number of generators")
        for j, power in enumerate(word):
            sign = 1 if power >= 0 else -1
            for _ in range(abs(power)):
                z = self.apply_generator(depth, j, z, sign)
        return z

    def in_periodic_zone(self, level: int, z: Point) -> bool:
        """True when z lies in the open 1/6-core of a level-`level` disk."""
        if level == 0:
            return float(np.linalg.norm(z)) < 1.0 / 6.0
        itinerary = self.locate(z, level)
        if len(itinerary) < level:
            return False
        node = itinerary[-1]
        return float(np.linalg.norm(z - node.center)) < self._radius_f[level] / 6.0

    def orbit_sample(self, depth: int, z: Point, word_radius: int,
                     cap: int = 100_000) -> list[tuple[tuple[int, ...], Point]]:
        """Distinct orbit points over the box of words with sup-norm <=
        word_radius, lexicographic word order (first word per point kept).

        Distinctness is bit-exact, so words acting identically (e.g. both
        signs of an order-2 rotation) collapse deterministically.
        """
        count = (2 * word_radius + 1) ** self.plan.k
        if count > cap:
            raise ActionError(f"orbit of {count} words exceeds cap {cap}")
        out: dict[bytes, tuple[tuple[int, ...], Point]] = {}
        for word in product(range(-word_radius, word_radius + 1), repeat=self.plan.k):
            pt = self.apply_element(depth, word, z.copy())
            out.setdefault(pt.tobytes(), (word, pt))
        return list(out.values())


# ---------------------------------------------------------------------------
# exports


def fiber_disks(tree: DiskTree, level: int) -> list[tuple[Point, Fraction]]:
    """(center, radius) for every level-`level` disk — the stage-`level`
    covering of the fiber Cantor set."""
    rad = tree.plan.radius(level)
    return [(node.center, rad) for node in tree.level_disks(level)]


def orbit_to_csv(samples: Iterable[tuple[tuple[int, ...], Point]], k: int, q: int) -> str:
    header = ",".join([f"g{j + 1}" for j in range(k)] + [f"x{i + 1}" for i in range(q)])
    lines = [header]
    for word, point in samples:
        lines.append(",".join([str(w) for w in word] +
                              [f"{float(x):.17g}" for x in point]))
    return "\n".join(lines) + "\n"


def tree_to_json(tree: DiskTree, depth: int) -> dict:
    """Nested {level, coset, center, radius, children} document."""
    if depth > tree.plan.levels:
        raise ActionError(f"plan has no level {depth}")

    def node_doc(node: DiskNode) -> dict:
        doc = {
            "level": node.level,
            "coset": list(node.label),
            "center": [float(x) for x in node.center],
            "radius": tree.radius_of(node.level),
        }
        if node.level < depth:
            doc["children"] = [node_doc(kid) for kid in tree.children(node)]
        else:
            doc["children"] = []
        return doc

    return node_doc(tree.root)

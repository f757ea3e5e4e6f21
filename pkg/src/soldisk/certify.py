"""Numerical certification of a plan's action against its derivative budgets.

Checks fall into three groups:

  * derivative estimates: the correction stage of each level, measured by
    finite differences on stratified samples, against the certified
    first-order bound (1 + 2 pi kappa_1) ||rot|| and the higher-order
    bounds C_p radius^(1-p) ||rot||;
  * exact budget arithmetic: the inductive closeness inequalities checked
    in exact rational arithmetic, with a measured cross-check;
  * structural properties: fixed origin, boundary identity, volume,
    commutativity, disk invariance, periodicity over the level's deck
    translations, the level-1 norm shell, coset transitivity and center
    equivariance; a distality probe is reported without being asserted.

Tolerances: 1e-12 for exact-arithmetic float comparisons, 1e-9 for
composed-map identities, 1e-6 for first-order finite differences, 1e-4
for the second-order vanishing floor; relative slack 0.1% on the C^1
bound and 1% on higher orders.  --tolerance-scale multiplies all of them.
Reports are plain dicts with a canonical JSON form; byte-identical for
identical (plan, seed, order, scale).
"""

from __future__ import annotations

import hashlib
import math
import multiprocessing
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, islice, product
from typing import Callable, Sequence

import numpy as np

from .action import ActionError, DiskTree
from .lattice import dumps_canonical
from .plan import SolenoidPlan, plan_to_json, verify_plan
from .profile import Point

TOL_EXACT = 1e-12
TOL_COMPOSED = 1e-9
TOL_FIRST_ORDER = 1e-6
TOL_NOISE_FLOOR = 1e-4
C1_SLACK = 1e-3
CP_SLACK = 1e-2


class CertifyError(ValueError):
    """Unusable certification request (wrong order, bad arguments)."""


@dataclass
class CheckResult:
    name: str
    level: int | None = None
    generator: int | None = None
    order: int | None = None
    measured: float | None = None
    bound: float | None = None
    tolerance: float | None = None
    passed: bool | None = None
    asserted: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "level": self.level,
            "generator": self.generator,
            "order": self.order,
            "measured": self.measured,
            "bound": self.bound,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "asserted": self.asserted,
            "note": self.note,
        }


# ---------------------------------------------------------------------------
# finite differences


def orthonormal_frame(z: Point) -> np.ndarray:
    """Orthonormal basis with the radial direction first (Householder)."""
    q = len(z)
    n = float(np.linalg.norm(z))
    if n < 1e-12:
        return np.eye(q)
    r = z / n
    v = np.zeros(q)
    v[0] = 1.0
    v = v - r
    vn = float(np.linalg.norm(v))
    if vn < 1e-14:
        return np.eye(q)
    v /= vn
    return np.eye(q) - 2.0 * np.outer(v, v)


def finite_diff(f: Callable[[Point], Point], z: Point, multi_index: Sequence[int],
                step: float, frame: np.ndarray | None = None,
                domain_radius: float = 1.0) -> np.ndarray:
    """Nested central differences along frame directions (1 = radial).

    O(step^2) per differentiation, 2^p evaluations.  Raises when the
    stencil would leave the ambient ball of the given radius.
    """
    if frame is None:
        frame = orthonormal_frame(z)
    p = len(multi_index)
    if p < 1:
        raise CertifyError("multi_index must have at least one entry")
    if any(not 1 <= i <= len(z) for i in multi_index):
        raise CertifyError("multi_index entries must be in 1..q")
    if float(np.linalg.norm(z)) + p * step > domain_radius:
        raise CertifyError("evaluation point too close to the boundary for the stencil")

    def rec(mi: tuple[int, ...], y: Point) -> np.ndarray:
        if not mi:
            return f(y)
        u = frame[:, mi[0] - 1] * step
        return (rec(mi[1:], y + u) - rec(mi[1:], y - u)) / (2.0 * step)

    return rec(tuple(multi_index), z)


def fd_jacobian(f: Callable[[Point], Point], z: Point, step: float) -> np.ndarray:
    """5-point (4th order) central-difference Jacobian, columns by axis."""
    q = len(z)
    cols = []
    for i in range(q):
        u = np.zeros(q)
        u[i] = step
        d = (8.0 * (f(z + u) - f(z - u)) - (f(z + 2 * u) - f(z - 2 * u))) / (12.0 * step)
        cols.append(d)
    return np.stack(cols, axis=1)


# ---------------------------------------------------------------------------
# sampling


def _ball(rng: np.random.Generator, q: int, count: int, rmax: float = 1.0) -> np.ndarray:
    x = rng.standard_normal((count, q))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    r = rmax * rng.random(count) ** (1.0 / q)
    return x * r[:, None]


def _stratified(tree: DiskTree, level: int, total: int, rng: np.random.Generator,
                rmax: float = 1.0, disk_cap: int = 4096):
    """(node, points) batches: uniform-in-frame-ball samples per level disk."""
    nodes = tree.level_disks(level)
    if len(nodes) > disk_cap:
        idx = sorted(rng.choice(len(nodes), size=disk_cap, replace=False))
        nodes = [nodes[i] for i in idx]
    per = max(1, -(-total // len(nodes)))
    rad = tree.radius_of(level)
    out = []
    for node in nodes:
        out.append((node, node.center + rad * _ball(rng, tree.plan.q, per, rmax)))
    return out


# ---------------------------------------------------------------------------
# derivative checks


def _stage_fn(tree: DiskTree, level: int, j: int) -> Callable[[Point], Point]:
    rot = tree.generator_rotation(level, j)
    return lambda z: tree.stage_map(level, rot, z)


def _rot_norm(tree: DiskTree, level: int, j: int) -> float:
    rot = tree.generator_rotation(level, j)
    return math.sqrt(sum(float(x) * float(x) for x in rot))


def _c1_sweep(tree: DiskTree, level: int, j: int, pts: np.ndarray, step: float) -> tuple[float, float]:
    f = _stage_fn(tree, level, j)
    q = pts.shape[1]
    disp = 0.0
    dev = 0.0
    eye = np.eye(q)
    for z in pts:
        fz = f(z)
        disp = max(disp, float(np.linalg.norm(fz - z)))
        for i in range(q):
            u = eye[i] * step
            col = (f(z + u) - f(z - u)) / (2.0 * step)
            dev = max(dev, float(np.linalg.norm(col - eye[i])))
    return disp, dev


_WORKER_TREE: DiskTree | None = None


def _init_worker(plan_doc: dict) -> None:
    global _WORKER_TREE
    from .plan import plan_from_json
    _WORKER_TREE = DiskTree(plan_from_json(plan_doc))


def _c1_task(args) -> tuple[float, float]:
    level, j, pts, step = args
    return _c1_sweep(_WORKER_TREE, level, j, pts, step)


def c1_check(tree: DiskTree, level: int, j: int, *, rng: np.random.Generator,
             samples: int = 10_000, tol_scale: float = 1.0, jobs: int = 1) -> CheckResult:
    """First-order deviation of the level's correction stage vs its bound.

    measured = max over a stratified grid of the parent-level disks of
    (displacement, axis-wise first-difference operator deviation);
    bound = (1 + 2 pi kappa_1) * ||rotation vector||.
    """
    parent = level - 1
    bound = (1.0 + 2.0 * math.pi * tree.profile.kappa1) * _rot_norm(tree, level, j)
    step = 1e-4 * tree.radius_of(parent)
    batches = _stratified(tree, parent, samples, rng)
    tasks = [(level, j, pts, step) for _, pts in batches]
    if jobs > 1 and len(tasks) > 1:
        ctx = multiprocessing.get_context("spawn")
        with ctx.Pool(jobs, initializer=_init_worker,
                      initargs=(plan_to_json(tree.plan),)) as pool:
            results = pool.map(_c1_task, tasks)
    else:
        results = [_c1_sweep(tree, level, j, pts, step) for _, pts in batches]
    measured = max(max(a, b) for a, b in results)
    tol = C1_SLACK * tol_scale
    return CheckResult(
        name="c1_deviation", level=level, generator=j, order=1,
        measured=measured, bound=bound, tolerance=tol,
        passed=bool(measured <= bound * (1.0 + tol)))


def cp_check(tree: DiskTree, level: int, j: int, p: int, *, rng: np.random.Generator,
             samples: int = 1500, tol_scale: float = 1.0) -> list[CheckResult]:
    """Order-p mixed partials of the correction stage vs C_p radius^(1-p) ||rot||.

    Also asserts the vanishing of multi-indices made of distinct
    non-radial directions (the stencil cancels exactly; anything measured
    there is finite-difference noise).
    """
    if p < 2:
        raise CertifyError("cp_check needs p >= 2; use c1_check for p = 1")
    parent = level - 1
    rad = tree.radius_of(parent)
    bound = tree.profile.cbound(p) * rad ** (1 - p) * _rot_norm(tree, level, j)
    step = 1e-4 * rad
    f = _stage_fn(tree, level, j)
    q = tree.plan.q
    all_mi = list(combinations_with_replacement(range(1, q + 1), p))
    vanishing = [mi for mi in all_mi
                 if all(i > 1 for i in mi) and len(set(mi)) == len(mi) and len(mi) >= 2]
    measured = 0.0
    van_measured = 0.0
    for node, pts in _stratified(tree, parent, samples, rng, rmax=0.98):
        for z in pts:
            frame = orthonormal_frame(z - node.center)
            for mi in all_mi:
                d = finite_diff(lambda y: f(y) - y, z, mi, step, frame=frame,
                                domain_radius=math.inf)
                val = float(np.linalg.norm(d))
                measured = max(measured, val)
                if mi in vanishing:
                    van_measured = max(van_measured, val)
    out = [CheckResult(
        name="cp_bound", level=level, generator=j, order=p,
        measured=measured, bound=bound, tolerance=CP_SLACK * tol_scale,
        passed=bool(measured <= bound * (1.0 + CP_SLACK * tol_scale)))]
    if vanishing:
        tol = TOL_NOISE_FLOOR * tol_scale
        out.append(CheckResult(
            name="cp_vanishing", level=level, generator=j, order=p,
            measured=van_measured, bound=tol, tolerance=tol,
            passed=bool(van_measured <= tol)))
    return out


def cauchy_check(plan: SolenoidPlan, order: int, tree: DiskTree | None = None, *,
                 rng: np.random.Generator | None = None, samples: int = 200,
                 tol_scale: float = 1.0) -> list[CheckResult]:
    """Exact inductive closeness inequalities, plus a measured cross-check.

    Exact part (Fractions throughout): for every level l+1, generator j
    and 1 <= p <= order,
        ||local_rot_{l+1}(e_j)|| <= closeness * radius_l^(order-1) / (2^l C_p).
    Measured part: the stage's p-th finite differences stay within
    closeness * 2^-l when a tree is available.
    """
    out: list[CheckResult] = []
    if not plan.budget_enforced:
        out.append(CheckResult(
            name="cauchy_exact", measured=None, bound=None, tolerance=None,
            passed=None, asserted=False,
            note="plan built without budget enforcement; exact budgets not claimed"))
        return out
    for lv in range(1, plan.levels + 1):
        l = lv - 1
        rad = plan.radius(l)
        for j in range(plan.k):
            e = tuple(int(t == j) for t in range(plan.k))
            rot = plan.chain.local_rotation(lv, e)
            lhs_sq = sum((x * x for x in rot), Fraction(0))
            worst_margin = None
            ok = True
            for p in range(1, order + 1):
                cp = Fraction(plan.profile.cbound(p))
                rhs = plan.closeness * rad ** (order - 1) / ((1 << l) * cp)
                if lhs_sq > rhs * rhs:
                    ok = False
                margin = float(rhs)
                if worst_margin is None or margin < worst_margin:
                    worst_margin = margin
            out.append(CheckResult(
                name="cauchy_exact", level=lv, generator=j, order=order,
                measured=math.sqrt(float(lhs_sq)), bound=worst_margin,
                tolerance=0.0, passed=ok,
                note="exact rational comparison against the tightest order"))
    if tree is not None and rng is not None:
        for lv in range(1, plan.levels + 1):
            l = lv - 1
            budget = float(plan.closeness) * 2.0 ** (-l)
            try:
                f = _stage_fn(tree, lv, 0)
                rad = tree.radius_of(l)
                step = 1e-4 * rad
                measured = 0.0
                for node, pts in _stratified(tree, l, samples, rng, rmax=0.98):
                    for z in pts:
                        frame = orthonormal_frame(z - node.center)
                        for p in range(1, order + 1):
                            mi = (1,) * p
                            d = finite_diff(lambda y: f(y) - y, z, mi, step,
                                            frame=frame, domain_radius=math.inf)
                            measured = max(measured, float(np.linalg.norm(d)))
                out.append(CheckResult(
                    name="cauchy_measured", level=lv, generator=0, order=order,
                    measured=measured, bound=budget, tolerance=CP_SLACK * tol_scale,
                    passed=bool(measured <= budget * (1.0 + CP_SLACK * tol_scale))))
            except ActionError as exc:
                out.append(CheckResult(
                    name="cauchy_measured", level=lv, generator=0, order=order,
                    passed=None, asserted=False,
                    note=f"cross-check skipped: {exc}"))
    return out


# ---------------------------------------------------------------------------
# property suite


def property_suite(tree: DiskTree, *, rng: np.random.Generator,
                   tol_scale: float = 1.0,
                   volume_samples: int = 1000, comm_samples: int = 1000,
                   periodic_samples: int = 100, coset_cap: int = 100,
                   transitivity_cap: int = 100_000) -> list[CheckResult]:
    plan = tree.plan
    depth = plan.levels
    q, k = plan.q, plan.k
    checks: list[CheckResult] = []

    # fixed origin: exact zero, every generator
    worst = 0.0
    for j in range(k):
        out = tree.apply_generator(depth, j, np.zeros(q))
        worst = max(worst, float(np.max(np.abs(out))))
    checks.append(CheckResult(
        name="fixed_origin", level=depth, measured=worst, bound=0.0,
        tolerance=0.0, passed=bool(worst == 0.0)))

    # boundary identity: bit-identical returns beyond the guard radius
    shell = rng.standard_normal((64, q))
    shell /= np.linalg.norm(shell, axis=1, keepdims=True)
    shell *= (0.76 + 0.24 * rng.random(64))[:, None]
    bad = 0
    for z in shell:
        for j in range(k):
            if not np.array_equal(tree.apply_generator(depth, j, z), z):
                bad += 1
    checks.append(CheckResult(
        name="boundary_identity", level=depth, measured=float(bad), bound=0.0,
        tolerance=0.0, passed=bool(bad == 0)))

    # volume: |det(5-point FD Jacobian) - 1| per level
    tol = TOL_FIRST_ORDER * tol_scale
    for lv in range(depth):
        worst = 0.0
        step = 1e-5 * tree.radius_of(lv)
        for _, pts in _stratified(tree, lv, volume_samples, rng, rmax=0.95):
            for z in pts:
                for j in range(k):
                    fn = lambda y, jj=j: tree.apply_generator(depth, jj, y)
                    det = float(np.linalg.det(fd_jacobian(fn, z, step)))
                    worst = max(worst, abs(det - 1.0))
        checks.append(CheckResult(
            name="volume", level=lv, measured=worst, bound=tol, tolerance=tol,
            passed=bool(worst <= tol)))

    # commutativity of the generators
    tol = TOL_COMPOSED * tol_scale
    if k >= 2:
        pts = _ball(rng, q, comm_samples)
        worst = 0.0
        for a, b in combinations_with_replacement(range(k), 2):
            if a == b:
                continue
            for z in pts:
                ab = tree.apply_generator(depth, b, tree.apply_generator(depth, a, z))
                ba = tree.apply_generator(depth, a, tree.apply_generator(depth, b, z))
                worst = max(worst, float(np.linalg.norm(ab - ba)))
        checks.append(CheckResult(
            name="commutativity", level=depth, measured=worst, bound=tol,
            tolerance=tol, passed=bool(worst <= tol)))
    else:
        checks.append(CheckResult(
            name="commutativity", level=depth, passed=None, asserted=False,
            note="single generator; nothing to commute"))

    # invariance of each level's disk union
    for lv in range(1, depth + 1):
        bad = 0
        for _, pts in _stratified(tree, lv, 1000, rng, rmax=0.999):
            for z in pts:
                for j in range(k):
                    out = tree.apply_generator(depth, j, z)
                    if len(tree.locate(out, lv)) < lv:
                        bad += 1
        checks.append(CheckResult(
            name="disk_invariance", level=lv, measured=float(bad), bound=0.0,
            tolerance=0.0, passed=bool(bad == 0)))

    # periodicity on the 1/6-cores under the level's deck translations
    tol = TOL_COMPOSED * tol_scale
    for lv in range(depth):
        cum = plan.chain.cumulative(lv + 1)
        rad = tree.radius_of(lv)
        nodes = tree.level_disks(lv)
        worst = 0.0
        for col in range(k):
            word = tuple(cum[i][col] for i in range(k))
            for _ in range(periodic_samples):
                node = nodes[int(rng.integers(len(nodes)))]
                z = node.center + (rad / 6.0) * 0.999 * _ball(rng, q, 1)[0]
                out = tree.apply_element(lv + 1, word, z)
                worst = max(worst, float(np.linalg.norm(out - z)) / rad)
        checks.append(CheckResult(
            name="core_periodicity", level=lv, measured=worst, bound=tol,
            tolerance=tol, passed=bool(worst <= tol)))

    # norm shell at level 1
    tol = TOL_EXACT * tol_scale
    pts = _ball(rng, q, 500)
    worst = 0.0
    for j in range(k):
        for z in pts:
            out = tree.apply_generator(1, j, z)
            worst = max(worst, abs(float(np.linalg.norm(out)) - float(np.linalg.norm(z))))
    checks.append(CheckResult(
        name="norm_shell", level=1, measured=worst, bound=tol, tolerance=tol,
        passed=bool(worst <= tol)))

    # exact transitivity of the generator translations on each level's cosets
    for lv in range(1, depth + 1):
        group = plan.chain.levels[lv - 1].coset_group
        if group.order > transitivity_cap:
            checks.append(CheckResult(
                name="coset_transitivity", level=lv, passed=None, asserted=False,
                note=f"order {group.order} beyond cap"))
            continue
        seen = {(0,) * k}
        frontier = [(0,) * k]
        while frontier:
            cur = frontier.pop()
            for j in range(k):
                for s in (1, -1):
                    nxt = list(cur)
                    nxt[j] += s
                    lab = group.reduce(nxt)
                    if lab not in seen:
                        seen.add(lab)
                        frontier.append(lab)
        checks.append(CheckResult(
            name="coset_transitivity", level=lv, measured=float(len(seen)),
            bound=float(group.order), tolerance=0.0,
            passed=bool(len(seen) == group.order)))

    # center equivariance: generator sends centers to shifted-label centers
    tol = TOL_COMPOSED * tol_scale
    for lv in range(1, depth + 1):
        group = plan.chain.levels[lv - 1].coset_group
        nodes = {n.label: n for n in tree.level_disks(lv)}
        labels = list(islice(group.representatives(), coset_cap))
        rad = tree.radius_of(lv)
        worst = 0.0
        for lab in labels:
            node = nodes[group.reduce(lab)]
            for j in range(k):
                shifted = list(lab)
                shifted[j] += 1
                target = nodes[group.reduce(shifted)]
                out = tree.apply_generator(depth, j, node.center.copy())
                worst = max(worst, float(np.linalg.norm(out - target.center)) / rad)
        checks.append(CheckResult(
            name="center_equivariance", level=lv, measured=worst, bound=tol,
            tolerance=tol, passed=bool(worst <= tol)))

    # distality probe: reported, never asserted
    pairs = 12
    word_radius = 6 if k == 1 else 3
    words = list(product(range(-word_radius, word_radius + 1), repeat=k))
    sep = math.inf
    for _ in range(pairs):
        z1, z2 = _ball(rng, q, 2)
        if float(np.linalg.norm(z1 - z2)) < 1e-9:
            continue
        for word in words:
            a = tree.apply_element(depth, word, z1.copy())
            b = tree.apply_element(depth, word, z2.copy())
            sep = min(sep, float(np.linalg.norm(a - b)))
    checks.append(CheckResult(
        name="distality_probe", level=depth, measured=sep, bound=None,
        tolerance=None, passed=None, asserted=False,
        note=f"min pairwise separation over the word box of radius {word_radius}"))

    return checks


# ---------------------------------------------------------------------------
# full run


def plan_fingerprint(plan: SolenoidPlan) -> str:
    return hashlib.sha256(dumps_canonical(plan_to_json(plan)).encode()).hexdigest()[:16]


def run_certification(plan: SolenoidPlan, *, seed: int = 0, order: int | None = None,
                      tolerance_scale: float = 1.0, jobs: int = 1,
                      c1_samples: int = 10_000, cp_samples: int = 1500) -> dict:
    """Assemble the full certification report for a plan.

    Raises CertifyError when the requested order exceeds what the plan's
    budgets enforce (the caller maps that to a usage error).
    """
    if order is None:
        order = plan.order
    if order < 1:
        raise CertifyError("certification order must be at least 1")
    if order > plan.order:
        raise CertifyError(
            f"budget not enforced for requested order {order} "
            f"(plan was built for order {plan.order})")
    if order > plan.profile.max_order:
        raise CertifyError(
            f"profile supports derivative bounds up to {plan.profile.max_order}")

    rng = np.random.default_rng(seed)
    tree = DiskTree(plan)
    checks: list[CheckResult] = []

    violations = verify_plan(plan)
    checks.append(CheckResult(
        name="plan_invariants", measured=float(len(violations)), bound=0.0,
        tolerance=0.0, passed=not violations, note="; ".join(violations)))

    for lv in range(1, plan.levels + 1):
        for j in range(plan.k):
            checks.append(c1_check(tree, lv, j, rng=rng, samples=c1_samples,
                                   tol_scale=tolerance_scale, jobs=jobs))
    for p in range(2, order + 1):
        for lv in range(1, plan.levels + 1):
            for j in range(plan.k):
                checks.extend(cp_check(tree, lv, j, p, rng=rng, samples=cp_samples,
                                       tol_scale=tolerance_scale))
    checks.extend(cauchy_check(plan, order, tree, rng=rng, tol_scale=tolerance_scale))
    checks.extend(property_suite(tree, rng=rng, tol_scale=tolerance_scale))

    passed = all(bool(c.passed) for c in checks if c.asserted)
    report = {
        "format": "soldisk-report-1",
        "plan": {
            "fingerprint": plan_fingerprint(plan),
            "k": plan.k, "q": plan.q, "levels": plan.levels,
            "mode": plan.mode, "order": plan.order,
        },
        "seed": seed,
        "order": order,
        "tolerance_scale": tolerance_scale,
        "passed": bool(passed),
        "checks": [c.to_dict() for c in checks],
    }
    return report

"""Construction plans: nested disk geometry driven by a lattice chain.

A plan fixes everything the action evaluator and the certifier need:
the chain of rotation representations with their kernels, one generic
seed point and disk radius per level, and the thinness budget each level's
generators satisfy.  All radii, budgets and angles are exact rationals;
floats appear only in seed-point coordinates.

Geometry conventions per level l >= 1 (level 0 is the unit disk):
  - the seed point z_l sits on the sphere of radius eps_{l-1}/2,
  - disks of level l have radius eps_l < eps_{l-1}/6 strictly,
  - centers are sums of exactly-rotated seed points, so the disk at level
    l is contained in the inner plateau of its parent.

Float-derived quantities (orbit gaps, genericity margins) are shrunk by a
relative 2^-40 before entering exact comparisons, keeping every strict
inequality exactly verifiable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .lattice import (
    LatticeChain,
    LatticeError,
    RationalRep,
    chain_from_json,
    chain_to_json,
    exact_inverse,
    extend_chain,
    frac_matrix_from_json,
    kernel_lattice,
    max_column_sum,
    quotient,
)
from .profile import BumpProfile, Point, torus_rotation

ENUMERATION_CAP = 100_000

_DOWN = Fraction((1 << 40) - 1, 1 << 40)
_UP = Fraction((1 << 40) + 1, 1 << 40)


class PlanError(ValueError):
    """Bad configuration or unusable plan input."""


class PlanBudgetError(PlanError):
    """A generator violates its thinness budget; message names the inequality."""


def _down(x: float) -> Fraction:
    if x <= 0:
        raise PlanError("expected a positive quantity")
    return Fraction(x) * _DOWN


def _up(x: float) -> Fraction:
    return Fraction(x) * _UP


# ---------------------------------------------------------------------------
# geometry ops


def choose_generic_point(prev_radius: Fraction, q: int) -> Point:
    """Seed point on the sphere of radius prev_radius/2.

    All complex coordinates equal (real part 1/sqrt(m)), unpaired odd
    coordinate zero; every complex pair is nonzero, which is what makes
    the point generic for any nontrivial coordinate rotation.
    """
    m = q // 2
    z = np.zeros(q)
    c = float(prev_radius) / (2.0 * math.sqrt(m))
    for i in range(m):
        z[2 * i] = c
    return z


def _complex_moduli(z: Point) -> list[float]:
    m = len(z) // 2
    return [math.hypot(z[2 * c], z[2 * c + 1]) for c in range(m)]


def _coordinate_split(rep: RationalRep) -> list[int] | None:
    """Active row per one-hot column, or None when the rep is not split."""
    rows = []
    for j in range(rep.k):
        col = rep.column(j)
        nz = [i for i, x in enumerate(col) if x != 0]
        if len(nz) != 1:
            return None
        rows.append(nz[0])
    return rows


def _active_rows(rep: RationalRep) -> list[int]:
    return [i for i, row in enumerate(rep.matrix)
            if any(x.denominator > 1 for x in row)]


def _row_order(rep: RationalRep, i: int) -> int:
    return math.lcm(*(x.denominator for x in rep.matrix[i]))


def genericity_margin(z: Point, rep: RationalRep, cap: int = ENUMERATION_CAP) -> float:
    """Distance from z to the nearest fixed subspace of a nonzero rotation.

    The fixed space of a coset is the span of coordinates it rotates
    integrally, so the distance is the norm of z's components in the
    actually-rotated coordinates; +inf for a trivial representation.
    """
    if rep.is_trivial():
        return math.inf
    moduli = _complex_moduli(z)
    if _coordinate_split(rep) is not None:
        return min(moduli[i] for i in _active_rows(rep))
    group = quotient(kernel_lattice(rep))
    if group.order > cap:
        raise PlanError(
            f"quotient order {group.order} exceeds enumeration cap {cap}; "
            "genericity margin needs a coordinate-split representation")
    best = math.inf
    for w in group.representatives():
        if all(x == 0 for x in w):
            continue
        angles = rep.apply(w)
        d2 = sum(moduli[c] ** 2 for c in range(rep.m) if angles[c].denominator > 1)
        best = min(best, math.sqrt(d2))
    return best


def _min_orbit_gap(z: Point, rep: RationalRep, cap: int = ENUMERATION_CAP) -> float:
    """Minimum distance between distinct orbit points of z, exactly via
    the group: min over nonzero cosets w of |rot_w(z) - z|."""
    if rep.is_trivial():
        raise PlanError("trivial representation has no orbit gap")
    moduli = _complex_moduli(z)
    if _coordinate_split(rep) is not None:
        return min(2.0 * moduli[i] * math.sin(math.pi / _row_order(rep, i))
                   for i in _active_rows(rep))
    group = quotient(kernel_lattice(rep))
    if group.order > cap:
        raise PlanError(
            f"quotient order {group.order} exceeds enumeration cap {cap}; "
            "orbit gap needs a coordinate-split representation")
    best = math.inf
    for w in group.representatives():
        if all(x == 0 for x in w):
            continue
        best = min(best, float(np.linalg.norm(torus_rotation(rep.apply(w), z) - z)))
    return best


def safe_radius(z: Point, rep: RationalRep, prev_radius: Fraction,
                cap: int = ENUMERATION_CAP) -> Fraction:
    """Largest certified disk radius at the new level (exact rational).

    Minimum of: half the orbit gap (disjoint translates), the slack to the
    parent's inner plateau, half the genericity margin, and the hard cap
    prev_radius/6.01 that keeps the shrinkage inequality strict.
    """
    gap = _min_orbit_gap(z, rep, cap)
    margin = genericity_margin(z, rep, cap)
    slack = prev_radius * Fraction(2, 3) - _up(float(np.linalg.norm(z)))
    if slack <= 0:
        raise PlanError("seed point leaves no room inside the parent plateau")
    candidates = [_down(gap / 2.0), slack, prev_radius * Fraction(100, 601)]
    if math.isfinite(margin):
        candidates.append(_down(margin / 2.0))
    radius = min(candidates)
    if radius <= 0 or float(radius) == 0.0:
        raise PlanError(f"safe radius underflows at prev_radius={prev_radius}")
    return radius


def thin_budget(profile: BumpProfile, closeness: Fraction, prev_radius: Fraction,
                level_index: int, order: int, cum_inv_norm: Fraction) -> Fraction:
    """Thinness budget for the generators entering level level_index + 1.

    min over 1 <= p <= order of
        closeness * prev_radius^(p-1) / (2^level_index * C_p * cum_inv_norm)
    with C_p taken exactly from its float value.  This is the inductive
    closeness budget that keeps the level's correction stage within
    closeness * 2^-level_index in every derivative order up to `order`.
    """
    if order < 1:
        raise PlanError("smoothness order must be at least 1")
    best = None
    for p in range(1, order + 1):
        cp = Fraction(profile.cbound(p))
        val = closeness * prev_radius ** (p - 1) / ((1 << level_index) * cp * cum_inv_norm)
        if best is None or val < best:
            best = val
    if float(best) == 0.0:
        raise PlanBudgetError(
            f"thinness budget underflows double precision at level {level_index + 1}")
    return best


def pick_representation(budget: Fraction, k: int, m: int, seed: int = 0) -> RationalRep:
    """Deterministic thin representation: column j rotates one complex
    coordinate (round-robin) by 1/n_j, consecutive denominators starting
    just past 1/budget (never below 2), shifted by the seed."""
    if budget <= 0:
        raise PlanError("thinness budget must be positive")
    n0 = max(2, math.floor(1 / budget) + 1)
    offset = seed % 97
    columns = []
    for j in range(k):
        col = [Fraction(0)] * m
        col[j % m] = Fraction(1, n0 + offset + j)
        columns.append(col)
    return RationalRep.from_columns(columns)


# ---------------------------------------------------------------------------
# plans


@dataclass(frozen=True)
class LevelGeometry:
    center_seed: tuple[float, ...]
    radius: Fraction
    thinness: Fraction


@dataclass(frozen=True)
class SolenoidPlan:
    k: int
    q: int
    m: int
    order: int
    closeness: Fraction
    mode: str
    seed: int
    budget_enforced: bool
    profile: BumpProfile
    chain: LatticeChain
    geometry: tuple[LevelGeometry, ...]

    @property
    def levels(self) -> int:
        return len(self.geometry)

    def radius(self, level: int) -> Fraction:
        if level == 0:
            return Fraction(1)
        return self.geometry[level - 1].radius

    def seed_point(self, level: int) -> Point:
        return np.asarray(self.geometry[level - 1].center_seed, dtype=np.float64)

    def rep(self, level: int) -> RationalRep:
        return self.chain.levels[level - 1].rep


def center(plan: SolenoidPlan, level: int, label: Sequence[int]) -> Point:
    """Center of the level-`level` disk with the given coset label.

    Sum over i <= level of the seed point z_i rotated by the exact total
    rotation angle of the label; angle reduction mod 1 happens on exact
    rationals, so the center is a class function of the label bit for bit.
    """
    z = np.zeros(plan.q)
    for i in range(1, level + 1):
        angles = plan.chain.total_rotation(i, label)
        z += torus_rotation(angles, plan.seed_point(i))
    return z


# -- configuration -----------------------------------------------------------

_CONFIG_KEYS = {"k", "q", "r", "delta", "levels", "mode", "alphas", "ns", "seed"}
_MODES = {"explicit", "auto", "example5"}


def _validate_config(config: dict) -> dict:
    if not isinstance(config, dict):
        raise PlanError("config must be a JSON object")
    unknown = set(config) - _CONFIG_KEYS
    if unknown:
        raise PlanError(f"unknown config keys: {sorted(unknown)}")
    missing = {"k", "q", "r", "delta", "levels", "mode"} - set(config)
    if missing:
        raise PlanError(f"missing config keys: {sorted(missing)}")
    k, q, r, levels = (int(config[x]) for x in ("k", "q", "r", "levels"))
    if k < 1:
        raise PlanError("k must be at least 1")
    if q < 2:
        raise PlanError("ambient dimension q must be at least 2")
    if r < 1:
        raise PlanError("smoothness order r must be at least 1")
    if levels < 0:
        raise PlanError("levels must be non-negative")
    mode = config["mode"]
    if mode not in _MODES:
        raise PlanError(f"mode must be one of {sorted(_MODES)}")
    delta = Fraction(config["delta"]) if isinstance(config["delta"], str) \
        else Fraction(config["delta"])
    if delta <= 0:
        raise PlanError("delta must be positive")
    seed = int(config.get("seed", 0))
    out = {"k": k, "q": q, "r": r, "delta": delta, "levels": levels,
           "mode": mode, "seed": seed}
    if mode == "example5":
        ns = config.get("ns")
        if k != 1:
            raise PlanError("example5 preset requires k = 1")
        if not isinstance(ns, list) or len(ns) != levels or \
                any(int(n) < 2 for n in ns):
            raise PlanError("example5 needs ns: list of ints >= 2, one per level")
        out["ns"] = [int(n) for n in ns]
    elif mode == "explicit":
        alphas = config.get("alphas")
        if not isinstance(alphas, list) or len(alphas) != levels:
            raise PlanError("explicit mode needs alphas: one matrix per level")
        m = q // 2
        out["alphas"] = [_parse_rep_matrix(a, m, k) for a in alphas]
    return out


def _parse_rep_matrix(rows, m: int, k: int) -> RationalRep:
    if not isinstance(rows, list) or len(rows) != m or \
            any(not isinstance(r, list) or len(r) != k for r in rows):
        raise PlanError(f"rep matrix must be {m} rows x {k} columns")
    try:
        mat = frac_matrix_from_json([[str(x) for x in row] for row in rows])
    except (ValueError, ZeroDivisionError) as exc:
        raise PlanError(f"bad rational entry in rep matrix: {exc}") from None
    return RationalRep(k, m, mat)


def _check_thinness(rep: RationalRep, budget: Fraction, level: int,
                    budget_desc: str) -> None:
    for j in range(rep.k):
        if rep.column_norm_sq(j) >= budget * budget:
            norm = math.sqrt(float(rep.column_norm_sq(j)))
            raise PlanBudgetError(
                f"level {level} generator {j + 1} violates thinness: "
                f"||rep(e_{j + 1})|| = {norm:.6g} >= {float(budget):.6g} "
                f"= {budget_desc}")


def build(config: dict) -> SolenoidPlan:
    """Build a plan from a config dict (see _CONFIG_KEYS for the schema)."""
    cfg = _validate_config(config)
    k, q, r = cfg["k"], cfg["q"], cfg["r"]
    m = q // 2
    profile = BumpProfile()
    chain = LatticeChain(k, m)
    geometry: list[LevelGeometry] = []
    prev_radius = Fraction(1)
    mode = cfg["mode"]

    for lv in range(1, cfg["levels"] + 1):
        if mode == "example5":
            n = cfg["ns"][lv - 1]
            rep = RationalRep.from_columns([[Fraction(1, n)] + [Fraction(0)] * (m - 1)])
            thin = Fraction(2, n)
        else:
            inv_norm = max_column_sum(exact_inverse(chain.cumulative(lv - 1)))
            thin = thin_budget(profile, cfg["delta"], prev_radius, lv - 1, r, inv_norm)
            if mode == "auto":
                rep = pick_representation(thin, k, m, cfg["seed"])
            else:
                rep = cfg["alphas"][lv - 1]
            desc = (f"delta * radius_{lv - 1}^(p-1) / (2^{lv - 1} * C_p * "
                    f"||Phi_{lv - 1}^-1||), minimized over p <= {r}")
            _check_thinness(rep, thin, lv, desc)
        try:
            chain = extend_chain(chain, rep)
        except LatticeError as exc:
            raise PlanError(f"level {lv}: {exc}") from None
        z = choose_generic_point(prev_radius, q)
        if mode == "example5":
            radius = prev_radius / (4 * n)
        else:
            radius = safe_radius(z, rep, prev_radius)
        geometry.append(LevelGeometry(tuple(float(x) for x in z), radius, thin))
        prev_radius = radius

    return SolenoidPlan(
        k=k, q=q, m=m, order=r, closeness=cfg["delta"], mode=mode,
        seed=cfg["seed"], budget_enforced=(mode != "example5"),
        profile=profile, chain=chain, geometry=tuple(geometry),
    )


# -- invariants ---------------------------------------------------------------


def verify_plan(plan: SolenoidPlan, cap: int = ENUMERATION_CAP) -> list[str]:
    """Structural invariant check; returns human-readable violations."""
    bad: list[str] = []
    prev = Fraction(1)
    for lv in range(1, plan.levels + 1):
        geo = plan.geometry[lv - 1]
        rep = plan.rep(lv)
        if not 6 * geo.radius < prev:
            bad.append(f"level {lv}: radius {geo.radius} not below parent/6 {prev}/6")
        for j in range(rep.k):
            if not rep.column_norm_sq(j) < geo.thinness ** 2:
                bad.append(f"level {lv}: generator {j + 1} not {geo.thinness}-thin")
        z = np.asarray(geo.center_seed)
        want = float(prev) / 2.0
        if abs(float(np.linalg.norm(z)) - want) > 1e-12 * max(want, 1e-300):
            bad.append(f"level {lv}: seed norm {np.linalg.norm(z)} != parent/2")
        try:
            gap = _min_orbit_gap(z, rep, cap)
            if not gap > 2.0 * float(geo.radius):
                bad.append(f"level {lv}: orbit gap {gap} not above disk diameter")
        except PlanError:
            bad.append(f"level {lv}: orbit gap not checkable under cap {cap}")
        prev = geo.radius
    return bad


# -- serialization -------------------------------------------------------------


def plan_to_json(plan: SolenoidPlan) -> dict:
    return {
        "format": "soldisk-plan-1",
        "k": plan.k,
        "q": plan.q,
        "m": plan.m,
        "order": plan.order,
        "closeness": str(plan.closeness),
        "mode": plan.mode,
        "seed": plan.seed,
        "budget_enforced": plan.budget_enforced,
        "profile": plan.profile.params(),
        "chain": chain_to_json(plan.chain),
        "geometry": [
            {
                "center_seed": list(g.center_seed),
                "radius": str(g.radius),
                "thinness": str(g.thinness),
            }
            for g in plan.geometry
        ],
    }


def plan_from_json(doc: dict) -> SolenoidPlan:
    try:
        if doc.get("format") != "soldisk-plan-1":
            raise PlanError(f"unknown plan format {doc.get('format')!r}")
        chain = chain_from_json(doc["chain"])
        geometry = tuple(
            LevelGeometry(
                center_seed=tuple(float(x) for x in g["center_seed"]),
                radius=Fraction(g["radius"]),
                thinness=Fraction(g["thinness"]),
            )
            for g in doc["geometry"]
        )
        plan = SolenoidPlan(
            k=int(doc["k"]), q=int(doc["q"]), m=int(doc["m"]),
            order=int(doc["order"]), closeness=Fraction(doc["closeness"]),
            mode=str(doc["mode"]), seed=int(doc["seed"]),
            budget_enforced=bool(doc["budget_enforced"]),
            profile=BumpProfile.from_params(doc["profile"]),
            chain=chain, geometry=geometry,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PlanError):
            raise
        raise PlanError(f"malformed plan document: {exc}") from None
    if len(plan.geometry) != len(chain.levels):
        raise PlanError("plan geometry and chain level counts disagree")
    if plan.m != plan.q // 2:
        raise PlanError("plan m field disagrees with ambient dimension")
    return plan


def plan_table(plan: SolenoidPlan) -> str:
    lines = [f"{'level':>5}  {'group order':>12}  {'radius':>16}  "
             f"{'radius (float)':>24}  {'thinness':>16}"]
    lines.append(f"{0:>5}  {1:>12}  {'1':>16}  {1.0:>24.17g}  {'-':>16}")
    for lv in range(1, plan.levels + 1):
        g = plan.geometry[lv - 1]
        lines.append(
            f"{lv:>5}  {plan.chain.degree(lv):>12}  {str(g.radius):>16}  "
            f"{float(g.radius):>24.17g}  {str(g.thinness):>16}")
    return "\n".join(lines)

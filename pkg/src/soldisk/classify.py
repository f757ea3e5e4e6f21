"""Topological type invariants of the nested-disk fiber.

The fiber of a plan is determined by the tower of finite coset groups;
its classifying data is the sequence of covering degrees (group orders),
compressed into a supernatural number: a formal product of primes with
multiplicities in {0, 1, 2, ...} or infinity.  Two fibers are equivalent
exactly when their supernatural numbers agree after discarding finitely
many prime factors from each — the infinite rows must match and the
finite rows may differ anywhere (a finite description only has finitely
many of them).

Infinite degree sequences are described as a finite prefix plus an
eventually-periodic tail block repeated forever.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import sympy

from .action import ActionError, DiskTree
from .lattice import LatticeChain
from .plan import SolenoidPlan

INF = math.inf


class ClassifyError(ValueError):
    """Malformed degree sequences, invariants, or fiber queries."""


# ---------------------------------------------------------------------------
# covering degrees


@dataclass(frozen=True)
class CoveringDegrees:
    """Degrees of the successive coset coverings: a prefix, then an
    optional block repeated forever."""

    prefix: tuple[int, ...] = ()
    tail: tuple[int, ...] = ()

    def __post_init__(self):
        for d in (*self.prefix, *self.tail):
            if not isinstance(d, int) or d < 2:
                raise ClassifyError(f"covering degree must be an integer >= 2, got {d!r}")

    @property
    def finite(self) -> bool:
        return not self.tail

    def truncate(self, count: int) -> tuple[int, ...]:
        """First `count` degrees, unrolling the tail as needed."""
        out = list(self.prefix[:count])
        while self.tail and len(out) < count:
            out.extend(self.tail)
        return tuple(out[:count])

    def concat(self, other: "CoveringDegrees") -> "CoveringDegrees":
        if not self.finite:
            raise ClassifyError("cannot append after an infinite tail")
        return CoveringDegrees(self.prefix + other.prefix, other.tail)

    def to_json(self) -> dict:
        return {"format": "soldisk-degrees-1",
                "prefix": list(self.prefix), "tail": list(self.tail)}

    @classmethod
    def from_json(cls, doc: dict) -> "CoveringDegrees":
        if not isinstance(doc, dict) or doc.get("format") != "soldisk-degrees-1":
            raise ClassifyError("not a degree-sequence document")
        return cls(tuple(doc.get("prefix", ())), tuple(doc.get("tail", ())))


def covering_degrees(source: Union[SolenoidPlan, LatticeChain]) -> CoveringDegrees:
    """Exact orders of the per-level coset groups of a plan or chain."""
    chain = source.chain if isinstance(source, SolenoidPlan) else source
    return CoveringDegrees(tuple(level.group.order for level in chain.levels))


# ---------------------------------------------------------------------------
# supernatural numbers


def _canon(mult: Mapping[int, Union[int, float]]) -> dict:
    out = {}
    for p, m in mult.items():
        p = int(p)
        if not sympy.isprime(p):
            raise ClassifyError(f"{p} is not prime")
        if m == INF:
            out[p] = INF
        elif isinstance(m, int) and m >= 0:
            if m:
                out[p] = m
        else:
            raise ClassifyError(f"multiplicity of {p} must be a nonneg integer or inf")
    return out


@dataclass(frozen=True)
class SupernaturalNumber:
    """Formal product of primes to multiplicities in {0, 1, ...} or inf.

    Absent primes have multiplicity 0; zero entries are dropped, so
    equality of the mapping is equality of the number.
    """

    multiplicities: Mapping[int, Union[int, float]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "multiplicities", _canon(self.multiplicities))

    def multiplicity(self, p: int) -> Union[int, float]:
        return self.multiplicities.get(p, 0)

    @property
    def infinite_primes(self) -> frozenset:
        return frozenset(p for p, m in self.multiplicities.items() if m == INF)

    def __add__(self, other: "SupernaturalNumber") -> "SupernaturalNumber":
        out = dict(self.multiplicities)
        for p, m in other.multiplicities.items():
            prev = out.get(p, 0)
            out[p] = INF if INF in (prev, m) else prev + m
        return SupernaturalNumber(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SupernaturalNumber):
            return NotImplemented
        return self.multiplicities == other.multiplicities

    def __hash__(self):
        return hash(frozenset(self.multiplicities.items()))

    def __str__(self) -> str:
        if not self.multiplicities:
            return "1"
        parts = []
        for p in sorted(self.multiplicities):
            m = self.multiplicities[p]
            parts.append(f"{p}^inf" if m == INF else (f"{p}^{m}" if m > 1 else f"{p}"))
        return " * ".join(parts)

    def to_json(self) -> dict:
        return {str(p): ("inf" if m == INF else m)
                for p, m in sorted(self.multiplicities.items())}

    @classmethod
    def from_json(cls, doc: Mapping) -> "SupernaturalNumber":
        try:
            return cls({int(p): (INF if m == "inf" else int(m)) for p, m in doc.items()})
        except (TypeError, ValueError) as exc:
            raise ClassifyError(f"bad supernatural-number document: {exc}") from None


def cech_invariant(degrees: CoveringDegrees) -> SupernaturalNumber:
    """Total prime content of a degree sequence.

    Prefix degrees add their factorizations; every prime dividing the
    repeated tail block recurs in each repetition, so it gets infinite
    multiplicity.
    """
    mult: dict = {}
    for d in degrees.prefix:
        for p, e in sympy.factorint(d).items():
            mult[p] = mult.get(p, 0) + e
    for d in degrees.tail:
        for p in sympy.factorint(d):
            mult[p] = INF
    return SupernaturalNumber(mult)


def discard_witness(a: SupernaturalNumber, b: SupernaturalNumber) -> dict | None:
    """Finite prime multisets to delete from each side to force equality.

    None when no finite deletion works (mismatched infinite rows).
    """
    if a.infinite_primes != b.infinite_primes:
        return None
    left: dict = {}
    right: dict = {}
    for p in sorted(set(a.multiplicities) | set(b.multiplicities)):
        ma, mb = a.multiplicity(p), b.multiplicity(p)
        if INF in (ma, mb):
            continue
        if ma > mb:
            left[p] = ma - mb
        elif mb > ma:
            right[p] = mb - ma
    return {"discard_left": left, "discard_right": right}


def baer_equivalent(a: SupernaturalNumber, b: SupernaturalNumber) -> bool:
    """Equality up to finitely many finite prime factors on each side.

    With finite descriptions the finite rows can always be reconciled,
    so the verdict reduces to equality of the infinite-prime sets.
    """
    return a.infinite_primes == b.infinite_primes


# ---------------------------------------------------------------------------
# fiber addresses


@dataclass(frozen=True)
class FiberAddress:
    """Nested coset itinerary of a point: label at each level, each
    projecting to the previous level's label."""

    labels: tuple[tuple[int, ...], ...]

    @property
    def depth(self) -> int:
        return len(self.labels)

    def project(self, level: int) -> tuple[int, ...]:
        if not 1 <= level <= self.depth:
            raise ClassifyError(f"no label at level {level}")
        return self.labels[level - 1]

    def to_json(self) -> list:
        return [list(lab) for lab in self.labels]


def fiber_address(tree: DiskTree, z, depth: int) -> FiberAddress:
    """Coset itinerary of a point through the first `depth` levels.

    Verifies the projection compatibility exactly: each label reduces to
    the previous one in the coarser coset group.
    """
    itinerary = tree.locate(z, depth)
    if len(itinerary) < depth:
        raise ClassifyError(
            f"point leaves the nested disks at level {len(itinerary) + 1}")
    labels = tuple(node.label for node in itinerary)
    chain = tree.plan.chain
    for lv in range(1, depth):
        coarse = chain.levels[lv - 1].coset_group
        if coarse.reduce(labels[lv]) != labels[lv - 1]:
            raise ClassifyError(
                f"incompatible projection between levels {lv + 1} and {lv}")
    return FiberAddress(labels)

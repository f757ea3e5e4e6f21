"""Exact integer/rational lattice arithmetic.

Everything in this module is exact: integer matrices, `fractions.Fraction`
entries, no floats.  The central objects are rational representations
Z^k -> (Q/Z)^m given by m x k matrices, their kernel lattices
{v in Z^k : A v integral}, the finite quotient groups Z^k / Lambda, and
chains of nested kernel lattices with their renormalized representations.

Matrices are tuples of row tuples.  Integer matrices hold Python ints,
rational ones hold Fractions.  Columns are the images of basis vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd, lcm
from typing import Iterator, Sequence

IntMatrix = tuple[tuple[int, ...], ...]
FracMatrix = tuple[tuple[Fraction, ...], ...]


class LatticeError(ValueError):
    """Raised for malformed or degenerate lattice input."""


# ---------------------------------------------------------------------------
# small exact matrix helpers


def identity(n: int) -> IntMatrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]):
    """Exact matrix product; entry types follow the operands."""
    rows, inner, cols = len(a), len(b), len(b[0])
    if len(a[0]) != inner:
        raise LatticeError("matrix shape mismatch in product")
    return tuple(
        tuple(sum(a[i][t] * b[t][j] for t in range(inner)) for j in range(cols))
        for i in range(rows)
    )


def mat_vec(a: Sequence[Sequence], v: Sequence):
    if len(a[0]) != len(v):
        raise LatticeError("matrix/vector shape mismatch")
    return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in a)


def mat_add(a: Sequence[Sequence], b: Sequence[Sequence]):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def det_int(m: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix (fraction-free Bareiss)."""
    n = len(m)
    a = [list(row) for row in m]
    sign = 1
    prev = 1
    for i in range(n - 1):
        if a[i][i] == 0:
            for r in range(i + 1, n):
                if a[r][i] != 0:
                    a[i], a[r] = a[r], a[i]
                    sign = -sign
                    break
            else:
                return 0
        for r in range(i + 1, n):
            for c in range(i + 1, n):
                a[r][c] = (a[r][c] * a[i][i] - a[r][i] * a[i][c]) // prev
            a[r][i] = 0
        prev = a[i][i]
    return sign * a[-1][-1]


def exact_inverse(m: Sequence[Sequence]) -> FracMatrix:
    """Exact inverse of a nonsingular square matrix, Fraction entries.

    Gauss-Jordan over Fractions; every denominator of the result divides
    the determinant (Cramer), which the chain arithmetic relies on.
    """
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise LatticeError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def max_column_sum(m: Sequence[Sequence[Fraction]]) -> Fraction:
    """Operator norm bound used for thinness budgets: max column 1-norm."""
    cols = len(m[0])
    return max(sum(abs(row[j]) for row in m) for j in range(cols))


# ---------------------------------------------------------------------------
# normal forms


def smith_normal_form(m: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return (U, D, V) with U m V = D diagonal, d_1 | d_2 | ..., U, V unimodular.

    Textbook elimination: pull the smallest nonzero entry into the pivot,
    euclid-reduce its row and column, restart whenever a remainder shows up,
    and fold non-divisible trailing entries into the pivot row so the
    divisibility chain comes out of the elimination itself.
    """
    rows, cols = len(m), len(m[0])
    d = [list(r) for r in m]
    u = [list(r) for r in identity(rows)]
    v = [list(r) for r in identity(cols)]

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in d:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        d[dst] = [x + q * y for x, y in zip(d[dst], d[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, q):
        for r in d:
            r[dst] += q * r[src]
        for r in v:
            r[dst] += q * r[src]

    t = 0
    while t < min(rows, cols):
        # pivot: smallest |entry| in the trailing block
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if d[i][j] != 0 and (best is None or abs(d[i][j]) < abs(d[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])

        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, rows):
                if d[i][t] != 0:
                    q = d[i][t] // d[t][t]
                    add_row(i, t, -q)
                    if d[i][t] != 0:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, cols):
                if d[t][j] != 0:
                    q = d[t][j] // d[t][t]
                    add_col(j, t, -q)
                    if d[t][j] != 0:
                        swap_cols(t, j)
                        dirty = True
            if not dirty:
                # enforce divisibility of the trailing block
                for i in range(t + 1, rows):
                    for j in range(t + 1, cols):
                        if d[i][j] % d[t][t] != 0:
                            add_row(t, i, 1)
                            dirty = True
                            break
                    if dirty:
                        break
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
        t += 1

    return (tuple(map(tuple, u)), tuple(map(tuple, d)), tuple(map(tuple, v)))


def hermite_column_form(basis: Sequence[Sequence[int]]) -> IntMatrix:
    """Canonical column Hermite form of a full-rank square integer basis.

    Column operations only, so the column span (the lattice) is unchanged.
    Result is lower triangular with positive diagonal and entries left of
    each pivot reduced into [0, pivot); determinant is positive, making the
    "negate last column" orientation fix a no-op guard.
    """
    k = len(basis)
    if any(len(row) != k for row in basis):
        raise LatticeError("basis must be square")
    h = [list(row) for row in basis]

    def add_col(dst, src, q):
        for r in h:
            r[dst] += q * r[src]

    for i in range(k):
        while True:
            js = [j for j in range(i, k) if h[i][j] != 0]
            if not js:
                raise LatticeError("basis is singular")
            j0 = min(js, key=lambda j: abs(h[i][j]))
            if j0 != i:
                for r in h:
                    r[i], r[j0] = r[j0], r[i]
            done = True
            for j in range(i + 1, k):
                if h[i][j] != 0:
                    add_col(j, i, -(h[i][j] // h[i][i]))
                    if h[i][j] != 0:
                        done = False
            if done:
                break
        if h[i][i] < 0:
            for r in h:
                r[i] = -r[i]
        for j in range(i):
            q = h[i][j] // h[i][i]
            if q:
                add_col(j, i, -q)

    out = tuple(map(tuple, h))
    if det_int(out) < 0:  # unreachable for a proper Hermite form; keep the guard
        out = tuple(tuple(-x if j == k - 1 else x for j, x in enumerate(row)) for row in out)
    return out


# ---------------------------------------------------------------------------
# core types


@dataclass(frozen=True)
class RationalRep:
    """A homomorphism Z^k -> (Q/Z)^m given exactly by an m x k matrix.

    Column j is the rotation vector assigned to the j-th generator.
    """

    k: int
    m: int
    matrix: FracMatrix

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise LatticeError("rep dimensions must be positive")
        if len(self.matrix) != self.m or any(len(r) != self.k for r in self.matrix):
            raise LatticeError("rep matrix shape mismatch")
        object.__setattr__(
            self, "matrix",
            tuple(tuple(Fraction(x) for x in row) for row in self.matrix))

    @staticmethod
    def from_columns(columns: Sequence[Sequence[Fraction]]) -> "RationalRep":
        m = len(columns[0])
        mat = tuple(tuple(Fraction(col[i]) for col in columns) for i in range(m))
        return RationalRep(k=len(columns), m=m, matrix=mat)

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.matrix)

    def apply(self, v: Sequence[int]) -> tuple[Fraction, ...]:
        return mat_vec(self.matrix, v)

    def is_integral_on(self, v: Sequence[int]) -> bool:
        return all(x.denominator == 1 for x in self.apply(v))

    def is_trivial(self) -> bool:
        """True when every generator maps into Z^m (the quotient is trivial)."""
        return all(x.denominator == 1 for row in self.matrix for x in row)

    def column_norm_sq(self, j: int) -> Fraction:
        return sum((x * x for x in self.column(j)), Fraction(0))

    def common_denominator(self) -> int:
        return lcm(*(x.denominator for row in self.matrix for x in row))


@dataclass(frozen=True)
class IntegerLattice:
    """Full-rank sublattice of Z^k, columns of `basis` as generators."""

    rank: int
    basis: IntMatrix

    def __post_init__(self):
        if len(self.basis) != self.rank or any(len(r) != self.rank for r in self.basis):
            raise LatticeError("lattice basis must be square")
        object.__setattr__(self, "basis", tuple(tuple(int(x) for x in row) for row in self.basis))
        if det_int(self.basis) == 0:
            raise LatticeError("lattice basis is singular")

    def index(self) -> int:
        return abs(det_int(self.basis))

    def contains(self, v: Sequence[int]) -> bool:
        coeff = mat_vec(exact_inverse(self.basis), v)
        return all(c.denominator == 1 for c in coeff)


def oriented_basis(lattice: IntegerLattice) -> IntegerLattice:
    """Canonical positively-oriented basis (column Hermite form)."""
    return IntegerLattice(lattice.rank, hermite_column_form(lattice.basis))


def kernel_lattice(rep: RationalRep) -> IntegerLattice:
    """The lattice {v in Z^k : rep(v) integral}, with canonical basis.

    Clearing denominators by N = lcm turns the condition into a congruence
    P v = 0 (mod N); Smith form of P diagonalizes it, and each diagonal
    entry d gives the cyclic condition w = 0 (mod N/gcd(d, N)) in the
    transformed coordinates.
    """
    n = rep.common_denominator()
    p = tuple(tuple(int(x * n) for x in row) for row in rep.matrix)
    _, d, v = smith_normal_form(p)
    r = min(rep.m, rep.k)
    scale = [n // gcd(d[i][i] if i < r else 0, n) for i in range(rep.k)]
    basis = tuple(tuple(v[i][j] * scale[j] for j in range(rep.k)) for i in range(rep.k))
    return oriented_basis(IntegerLattice(rep.k, basis))


@dataclass(frozen=True)
class FiniteQuotient:
    """The finite group Z^k / L for a full-rank lattice L.

    Carries the Hermite basis of L; canonical coset representatives are the
    integer points of the box prod [0, H[i][i]) -- the fundamental
    parallelepiped of the Hermite basis -- and `reduce` is idempotent.
    """

    rank: int
    basis: IntMatrix
    invariant_factors: tuple[int, ...]
    order: int

    @staticmethod
    def from_lattice(lattice: IntegerLattice) -> "FiniteQuotient":
        h = hermite_column_form(lattice.basis)
        _, d, _ = smith_normal_form(h)
        factors = tuple(d[i][i] for i in range(lattice.rank) if d[i][i] > 1)
        order = 1
        for i in range(lattice.rank):
            order *= d[i][i]
        if order != abs(det_int(h)):
            raise LatticeError("invariant factor product disagrees with index")
        return FiniteQuotient(lattice.rank, h, factors, order)

    def reduce(self, v: Sequence[int]) -> tuple[int, ...]:
        """Canonical representative of v + L, inside the Hermite box."""
        r = list(int(x) for x in v)
        for i in range(self.rank):
            q = r[i] // self.basis[i][i]
            if q:
                for t in range(i, self.rank):
                    r[t] -= q * self.basis[t][i]
        return tuple(r)

    def is_zero(self, v: Sequence[int]) -> bool:
        return all(x == 0 for x in self.reduce(v))

    def representatives(self) -> Iterator[tuple[int, ...]]:
        """All canonical representatives (lazy; `order` of them)."""
        ranges = [range(self.basis[i][i]) for i in range(self.rank)]
        return product(*ranges)


def quotient(lattice: IntegerLattice) -> FiniteQuotient:
    return FiniteQuotient.from_lattice(lattice)


# ---------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class ChainLevel:
    """One level of a kernel-lattice chain.

    rep           the rotation representation acting at this level
    kernel        its kernel lattice (canonical basis = the step matrix)
    step          k x k basis matrix of the kernel (columns)
    cumulative    product of all step matrices up to this level
    group         Z^k / kernel (the level's deck group)
    coset_group   Z^k / (cumulative Z^k), labels of this level's disks
    local_rep     rep composed with the inverse cumulative of the previous
                  level (rotations expressed in renormalized coordinates)
    total_rotation  running sum of local reps; exact center angles
    """

    rep: RationalRep
    kernel: IntegerLattice
    step: IntMatrix
    cumulative: IntMatrix
    group: FiniteQuotient
    coset_group: FiniteQuotient
    local_rep: FracMatrix
    total_rotation: FracMatrix


@dataclass(frozen=True)
class LatticeChain:
    """Immutable chain of nested kernel lattices for one Z^k action."""

    k: int
    m: int
    levels: tuple[ChainLevel, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.levels)

    def cumulative(self, level: int) -> IntMatrix:
        """Cumulative basis matrix after `level` steps (identity at 0)."""
        if level == 0:
            return identity(self.k)
        return self.levels[level - 1].cumulative

    def local_rotation(self, level: int, v: Sequence[int]) -> tuple[Fraction, ...]:
        return mat_vec(self.levels[level - 1].local_rep, v)

    def total_rotation(self, level: int, v: Sequence[int]) -> tuple[Fraction, ...]:
        """Exact center angle contribution sum_{i<=level} local_i(v)."""
        return mat_vec(self.levels[level - 1].total_rotation, v)

    def degree(self, level: int) -> int:
        return self.levels[level - 1].group.order


def extend_chain(chain: LatticeChain, rep: RationalRep) -> LatticeChain:
    """Append one level; rejects representations with trivial quotient."""
    if rep.k != chain.k or rep.m != chain.m:
        raise LatticeError("rep dimensions disagree with chain")
    if rep.is_trivial():
        raise LatticeError("representation is integral, its quotient is trivial")
    kernel = kernel_lattice(rep)
    prev_cum = chain.cumulative(len(chain))
    step = kernel.basis
    cumulative = mat_mul(prev_cum, step)
    if det_int(cumulative) <= 0:
        raise LatticeError("cumulative basis lost positive orientation")
    local = mat_mul(rep.matrix, exact_inverse(prev_cum))
    if chain.levels:
        total = mat_add(chain.levels[-1].total_rotation, local)
    else:
        total = local
    level = ChainLevel(
        rep=rep,
        kernel=kernel,
        step=step,
        cumulative=cumulative,
        group=quotient(kernel),
        coset_group=quotient(IntegerLattice(chain.k, cumulative)),
        local_rep=local,
        total_rotation=total,
    )
    return LatticeChain(chain.k, chain.m, chain.levels + (level,))


def chain_degree_product(chain: LatticeChain, level: int) -> int:
    out = 1
    for i in range(level):
        out *= chain.levels[i].group.order
    return out


# ---------------------------------------------------------------------------
# serialization (exact rationals as "p/q" strings)


def frac_to_str(x: Fraction) -> str:
    return str(x)


def frac_from_str(s: str) -> Fraction:
    return Fraction(s)


def frac_matrix_to_json(m: Sequence[Sequence[Fraction]]) -> list[list[str]]:
    return [[frac_to_str(x) for x in row] for row in m]


def frac_matrix_from_json(rows: Sequence[Sequence[str]]) -> FracMatrix:
    return tuple(tuple(frac_from_str(x) for x in row) for row in rows)


def int_matrix_to_json(m: Sequence[Sequence[int]]) -> list[list[int]]:
    return [[int(x) for x in row] for row in m]


def chain_to_json(chain: LatticeChain) -> dict:
    return {
        "k": chain.k,
        "m": chain.m,
        "levels": [
            {
                "rep": frac_matrix_to_json(lv.rep.matrix),
                "kernel_basis": int_matrix_to_json(lv.kernel.basis),
                "step": int_matrix_to_json(lv.step),
                "cumulative": int_matrix_to_json(lv.cumulative),
                "invariant_factors": list(lv.group.invariant_factors),
                "group_order": lv.group.order,
                "local_rep": frac_matrix_to_json(lv.local_rep),
                "total_rotation": frac_matrix_to_json(lv.total_rotation),
            }
            for lv in chain.levels
        ],
    }


def chain_from_json(doc: dict) -> LatticeChain:
    """Rebuild a chain from its JSON form and re-derive every level.

    Only the representations are trusted; all derived matrices are
    recomputed and must match the document bit for bit, so a round trip
    is exact and tampering is detected.
    """
    chain = LatticeChain(int(doc["k"]), int(doc["m"]))
    for lv in doc["levels"]:
        rep = RationalRep(chain.k, chain.m, frac_matrix_from_json(lv["rep"]))
        chain = extend_chain(chain, rep)
        built = chain.levels[-1]
        if int_matrix_to_json(built.cumulative) != lv["cumulative"] or \
                frac_matrix_to_json(built.total_rotation) != lv["total_rotation"]:
            raise LatticeError("chain document disagrees with recomputation")
    return chain


def dumps_canonical(doc: dict) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"

"""Finite nests and their algebras of block upper-triangular matrices.

A nest ``0 < N_1 < ... < N_k = X`` in ``X = F^n`` is given by the dimension
list ``n_1 < ... < n_k``. The nest algebra is spanned by the matrix units
``E_pq`` whose column block is at or after the row block. Internally all
indices are 0-based; labels such as ``E12`` are 1-based to match the usual
notation.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, NamedTuple, Sequence

from gmpy2 import mpq

from . import linalg
from .errors import InputError, MembershipError
from .rng import SplitMix64
from .scalars import RATIONAL, format_scalar, parse_scalar, random_scalar


@dataclass(frozen=True)
class NestSpec:
    dims: tuple

    def __post_init__(self):
        dims = tuple(self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise InputError("a nest needs at least one dimension")
        if any(not isinstance(x, int) or x <= 0 for x in dims):
            raise InputError(f"nest dimensions must be positive integers: {dims}")
        if any(b <= a for a, b in zip(dims, dims[1:])):
            raise InputError(f"nest dimensions must be strictly increasing: {dims}")
        if dims[-1] < 2:
            raise InputError("ambient dimension must be at least 2")

    @classmethod
    def parse(cls, text: str) -> "NestSpec":
        try:
            dims = tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok)
        except ValueError as exc:
            raise InputError(f"cannot parse nest {text!r}") from exc
        return cls(dims)

    @property
    def n(self) -> int:
        return self.dims[-1]

    @property
    def block_sizes(self) -> tuple:
        prev = (0,) + self.dims[:-1]
        return tuple(b - a for a, b in zip(prev, self.dims))

    def __str__(self):
        return ",".join(map(str, self.dims))


class AlgBasis:
    """Matrix-unit basis of a nest algebra, positions sorted lexicographically."""

    def __init__(self, spec: NestSpec):
        self.spec = spec
        self.n = n = spec.n
        block_of = []
        for b, size in enumerate(spec.block_sizes):
            block_of.extend([b] * size)
        self.block_of = tuple(block_of)
        self.positions = tuple(
            (p, q) for p in range(n) for q in range(n) if block_of[q] >= block_of[p]
        )
        self.index = {pos: k for k, pos in enumerate(self.positions)}
        self.d = len(self.positions)
        self.diag_slots = tuple(self.index[(p, p)] for p in range(n))

    def __eq__(self, other):
        return isinstance(other, AlgBasis) and other.spec == self.spec

    def __hash__(self):
        return hash(self.spec)

    def __repr__(self):
        return f"AlgBasis(nest=[{self.spec}], d={self.d})"

    def label(self, k: int) -> str:
        p, q = self.positions[k]
        if self.n < 10:
            return f"E{p + 1}{q + 1}"
        return f"E({p + 1},{q + 1})"

    def allowed(self, p: int, q: int) -> bool:
        return self.block_of[q] >= self.block_of[p]

    # conversions -------------------------------------------------------

    def to_matrix(self, coords: Sequence) -> list:
        n = self.n
        z = mpq(0)
        M = [[z] * n for _ in range(n)]
        for (p, q), c in zip(self.positions, coords):
            if c:
                M[p][q] = c
        return M

    def coords_of(self, M) -> tuple:
        n = self.n
        if len(M) != n or any(len(row) != n for row in M):
            raise InputError(f"expected a {n}x{n} matrix")
        for p in range(n):
            for q in range(n):
                if M[p][q] and not self.allowed(p, q):
                    raise MembershipError(
                        f"entry ({p + 1},{q + 1}) = {format_scalar(M[p][q])} lies outside the algebra"
                    )
        return tuple(linalg._lift(M[p][q]) for p, q in self.positions)

    def element(self, coords: Sequence) -> "AlgElement":
        if len(coords) != self.d:
            raise InputError(f"expected {self.d} coordinates, got {len(coords)}")
        return AlgElement(self, tuple(linalg._lift(c) for c in coords))

    def from_matrix(self, M) -> "AlgElement":
        return AlgElement(self, self.coords_of(M))

    def zero(self) -> "AlgElement":
        return AlgElement(self, (mpq(0),) * self.d)

    def identity(self) -> "AlgElement":
        c = [mpq(0)] * self.d
        for k in self.diag_slots:
            c[k] = mpq(1)
        return AlgElement(self, tuple(c))

    def unit(self, k: int) -> "AlgElement":
        c = [mpq(0)] * self.d
        c[k] = mpq(1)
        return AlgElement(self, tuple(c))

    def matrix_unit(self, p: int, q: int) -> "AlgElement":
        """``E_pq`` with 1-based indices, as in the usual notation."""
        try:
            return self.unit(self.index[(p - 1, q - 1)])
        except KeyError:
            raise MembershipError(f"E{p}{q} is not in the algebra") from None

    def units(self) -> list:
        return [self.unit(k) for k in range(self.d)]

    @cached_property
    def unit_matrices(self) -> tuple:
        return tuple(self.to_matrix(self.unit(k).coords) for k in range(self.d))

    # structure ---------------------------------------------------------

    def structure_constants(self) -> dict:
        """``(i, j) -> [(slot, coefficient)]`` for the product of basis units."""
        table = {}
        for i, (p, q) in enumerate(self.positions):
            for j, (r, s) in enumerate(self.positions):
                table[(i, j)] = [(self.index[(p, s)], mpq(1))] if q == r else []
        return table

    def random_element(self, rng: SplitMix64, field=RATIONAL, density=(1, 1)) -> "AlgElement":
        """Coordinates drawn in basis order.

        With ``density = (num, den)`` below one, each slot first draws a
        keep/drop decision and only kept slots draw a scalar.
        """
        num, den = density
        coords = []
        for _ in range(self.d):
            if num < den and not rng.chance(num, den):
                coords.append(mpq(0))
            else:
                coords.append(random_scalar(rng, field))
        return AlgElement(self, tuple(coords))

    def random_singular(self, rng: SplitMix64, field=RATIONAL) -> "AlgElement":
        """Random element with one randomly chosen row cleared (hence singular)."""
        A = self.random_element(rng, field, density=(2, 3))
        row = rng.below(self.n)
        coords = tuple(mpq(0) if self.positions[k][0] == row else c for k, c in enumerate(A.coords))
        return AlgElement(self, coords)

    def random_sandwiched(self, rng: SplitMix64, field=RATIONAL) -> "AlgElement":
        """``X S Y`` with ``S`` from :meth:`random_singular` and ``X``, ``Y`` random
        (drawn in that order: S, X, Y). Still singular, but its kernel and
        range are no longer aligned with coordinate axes.
        """
        S = self.random_singular(rng, field)
        X = self.random_element(rng, field)
        Y = self.random_element(rng, field)
        return X * S * Y


@lru_cache(maxsize=None)
def build(spec: NestSpec) -> AlgBasis:
    if not isinstance(spec, NestSpec):
        spec = NestSpec(tuple(spec))
    return AlgBasis(spec)


def basis_for(dims) -> AlgBasis:
    return build(NestSpec(tuple(dims)))


@dataclass(frozen=True, eq=False)
class AlgElement:
    basis: AlgBasis
    coords: tuple

    @cached_property
    def matrix(self) -> list:
        return self.basis.to_matrix(self.coords)

    def __eq__(self, other):
        if not isinstance(other, AlgElement):
            return NotImplemented
        return self.basis == other.basis and self.coords == other.coords

    def __hash__(self):
        return hash((self.basis, self.coords))

    def __bool__(self):
        return any(self.coords)

    def __add__(self, other):
        return AlgElement(self.basis, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        return AlgElement(self.basis, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return AlgElement(self.basis, tuple(-a for a in self.coords))

    def __mul__(self, other):
        if isinstance(other, AlgElement):
            return self.basis.from_matrix(linalg.mat_mul(self.matrix, other.matrix))
        return AlgElement(self.basis, tuple(other * a for a in self.coords))

    def __rmul__(self, scalar):
        return AlgElement(self.basis, tuple(scalar * a for a in self.coords))

    def __repr__(self):
        terms = [
            f"{format_scalar(c)}*{self.basis.label(k)}" for k, c in enumerate(self.coords) if c
        ]
        return " + ".join(terms) if terms else "0"

    def to_json(self) -> dict:
        return {"nest": list(self.basis.spec.dims), "coords": [format_scalar(c) for c in self.coords]}

    @classmethod
    def from_json(cls, obj: dict, field=RATIONAL) -> "AlgElement":
        basis = basis_for(obj["nest"])
        return basis.element([parse_scalar(s, field) for s in obj["coords"]])


class WitnessPair(NamedTuple):
    A: AlgElement
    B: AlgElement


def idempotent_generators(basis: AlgBasis) -> list:
    """Idempotents spanning the algebra.

    The diagonal units ``E_pp``, ``E_pp + E_pq`` for every off-diagonal
    allowed ``(p, q)``, and the nest projections onto the first ``n_i``
    coordinates. Duplicates are dropped, first occurrence kept.
    """
    family = []
    seen = set()

    def add(coords):
        coords = tuple(coords)
        if coords not in seen:
            seen.add(coords)
            family.append(AlgElement(basis, coords))

    for p in range(basis.n):
        add(basis.unit(basis.index[(p, p)]).coords)
    for (p, q), k in basis.index.items():
        if p != q:
            c = [mpq(0)] * basis.d
            c[basis.index[(p, p)]] = mpq(1)
            c[k] = mpq(1)
            add(c)
    for dim in basis.spec.dims:
        c = [mpq(0)] * basis.d
        for p in range(dim):
            c[basis.index[(p, p)]] = mpq(1)
        add(c)
    return family


def commutator_system(basis: AlgBasis) -> list:
    """Rows of ``C E_k - E_k C = 0`` over all units ``E_k``, unknown ``C`` in coordinates."""
    rows = []
    for p, q in basis.positions:
        block = {}
        for j, (a, b) in enumerate(basis.positions):
            # E_ab E_pq = [b == p] E_aq ;  E_pq E_ab = [q == a] E_pb
            if b == p:
                block.setdefault(basis.index[(a, q)], {}).setdefault(j, 0)
                block[basis.index[(a, q)]][j] += 1
            if q == a:
                block.setdefault(basis.index[(p, b)], {}).setdefault(j, 0)
                block[basis.index[(p, b)]][j] -= 1
        for slot in sorted(block):
            row = [mpq(0)] * basis.d
            for j, v in block[slot].items():
                row[j] = mpq(v)
            if any(row):
                rows.append(row)
    return rows


def center(basis: AlgBasis) -> list:
    rows = commutator_system(basis)
    return [AlgElement(basis, tuple(v)) for v in linalg.nullspace(rows, basis.d)]


def right_annihilator(A: AlgElement) -> list:
    """Basis of ``{B : A B = 0}``."""
    L = linalg.mult_rep("left", A.matrix, A.basis)
    return [AlgElement(A.basis, tuple(v)) for v in linalg.nullspace(L, A.basis.d)]


def left_annihilator(B: AlgElement) -> list:
    """Basis of ``{A : A B = 0}``."""
    Rm = linalg.mult_rep("right", B.matrix, B.basis)
    return [AlgElement(B.basis, tuple(v)) for v in linalg.nullspace(Rm, B.basis.d)]


def combine(basis: AlgBasis, vectors: list, rng: SplitMix64, field=RATIONAL) -> AlgElement:
    """Random linear combination of ``vectors`` (scalars drawn in list order)."""
    out = [mpq(0)] * basis.d
    for v in vectors:
        c = random_scalar(rng, field)
        for k, x in enumerate(v.coords):
            if x:
                out[k] = out[k] + c * x
    return AlgElement(basis, tuple(out))


def _unit_pairs(basis: AlgBasis) -> Iterator[WitnessPair]:
    units = basis.units()
    for i, (p, q) in enumerate(basis.positions):
        for j, (r, s) in enumerate(basis.positions):
            if q != r:
                yield WitnessPair(units[i], units[j])


def _canonical_pairs(basis: AlgBasis) -> Iterator[WitnessPair]:
    I = basis.identity().matrix
    units = basis.unit_matrices
    for P in idempotent_generators(basis):
        Pm = P.matrix
        Qm = linalg.mat_sub(I, Pm)
        for first, second in ((Pm, Qm), (Qm, Pm)):
            lefts = [linalg.mat_mul(X, first) for X in units]
            rights = [linalg.mat_mul(second, Y) for Y in units]
            lefts = [basis.from_matrix(M) for M in lefts if not linalg.is_zero(M)]
            rights = [basis.from_matrix(M) for M in rights if not linalg.is_zero(M)]
            for A in lefts:
                for B in rights:
                    yield WitnessPair(A, B)


def _random_pair(basis: AlgBasis, rng: SplitMix64, field) -> WitnessPair:
    if rng.chance(1, 2):
        A = basis.random_singular(rng, field)
        B = combine(basis, right_annihilator(A), rng, field)
    else:
        B = basis.random_singular(rng, field)
        A = combine(basis, left_annihilator(B), rng, field)
    return WitnessPair(A, B)


def iter_zero_product_pairs(basis: AlgBasis, count: int, seed: int, field=RATIONAL) -> Iterator[WitnessPair]:
    """Lazy witness stream: unit pairs, then the remaining canonical pairs,
    then ``count`` seeded annihilator pairs. Pairs with a zero factor and
    repeats are skipped; every pair has ``A B = 0``.
    """
    if count < 1:
        raise InputError("count must be at least 1")
    seen = set()

    def fresh(pair):
        key = (pair.A.coords, pair.B.coords)
        if not pair.A or not pair.B or key in seen:
            return False
        seen.add(key)
        return True

    for pair in _unit_pairs(basis):
        if fresh(pair):
            yield pair
    for pair in _canonical_pairs(basis):
        if fresh(pair):
            yield pair
    rng = SplitMix64(seed)
    emitted = attempts = 0
    while emitted < count and attempts < 20 * count:
        attempts += 1
        pair = _random_pair(basis, rng, field)
        if fresh(pair):
            emitted += 1
            yield pair


def sample_zero_product_pairs(basis: AlgBasis, count: int, seed: int, field=RATIONAL) -> list:
    return list(iter_zero_product_pairs(basis, count, seed, field))

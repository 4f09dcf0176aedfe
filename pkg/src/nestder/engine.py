"""Ternary derivations on nest algebras.

Given linear maps ``delta`` and ``tau`` on a nest algebra, this module decides
the zero-product condition

    A B = 0  ==>  delta(A) B + A tau(B) = 0,

builds the completing map ``gamma`` with ``gamma(AB) = delta(A) B + A tau(B)``,
and recovers elements ``R, S, T`` of the algebra with

    delta(A) = R A + A S,   tau(A) = -S A + A T,   gamma(A) = R A + A T.

Everything is exact. Identities that hold for all ``A, B`` are checked on
pairs of matrix units, which is enough by bilinearity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Optional

from gmpy2 import mpq

from . import linalg
from .errors import ConsistencyError, InputError, TheoremViolation
from .nest import (
    AlgBasis,
    AlgElement,
    WitnessPair,
    basis_for,
    idempotent_generators,
    iter_zero_product_pairs,
)
from .scalars import RATIONAL, format_scalar, parse_scalar


@dataclass(frozen=True, eq=False)
class OpMap:
    """Linear map on the algebra; column ``k`` holds the image of unit ``k``."""

    basis: AlgBasis
    matrix: tuple

    def __post_init__(self):
        d = self.basis.d
        m = tuple(tuple(linalg._lift(x) for x in row) for row in self.matrix)
        if len(m) != d or any(len(row) != d for row in m):
            raise InputError(f"map matrix must be {d}x{d}")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_columns(cls, basis: AlgBasis, columns) -> "OpMap":
        return cls(basis, tuple(zip(*columns)) if columns else ())

    @classmethod
    def from_function(cls, basis: AlgBasis, f) -> "OpMap":
        """Tabulate ``f`` (dense matrix -> dense matrix) on the matrix units."""
        return cls.from_columns(basis, [basis.coords_of(f(E)) for E in basis.unit_matrices])

    @classmethod
    def zero(cls, basis: AlgBasis) -> "OpMap":
        return cls(basis, linalg.zeros(basis.d, basis.d))

    @classmethod
    def identity(cls, basis: AlgBasis) -> "OpMap":
        return cls(basis, linalg.identity(basis.d))

    @cached_property
    def columns(self) -> tuple:
        return tuple(zip(*self.matrix))

    @cached_property
    def images(self) -> tuple:
        return tuple(self.basis.to_matrix(col) for col in self.columns)

    @cached_property
    def at_identity(self) -> list:
        return self.apply_coords(self.basis.identity().coords)

    def apply_coords(self, coords) -> list:
        """Dense image of the element with the given coordinates."""
        d = self.basis.d
        out = [0] * d
        for k, c in enumerate(coords):
            if c:
                for i, v in enumerate(self.columns[k]):
                    if v:
                        out[i] = out[i] + c * v
        return self.basis.to_matrix([linalg._lift(x) for x in out])

    def apply_matrix(self, M) -> list:
        return self.apply_coords(self.basis.coords_of(M))

    def __call__(self, X: AlgElement) -> AlgElement:
        return self.basis.from_matrix(self.apply_coords(X.coords))

    def __eq__(self, other):
        return isinstance(other, OpMap) and self.basis == other.basis and self.matrix == other.matrix

    def __hash__(self):
        return hash((self.basis, self.matrix))

    def __add__(self, other):
        return OpMap(self.basis, linalg.mat_add(self.matrix, other.matrix))

    def __sub__(self, other):
        return OpMap(self.basis, linalg.mat_sub(self.matrix, other.matrix))

    def __neg__(self):
        return OpMap(self.basis, linalg.mat_scale(-1, self.matrix))

    def __rmul__(self, scalar):
        return OpMap(self.basis, linalg.mat_scale(scalar, self.matrix))

    def to_json(self) -> dict:
        return {
            "nest": list(self.basis.spec.dims),
            "matrix": [[format_scalar(x) for x in row] for row in self.matrix],
        }

    @classmethod
    def from_json(cls, obj: dict, field=RATIONAL) -> "OpMap":
        basis = basis_for(obj["nest"])
        return cls(basis, [[parse_scalar(s, field) for s in row] for row in obj["matrix"]])


def left_mult(a: AlgElement) -> OpMap:
    return OpMap(a.basis, linalg.mult_rep("left", a.matrix, a.basis))


def right_mult(b: AlgElement) -> OpMap:
    return OpMap(b.basis, linalg.mult_rep("right", b.matrix, b.basis))


@dataclass(frozen=True)
class TernaryTriple:
    gamma: OpMap
    delta: OpMap
    tau: OpMap

    def to_json(self) -> dict:
        return {"gamma": self.gamma.to_json(), "delta": self.delta.to_json(), "tau": self.tau.to_json()}


@dataclass(frozen=True)
class ImplementingTriple:
    R: AlgElement
    S: AlgElement
    T: AlgElement

    def delta(self) -> OpMap:
        return left_mult(self.R) + right_mult(self.S)

    def tau(self) -> OpMap:
        return right_mult(self.T) - left_mult(self.S)

    def gamma(self) -> OpMap:
        return left_mult(self.R) + right_mult(self.T)

    def to_json(self) -> dict:
        return {"R": self.R.to_json(), "S": self.S.to_json(), "T": self.T.to_json()}


@dataclass(frozen=True)
class ZWitness:
    """A pair with ``A B = 0`` and the nonzero value ``delta(A) B + A tau(B)``."""

    pair: WitnessPair
    value: list

    def to_json(self) -> dict:
        return {
            "A": self.pair.A.to_json(),
            "B": self.pair.B.to_json(),
            "value": [[format_scalar(x) for x in row] for row in self.value],
        }


@dataclass
class ZReport:
    verdict: str  # "holds" | "refuted" | "inconclusive"
    counter_witness: Optional[ZWitness] = None
    certificate: Optional[ImplementingTriple] = None
    pairs_checked: int = 0
    infeasibility: Optional[dict] = None

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "pairs_checked": self.pairs_checked}
        if self.counter_witness is not None:
            out["counter_witness"] = self.counter_witness.to_json()
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        if self.infeasibility is not None:
            out["infeasibility"] = self.infeasibility
        return out


def repro_bundle(delta: OpMap, tau: OpMap, **extra) -> dict:
    bundle = {"nest": list(delta.basis.spec.dims), "delta": delta.to_json(), "tau": tau.to_json()}
    bundle.update(extra)
    return bundle


def _same_basis(*maps):
    b = maps[0].basis
    if any(m.basis != b for m in maps[1:]):
        raise InputError("maps live on different algebras")
    return b


# zero-product condition --------------------------------------------------


def z_value(delta: OpMap, tau: OpMap, A: AlgElement, B: AlgElement) -> list:
    dA = delta.apply_coords(A.coords)
    tB = tau.apply_coords(B.coords)
    return linalg.mat_add(linalg.mat_mul(dA, B.matrix), linalg.mat_mul(A.matrix, tB))


def check_Z(delta: OpMap, tau: OpMap, pairs: Iterable) -> Optional[ZWitness]:
    """``None`` if the condition holds on every pair, else the first failure."""
    _same_basis(delta, tau)
    for pair in pairs:
        A, B = pair
        if not linalg.is_zero(linalg.mat_mul(A.matrix, B.matrix)):
            raise InputError(f"witness pair does not multiply to zero: A={A!r}, B={B!r}")
        value = z_value(delta, tau, A, B)
        if not linalg.is_zero(value):
            return ZWitness(WitnessPair(A, B), value)
    return None


def find_counter_witness(delta, tau, seed=0, count=64, field=RATIONAL, budget=None):
    """Search the witness stream; returns ``(witness or None, pairs checked)``."""
    basis = _same_basis(delta, tau)
    checked = 0
    for pair in iter_zero_product_pairs(basis, count, seed, field):
        if budget is not None and checked >= budget:
            break
        checked += 1
        value = z_value(delta, tau, pair.A, pair.B)
        if not linalg.is_zero(value):
            return ZWitness(pair, value), checked
    return None, checked


# R, S, T solve -----------------------------------------------------------


@lru_cache(maxsize=None)
def _rst_system(basis: AlgBasis) -> linalg.PreparedSystem:
    """Equations ``delta(E) = R E + E S`` then ``tau(E) = -S E + E T``.

    Unknowns are laid out as R, S, T coordinate blocks of length d each.
    """
    d, idx = basis.d, basis.index
    rows = []
    for offset_left, sign_left, offset_right in ((0, 1, d), (d, -1, 2 * d)):
        for p, q in basis.positions:
            for x, y in basis.positions:
                row = []
                # (X E_pq)[x,y] = [y == q] X[x,p];  (E_pq Y)[x,y] = [x == p] Y[q,y]
                if y == q and (x, p) in idx:
                    row.append((offset_left + idx[(x, p)], sign_left))
                if x == p and (q, y) in idx:
                    row.append((offset_right + idx[(q, y)], 1))
                rows.append(row)
    return linalg.PreparedSystem(rows, 3 * d)


@dataclass
class RSTSolution:
    basis: AlgBasis
    solution: linalg.SolutionSet

    @property
    def feasible(self) -> bool:
        return self.solution.feasible

    @property
    def homogeneous_dim(self) -> int:
        return len(self.solution.homogeneous_basis)

    def split(self, vec) -> ImplementingTriple:
        d = self.basis.d
        return ImplementingTriple(
            self.basis.element(vec[:d]), self.basis.element(vec[d:2 * d]), self.basis.element(vec[2 * d:])
        )

    def triple(self) -> ImplementingTriple:
        if not self.feasible:
            raise ValueError("system is infeasible")
        return self.split(self.solution.particular)

    def homogeneous_triples(self) -> list:
        return [self.split(v) for v in self.solution.homogeneous_basis]


def _rhs(*maps) -> list:
    b = []
    for m in maps:
        for col in m.columns:
            b.extend(col)
    return b


def solve_RST(delta: OpMap, tau: OpMap) -> RSTSolution:
    basis = _same_basis(delta, tau)
    return RSTSolution(basis, _rst_system(basis).solve(_rhs(delta, tau)))


def decide_Z(delta: OpMap, tau: OpMap, seed=0, count=64, field=RATIONAL, budget=None) -> ZReport:
    """Certify through the R, S, T solve; on infeasibility, search for a witness."""
    sol = solve_RST(delta, tau)
    if sol.feasible:
        return ZReport("holds", certificate=sol.triple())
    witness, checked = find_counter_witness(delta, tau, seed, count, field, budget)
    return ZReport(
        "refuted" if witness else "inconclusive",
        counter_witness=witness,
        pairs_checked=checked,
        infeasibility=sol.solution.certificate(),
    )


# gamma -------------------------------------------------------------------


def gamma_from(delta: OpMap, tau: OpMap) -> OpMap:
    """``gamma(A) = delta(A) + A tau(I)``, gated on
    ``delta(A) - delta(I) A == tau(A) - A tau(I)`` for every unit ``A``.
    """
    basis = _same_basis(delta, tau)
    dI, tI = delta.at_identity, tau.at_identity
    columns = []
    for k, (p, q) in enumerate(basis.positions):
        dE, tE = delta.images[k], tau.images[k]
        E_tI = linalg.unit_left(p, q, tI)
        dI_E = linalg.unit_right(dI, p, q)
        g1 = linalg.mat_add(dE, E_tI)
        g2 = linalg.mat_add(tE, dI_E)
        if g1 != g2:
            raise ConsistencyError(
                f"delta(A) - delta(I)A != tau(A) - A tau(I) at A = {basis.label(k)}", unit=basis.label(k)
            )
        columns.append(basis.coords_of(g1))
    return OpMap.from_columns(basis, columns)


# membership in Tder --------------------------------------------------------


@dataclass(frozen=True)
class FailingPair:
    i: int
    j: int
    labels: tuple
    residual: list


def verify_ternary(triple: TernaryTriple) -> Optional[FailingPair]:
    """First unit pair violating ``gamma(E_i E_j) = delta(E_i) E_j + E_i tau(E_j)``, or ``None``."""
    g, dl, t = triple.gamma, triple.delta, triple.tau
    basis = _same_basis(g, dl, t)
    n, idx = basis.n, basis.index
    z = mpq(0)
    for i, (p, q) in enumerate(basis.positions):
        D = dl.images[i]
        for j, (r, s) in enumerate(basis.positions):
            Tj = t.images[j]
            if q == r:
                res = [[-x for x in row] for row in g.images[idx[(p, s)]]]
            else:
                res = [[z] * n for _ in range(n)]
            for x in range(n):
                res[x][s] = res[x][s] + D[x][r]
            row = res[p]
            Tq = Tj[q]
            for y in range(n):
                row[y] = row[y] + Tq[y]
            if not linalg.is_zero(res):
                return FailingPair(i, j, (basis.label(i), basis.label(j)), res)
    return None


# inner extraction ----------------------------------------------------------


@lru_cache(maxsize=None)
def _derivation_system(basis: AlgBasis) -> linalg.PreparedSystem:
    """Equations ``alpha(E) = E S - S E`` in the unknown ``S``."""
    idx = basis.index
    rows = []
    for p, q in basis.positions:
        for x, y in basis.positions:
            row = []
            if x == p and (q, y) in idx:
                row.append((idx[(q, y)], 1))
            if y == q and (x, p) in idx:
                row.append((idx[(x, p)], -1))
            rows.append(row)
    return linalg.PreparedSystem(rows, basis.d)


def solve_inner_derivation(alpha: OpMap) -> linalg.SolutionSet:
    """Solve ``alpha(A) = A S - S A`` for ``S``."""
    return _derivation_system(alpha.basis).solve(_rhs(alpha))


def extract_inner(triple: TernaryTriple) -> ImplementingTriple:
    """Implementing ``(R, S, T)`` for a verified ternary derivation.

    ``alpha(A) = delta(A) - delta(I) A`` is a derivation; the inner solve gives
    ``S`` with free parameters at zero, then ``R = delta(I) - S`` and
    ``T = tau(I) + S``.
    """
    basis = _same_basis(triple.gamma, triple.delta, triple.tau)
    delta, tau = triple.delta, triple.tau
    dI = basis.from_matrix(delta.at_identity)
    tI = basis.from_matrix(tau.at_identity)
    alpha = delta - left_mult(dI)
    sol = solve_inner_derivation(alpha)
    if not sol.feasible:
        raise TheoremViolation(
            "derivation delta(A) - delta(I)A is not inner",
            repro_bundle(delta, tau, gamma=triple.gamma.to_json(), certificate=sol.certificate()),
        )
    S = basis.element(sol.particular)
    out = ImplementingTriple(dI - S, S, tI + S)
    checks = {
        "delta": out.delta() == delta,
        "tau": out.tau() == tau,
        "gamma": out.gamma() == triple.gamma,
        "R+T": out.R + out.T == dI + tI,
    }
    if not all(checks.values()):
        failed = [k for k, ok in checks.items() if not ok]
        raise TheoremViolation(
            f"extracted triple does not reproduce {', '.join(failed)}",
            repro_bundle(delta, tau, gamma=triple.gamma.to_json(), extracted=out.to_json()),
        )
    return out


def inner_ternary(a: AlgElement, b: AlgElement, c: AlgElement) -> TernaryTriple:
    """``(L_a + R_b, L_a + R_c, -L_c + R_b)``."""
    La, Rb = left_mult(a), right_mult(b)
    return TernaryTriple(La + Rb, La + right_mult(c), Rb - left_mult(c))


def uniqueness_check(delta: OpMap, tau: OpMap, g1: OpMap, g2: OpMap) -> str:
    for name, g in (("g1", g1), ("g2", g2)):
        bad = verify_ternary(TernaryTriple(g, delta, tau))
        if bad is not None:
            raise InputError(f"{name} does not complete (delta, tau): fails at {bad.labels}")
    if g1 != g2:
        raise TheoremViolation(
            "two distinct completions of the same (delta, tau)",
            repro_bundle(delta, tau, g1=g1.to_json(), g2=g2.to_json()),
        )
    return "equal"


# proof-step identities -----------------------------------------------------


@dataclass
class StepReport:
    results: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.results.values())

    def to_json(self) -> dict:
        return {"results": dict(self.results), "failures": dict(self.failures)}


def step_identities(delta: OpMap, tau: OpMap, strict: bool = False) -> StepReport:
    """Exact check of the intermediate identities behind the completion.

    * step1:        delta(AP) + AP tau(I) = A tau(P) + delta(A) P
    * step1_mirror: tau(PA) + delta(I) PA = P tau(A) + delta(P) A
    * step3:        delta(AB) = A delta(B) + delta(A) B - A delta(I) B
    * step4:        tau(AB) = A tau(B) + tau(A) B - A tau(I) B
    * step5:        tau(A) - A tau(I) = delta(A) - delta(I) A

    ``A``, ``B`` run over matrix units and ``P`` over the idempotent
    generators. With ``strict`` any failure raises ``TheoremViolation``.
    """
    basis = _same_basis(delta, tau)
    pos, idx = basis.positions, basis.index
    dI, tI = delta.at_identity, tau.at_identity
    report = StepReport()
    mm, add, sub = linalg.mat_mul, linalg.mat_add, linalg.mat_sub
    uleft, uright = linalg.unit_left, linalg.unit_right

    def record(step, ok, where):
        if step not in report.results:
            report.results[step] = True
        if not ok and report.results[step]:
            report.results[step] = False
            report.failures[step] = where

    gens = idempotent_generators(basis)
    for pi, P in enumerate(gens):
        Pm = P.matrix
        dP = delta.apply_coords(P.coords)
        tP = tau.apply_coords(P.coords)
        P_tI = mm(Pm, tI)
        dI_P = mm(dI, Pm)
        for k, (x, y) in enumerate(pos):
            if not report.results.get("step1", True) and not report.results.get("step1_mirror", True):
                break
            # A = E_xy
            AP = uleft(x, y, Pm)
            lhs = add(delta.apply_matrix(AP), uleft(x, y, P_tI))
            rhs = add(uleft(x, y, tP), mm(delta.images[k], Pm))
            record("step1", lhs == rhs, f"A={basis.label(k)}, P=#{pi}")
            PA = uright(Pm, x, y)
            lhs = add(tau.apply_matrix(PA), uright(dI_P, x, y))
            rhs = add(mm(Pm, tau.images[k]), uright(dP, x, y))
            record("step1_mirror", lhs == rhs, f"A={basis.label(k)}, P=#{pi}")
    report.results.setdefault("step1", True)
    report.results.setdefault("step1_mirror", True)

    for step, f in (("step3", delta), ("step4", tau)):
        fI = f.at_identity
        failed = False
        for i, (p, q) in enumerate(pos):
            fA = f.images[i]
            for j, (r, s) in enumerate(pos):
                fB = f.images[j]
                lhs = f.images[idx[(p, s)]] if q == r else None
                rhs = add(uleft(p, q, fB), uright(fA, r, s))
                c = fI[q][r]
                if c:
                    rhs[p][s] = rhs[p][s] - c
                ok = (lhs == rhs) if lhs is not None else linalg.is_zero(rhs)
                record(step, ok, f"A={basis.label(i)}, B={basis.label(j)}")
                if not ok:
                    failed = True
                    break
            if failed:
                break
        report.results.setdefault(step, True)

    for k, (p, q) in enumerate(pos):
        lhs = sub(tau.images[k], uleft(p, q, tI))
        rhs = sub(delta.images[k], uright(dI, p, q))
        ok = lhs == rhs
        record("step5", ok, f"A={basis.label(k)}")
        if not ok:
            break
    report.results.setdefault("step5", True)

    if strict and not report.ok:
        raise TheoremViolation(
            f"proof-step identities failed: {report.failures}", repro_bundle(delta, tau, steps=report.to_json())
        )
    return report

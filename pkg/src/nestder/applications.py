"""Centralizers, derivations and local maps characterized through zero products.

Each solver decides a global form exactly (``tau(A) = A D``,
``delta(A) = A T - S A`` and so on). Each ``*_check`` pairs the solver with an
independent witness search and returns a :class:`Verdict`:

* ``certified``: the global form holds; the certificate is attached.
* ``refuted``: an exact witness violates the hypothesis.
* ``inconclusive``: the solver found no global form but the sampling budget
  produced no witness. This is never reported as agreement.

Local properties quantify over every element, so sampled locality is only a
necessary condition; the notes on each verdict say which phase decided it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional


from . import linalg
from .engine import (
    OpMap,
    find_counter_witness,
    left_mult,
    solve_RST,
)
from .errors import TheoremViolation
from .nest import (AlgBasis, AlgElement, center, combine, idempotent_generators, left_annihilator,
                   right_annihilator)
from .rng import SplitMix64
from .scalars import RATIONAL, format_scalar

RIGHT, LEFT = "right", "left"


@dataclass
class Verdict:
    corollary: str
    verdict: str
    witness: Optional[dict] = None
    certificate: Optional[dict] = None
    samples: int = 0
    seed: Optional[int] = None
    notes: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"corollary": self.corollary, "verdict": self.verdict, "samples": self.samples, "seed": self.seed}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.notes:
            out["notes"] = self.notes
        return out


@dataclass
class CentralizerReport:
    kind: str
    D: Optional[AlgElement]
    central_flag: bool = False
    right_feasible: bool = False
    left_feasible: bool = False

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "D": self.D.to_json() if self.D is not None else None,
            "central": self.central_flag,
            "right_feasible": self.right_feasible,
            "left_feasible": self.left_feasible,
        }


@dataclass
class DerZeroReport:
    S: AlgElement
    T: AlgElement
    central_witness: tuple  # coordinates of T - S in the center basis

    def to_json(self) -> dict:
        return {
            "S": self.S.to_json(),
            "T": self.T.to_json(),
            "T_minus_S_in_center": [format_scalar(c) for c in self.central_witness],
        }


@dataclass
class GenDerReport:
    at_identity: AlgElement
    derivation: OpMap

    def to_json(self) -> dict:
        return {"delta_I": self.at_identity.to_json(), "derivation": self.derivation.to_json()}


# centralizers --------------------------------------------------------------


@lru_cache(maxsize=None)
def _centralizer_system(basis: AlgBasis, side: str) -> linalg.PreparedSystem:
    """``rho(E) = E D`` (right) or ``rho(E) = D E`` (left) over all units ``E``."""
    idx = basis.index
    rows = []
    for p, q in basis.positions:
        for x, y in basis.positions:
            if side == RIGHT:
                ok = x == p and (q, y) in idx
                rows.append([(idx[(q, y)], 1)] if ok else [])
            else:
                ok = y == q and (x, p) in idx
                rows.append([(idx[(x, p)], 1)] if ok else [])
    return linalg.PreparedSystem(rows, basis.d)


def _solve_centralizer(rho: OpMap, side: str) -> Optional[AlgElement]:
    basis = rho.basis
    system = _centralizer_system(basis, side)
    sol = system.solve([x for col in rho.columns for x in col])
    if not sol.feasible:
        return None
    D = basis.element(sol.particular)
    if sol.homogeneous_basis or D != basis.from_matrix(rho.at_identity):
        raise TheoremViolation(
            f"{side} centralizer solution is not unique or differs from rho(I)", {"rho": rho.to_json()}
        )
    return D


def solve_right_centralizer(tau: OpMap) -> Optional[AlgElement]:
    """``D`` with ``tau(A) = A D`` for all ``A``, or ``None``. When it exists, ``D = tau(I)``."""
    return _solve_centralizer(tau, RIGHT)


def solve_left_centralizer(delta: OpMap) -> Optional[AlgElement]:
    """``D`` with ``delta(A) = D A`` for all ``A``, or ``None``."""
    return _solve_centralizer(delta, LEFT)


def is_central(D: AlgElement) -> bool:
    M = D.matrix
    return all(
        linalg.unit_left(p, q, M) == linalg.unit_right(M, p, q) for p, q in D.basis.positions
    )


def solve_two_sided(rho: OpMap) -> CentralizerReport:
    Dr = solve_right_centralizer(rho)
    Dl = solve_left_centralizer(rho)
    D = Dr if Dr is not None else Dl
    central = D is not None and Dr is not None and Dl is not None and Dr == Dl and is_central(D)
    return CentralizerReport("two-sided", D, central, Dr is not None, Dl is not None)


def _zero(basis):
    return OpMap.zero(basis)


def right_centralizer_check(tau: OpMap, seed=0, count=64, field=RATIONAL, budget=None) -> Verdict:
    """``A B = 0 => A tau(B) = 0`` against ``tau(A) = A D``."""
    D = solve_right_centralizer(tau)
    if D is not None:
        return Verdict("right_centralizer", "certified", certificate={"D": D.to_json()}, seed=seed)
    w, checked = find_counter_witness(_zero(tau.basis), tau, seed, count, field, budget)
    return Verdict("right_centralizer", "refuted" if w else "inconclusive",
                   witness=w.to_json() if w else None, samples=checked, seed=seed)


def left_centralizer_check(delta: OpMap, seed=0, count=64, field=RATIONAL, budget=None) -> Verdict:
    """``A B = 0 => delta(A) B = 0`` against ``delta(A) = D A``."""
    D = solve_left_centralizer(delta)
    if D is not None:
        return Verdict("left_centralizer", "certified", certificate={"D": D.to_json()}, seed=seed)
    w, checked = find_counter_witness(delta, _zero(delta.basis), seed, count, field, budget)
    return Verdict("left_centralizer", "refuted" if w else "inconclusive",
                   witness=w.to_json() if w else None, samples=checked, seed=seed)


def two_sided_check(rho: OpMap, seed=0, count=64, field=RATIONAL, budget=None) -> Verdict:
    """``A B = 0 => A rho(B) = rho(A) B = 0`` against ``rho(A) = A D`` with ``D`` central."""
    rep = solve_two_sided(rho)
    if rep.central_flag:
        return Verdict("two_sided_centralizer", "certified", certificate=rep.to_json(), seed=seed)
    z = _zero(rho.basis)
    checked = 0
    for d_map, t_map in ((z, rho), (rho, z)):
        w, c = find_counter_witness(d_map, t_map, seed, count, field, budget)
        checked += c
        if w:
            return Verdict("two_sided_centralizer", "refuted", witness=w.to_json(), samples=checked,
                           seed=seed, notes={"solver": rep.to_json()})
    return Verdict("two_sided_centralizer", "inconclusive", samples=checked, seed=seed,
                   notes={"solver": rep.to_json()})


# derivations through zero products --------------------------------------------


def solve_derivation_at_zero(delta: OpMap) -> Optional[DerZeroReport]:
    """``S, T`` with ``delta(A) = A T - S A`` and ``T - S`` central, or ``None``."""
    basis = delta.basis
    sol = solve_RST(delta, delta)
    if not sol.feasible:
        return None
    R, S, T = sol.triple().R, sol.triple().S, sol.triple().T
    diff = T - S
    if diff != R + S:
        raise TheoremViolation("T - S != R + S for a derivation-at-zero solution", {"delta": delta.to_json()})
    zs = center(basis)
    cols = [[z.coords[k] for z in zs] for k in range(basis.d)]
    where = linalg.solve_affine(cols, list(diff.coords))
    if not where.feasible:
        raise TheoremViolation("T - S is not central", {"delta": delta.to_json()})
    return DerZeroReport(S, T, tuple(where.particular))


def derivation_at_zero_check(delta: OpMap, seed=0, count=64, field=RATIONAL, budget=None) -> Verdict:
    rep = solve_derivation_at_zero(delta)
    if rep is not None:
        return Verdict("derivation_at_zero", "certified", certificate=rep.to_json(), seed=seed)
    w, checked = find_counter_witness(delta, delta, seed, count, field, budget)
    return Verdict("derivation_at_zero", "refuted" if w else "inconclusive",
                   witness=w.to_json() if w else None, samples=checked, seed=seed)


# generalized and local derivations --------------------------------------------


def generalized_identity_failure(delta: OpMap) -> Optional[tuple]:
    """First unit pair breaking ``delta(AB) = delta(A)B + A delta(B) - A delta(I) B``."""
    basis = delta.basis
    dI = delta.at_identity
    idx = basis.index
    for i, (p, q) in enumerate(basis.positions):
        dA = delta.images[i]
        for j, (r, s) in enumerate(basis.positions):
            rhs = linalg.mat_add(linalg.unit_left(p, q, delta.images[j]), linalg.unit_right(dA, r, s))
            c = dI[q][r]
            if c:
                rhs[p][s] = rhs[p][s] - c
            if q == r:
                ok = rhs == delta.images[idx[(p, s)]]
            else:
                ok = linalg.is_zero(rhs)
            if not ok:
                return basis.label(i), basis.label(j)
    return None


def solve_generalized_derivation(delta: OpMap) -> Optional[GenDerReport]:
    if generalized_identity_failure(delta) is not None:
        return None
    dI = delta.basis.from_matrix(delta.at_identity)
    return GenDerReport(dI, delta - left_mult(dI))


def _sample_elements(basis: AlgBasis, rng: SplitMix64, samples: int, field) -> list:
    """The identity, the units, then seeded random elements cycling through
    row-cleared singular, sandwiched singular and generic draws."""
    out = [basis.identity()] + basis.units()
    draws = (basis.random_singular, basis.random_sandwiched, basis.random_element)
    for k in range(samples):
        out.append(draws[k % 3](rng, field))
    return out


def gd_zero_product_check(delta: OpMap, samples=16, seed=0, field=RATIONAL) -> Verdict:
    """``A B = B C = 0 => A delta(B) C = 0`` against the generalized-derivation identity.

    Unit triples ``(E_bb, E_pq, E_cc)`` with ``b != p`` and ``c != q`` come
    first; then ``samples`` seeded triples, alternating idempotent-split
    triples ``(X(I-P), PYQ, (I-Q)Z)`` with triples that fix a singular ``B``
    and draw ``A`` and ``C`` from its two annihilators.
    """
    basis = delta.basis
    n = basis.n
    checked = 0
    witness = None
    for k, (p, q) in enumerate(basis.positions):
        img = delta.images[k]
        for b in range(n):
            if b == p:
                continue
            for c in range(n):
                if c == q:
                    continue
                checked += 1
                if img[b][c]:
                    A = basis.unit(basis.index[(b, b)])
                    C = basis.unit(basis.index[(c, c)])
                    witness = (A, basis.unit(k), C)
                    break
            if witness:
                break
        if witness:
            break
    rng = SplitMix64(seed)
    gens = idempotent_generators(basis)
    I = basis.identity()
    drawn = 0
    while witness is None and drawn < samples:
        drawn += 1
        if drawn % 2:
            # (X(I-P), P Y Q, (I-Q) Z) for idempotent generators P, Q
            P, Q = rng.choice(gens), rng.choice(gens)
            X, Y, Z = (basis.random_element(rng, field) for _ in range(3))
            A, B, C = X * (I - P), P * Y * Q, (I - Q) * Z
        else:
            B = basis.random_sandwiched(rng, field)
            A = combine(basis, left_annihilator(B), rng, field)
            C = combine(basis, right_annihilator(B), rng, field)
        if not A or not B or not C:
            continue
        checked += 1
        val = linalg.mat_mul(linalg.mat_mul(A.matrix, delta.apply_coords(B.coords)), C.matrix)
        if not linalg.is_zero(val):
            witness = (A, B, C)
    gen = solve_generalized_derivation(delta)
    if witness is not None:
        if gen is not None:
            raise TheoremViolation("generalized derivation violates the triple condition", {"delta": delta.to_json()})
        A, B, C = witness
        return Verdict("generalized_derivation", "refuted",
                       witness={"A": A.to_json(), "B": B.to_json(), "C": C.to_json()}, samples=checked, seed=seed)
    if gen is not None:
        return Verdict("generalized_derivation", "certified", certificate=gen.to_json(), samples=checked, seed=seed)
    return Verdict("generalized_derivation", "inconclusive", samples=checked, seed=seed,
                   notes={"identity_fails_at": list(generalized_identity_failure(delta))})


def derivation_identity_rows(basis: AlgBasis) -> list:
    """Sparse rows of ``D(E_i E_j) = D(E_i) E_j + E_i D(E_j)``.

    The unknown is the map matrix ``D`` itself, entry ``(slot, k)`` at column
    ``slot * d + k``.
    """
    d, idx, pos = basis.d, basis.index, basis.positions
    rows = []
    for i, (p, q) in enumerate(pos):
        for j, (r, s) in enumerate(pos):
            for slot, (x, y) in enumerate(pos):
                terms = []
                if q == r:
                    terms.append((slot * d + idx[(p, s)], 1))
                # D(E_i) E_rs: entry (x, y) = [y == s] D(E_i)[x, r]
                if y == s and (x, r) in idx:
                    terms.append((idx[(x, r)] * d + i, -1))
                # E_pq D(E_j): entry (x, y) = [x == p] D(E_j)[q, y]
                if x == p and (q, y) in idx:
                    terms.append((idx[(q, y)] * d + j, -1))
                if terms:
                    rows.append(terms)
    return rows


@lru_cache(maxsize=None)
def derivation_space(basis: AlgBasis) -> tuple:
    """Basis of all derivations, each as a d x d map matrix (exact nullspace)."""
    d = basis.d
    vecs = linalg.sparse_nullspace(derivation_identity_rows(basis), d * d)
    return tuple(tuple(tuple(v[s * d:(s + 1) * d]) for s in range(d)) for v in vecs)


@lru_cache(maxsize=4096)
def _derivation_values(basis: AlgBasis, coords: tuple):
    """Reduced spanning set of ``{D(A) : D a derivation}`` for ``A`` with these coordinates."""
    d = basis.d
    nz = [(k, c) for k, c in enumerate(coords) if c]
    rows = []
    for D in derivation_space(basis):
        row = []
        for slot in range(d):
            s = 0
            Ds = D[slot]
            for k, c in nz:
                v = Ds[k]
                if v:
                    s = s + v * c
            if s:
                row.append((slot, s))
        rows.append(row)
    reduced, _ = linalg.sparse_rref(rows, d)
    return reduced


def _in_span(reduced: dict, vec) -> bool:
    v = {k: x for k, x in enumerate(vec) if x}
    for pc in sorted(reduced):
        f = v.get(pc)
        if f:
            for c, x in reduced[pc].items():
                nv = v.get(c, 0) - f * x
                if nv:
                    v[c] = nv
                else:
                    v.pop(c, None)
    return not v


def local_derivation_check(delta: OpMap, samples=4, seed=0, field=RATIONAL) -> Verdict:
    """Sampled locality (``delta(A)`` is the value of some derivation at ``A``)
    followed by the global derivation identity.
    """
    basis = delta.basis
    dI_zero = linalg.is_zero(delta.at_identity)
    rng = SplitMix64(seed)
    points = _sample_elements(basis, rng, samples, field)
    for k, A in enumerate(points):
        target = basis.coords_of(delta.apply_coords(A.coords))
        if not _in_span(_derivation_values(basis, A.coords), target):
            return Verdict("local_derivation", "refuted", witness={"A": A.to_json()}, samples=k + 1,
                           seed=seed, notes={"delta_I_zero": dI_zero})
    failure = generalized_identity_failure(delta)
    if failure is None and dI_zero:
        return Verdict("local_derivation", "certified", samples=len(points), seed=seed,
                       certificate={"derivation": True}, notes={"delta_I_zero": True})
    return Verdict("local_derivation", "inconclusive", samples=len(points), seed=seed,
                   notes={"delta_I_zero": dI_zero, "phase": "sampled locality held; global identity failed"})


# local centralizers and ideal-preserving maps -----------------------------------


def _pointwise_solvable(psi: OpMap, A: AlgElement, side: str) -> bool:
    rep = linalg.mult_rep("left" if side == RIGHT else "right", A.matrix, A.basis)
    target = A.basis.coords_of(psi.apply_coords(A.coords))
    return linalg.solve_affine(rep, list(target)).feasible


def _global_centralizer(psi: OpMap, side: str):
    return solve_right_centralizer(psi) if side == RIGHT else solve_left_centralizer(psi)


def local_centralizer_check(psi: OpMap, side=RIGHT, samples=8, seed=0, field=RATIONAL) -> Verdict:
    """Phase (a): ``psi(A) = A D_A`` (or ``D_A A``) solvable at every sampled ``A``.
    Phase (b): global centralizer solve.
    """
    basis = psi.basis
    name = f"local_{side}_centralizer"
    rng = SplitMix64(seed)
    points = _sample_elements(basis, rng, samples, field)
    D = _global_centralizer(psi, side)
    for k, A in enumerate(points):
        if not _pointwise_solvable(psi, A, side):
            if D is not None:
                raise TheoremViolation(f"{side} centralizer fails locality", {"psi": psi.to_json()})
            return Verdict(name, "refuted", witness={"A": A.to_json()}, samples=k + 1, seed=seed,
                           notes={"phase": "a"})
    if D is not None:
        return Verdict(name, "certified", certificate={"D": D.to_json()}, samples=len(points), seed=seed,
                       notes={"phase": "b"})
    return Verdict(name, "inconclusive", samples=len(points), seed=seed,
                   notes={"phase": "consistent with locality at sampled points; no global form"})


def ideal_preserving_check(psi: OpMap, side=RIGHT, samples=0, seed=0, field=RATIONAL) -> Verdict:
    """``psi(E A) subset E A`` (right) or ``psi(A E) subset A E`` (left) for every unit ``E``
    and for ``samples`` seeded generators, as exact column-space containment,
    then the global centralizer solve.
    """
    basis = psi.basis
    name = f"{side}_ideal_preserving"
    D = _global_centralizer(psi, side)
    gens = basis.units()
    if samples:
        gens = gens + _sample_elements(basis, SplitMix64(seed), samples, field)[basis.d + 1:]
    for k, E in enumerate(gens):
        gen = linalg.mult_rep("left" if side == RIGHT else "right", E.matrix, basis)
        image = linalg.mat_mul(psi.matrix, gen)
        r = linalg.rank(gen)
        joint = [a + b for a, b in zip(gen, image)]
        if linalg.rank(joint) != r:
            if D is not None:
                raise TheoremViolation(f"{side} centralizer does not preserve an ideal", {"psi": psi.to_json()})
            return Verdict(name, "refuted", witness={"generator": E.to_json()}, samples=k + 1, seed=seed)
    if D is not None:
        return Verdict(name, "certified", certificate={"D": D.to_json()}, samples=len(gens), seed=seed)
    return Verdict(name, "inconclusive", samples=len(gens), seed=seed,
                   notes={"phase": "sampled principal ideals preserved; no global form"})

"""A unital algebra where the zero-product condition does not yield a completion.

The algebra is spanned by ``I, U = E12, V = E13, W = E23`` inside the 3x3
matrices, i.e. matrices with constant diagonal ``a`` and free entries
``b, c, d`` above it. With ``X = W`` the maps ``delta(A) = A X`` and
``tau(A) = X A`` satisfy ``AB = 0 => delta(A)B + A tau(B) = 0``, yet no linear
``gamma`` satisfies ``gamma(AB) = delta(A)B + A tau(B)``.

Coordinates are ``(a, b, c, d)`` in the order ``I, U, V, W``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from gmpy2 import mpq

from . import linalg
from .engine import (
    TernaryTriple,
    decide_Z,
    gamma_from,
    left_mult,
    right_mult,
    solve_RST,
    verify_ternary,
)
from .errors import TheoremViolation
from .nest import NestSpec, basis_for, build, center
from .scalars import format_scalar


@dataclass(frozen=True)
class FDAlgebra:
    dim: int
    labels: tuple
    matrices: tuple  # dense realization of each basis element
    table: dict  # (i, j) -> coordinate tuple of e_i e_j
    unity: tuple

    def mul(self, x, y) -> tuple:
        out = [mpq(0)] * self.dim
        for i, xi in enumerate(x):
            if not xi:
                continue
            for j, yj in enumerate(y):
                if not yj:
                    continue
                for k, v in enumerate(self.table[(i, j)]):
                    if v:
                        out[k] = out[k] + xi * yj * v
        return tuple(out)

    def unit(self, i) -> tuple:
        return tuple(mpq(1) if k == i else mpq(0) for k in range(self.dim))

    def left_matrix(self, x) -> list:
        cols = [self.mul(x, self.unit(j)) for j in range(self.dim)]
        return linalg.transpose(cols)

    def right_matrix(self, x) -> list:
        cols = [self.mul(self.unit(j), x) for j in range(self.dim)]
        return linalg.transpose(cols)

    def apply(self, M, x) -> tuple:
        return tuple(linalg.mat_vec(M, list(x)))


def _coords_in(mats, M) -> tuple:
    system = linalg.transpose([[x for row in B for x in row] for B in mats])
    sol = linalg.solve_affine(system, [x for row in M for x in row])
    if not sol.feasible:
        raise ValueError("product leaves the algebra")
    return tuple(sol.particular)


def _unit3(p, q):
    M = linalg.zeros(3, 3)
    M[p][q] = mpq(1)
    return M


@lru_cache(maxsize=None)
def build_example_algebra() -> FDAlgebra:
    mats = (linalg.identity(3), _unit3(0, 1), _unit3(0, 2), _unit3(1, 2))
    table = {}
    for i, j in itertools.product(range(4), repeat=2):
        table[(i, j)] = _coords_in(mats, linalg.mat_mul(mats[i], mats[j]))
    alg = FDAlgebra(4, ("I", "U", "V", "W"), mats, table, (mpq(1), mpq(0), mpq(0), mpq(0)))
    for i, j, k in itertools.product(range(4), repeat=3):
        ei, ej, ek = alg.unit(i), alg.unit(j), alg.unit(k)
        if alg.mul(alg.mul(ei, ej), ek) != alg.mul(ei, alg.mul(ej, ek)):
            raise TheoremViolation("example algebra is not associative")
    return alg


I_, U_, V_, W_ = range(4)


def example_maps():
    """``(delta, tau) = (A -> A X, A -> X A)`` with ``X = W``, as 4x4 coordinate matrices."""
    alg = build_example_algebra()
    X = alg.unit(W_)
    return alg.right_matrix(X), alg.left_matrix(X)


def _value(alg, delta, tau, A, B) -> tuple:
    left = alg.mul(alg.apply(delta, A), B)
    right = alg.mul(A, alg.apply(tau, B))
    return tuple(x + y for x, y in zip(left, right))


def verify_example_Z() -> dict:
    """Exact verification that the pair satisfies the zero-product condition.

    Write ``A = (a, b, c, d)``, ``B = (a', b', c', d')``; the value is
    ``delta(A)B + A tau(B) = 2 A X B = 2 b a' V + 2 a a' W`` while the
    ``I``- and ``U``-coordinates of ``AB`` are ``a a'`` and ``a b' + b a'``.

    * ``a = 0`` stratum: value ``= 2 (AB)_U V``, a bilinear identity on
      ``{a = 0} x algebra`` checked on basis pairs.
    * all ``A``: ``a * value = 2 b (AB)_I V + 2 a (AB)_I W``, a polynomial
      identity of degree <= 2 in each coordinate of ``A`` and <= 1 in each
      coordinate of ``B``, checked on the grid ``{0,1,2}^4 x {0,1}^4`` (which
      determines such a polynomial). With ``a != 0`` it forces value = 0.
    * a sanity sweep over ``A`` in ``{-1,0,1}^4``: the value vanishes on a
      basis of the right annihilator of each ``A`` (exact for that ``A``).
    """
    alg = build_example_algebra()
    delta, tau = example_maps()
    two = mpq(2)

    linear_pairs = 0
    for i in (U_, V_, W_):
        for j in range(4):
            A, B = alg.unit(i), alg.unit(j)
            val = _value(alg, delta, tau, A, B)
            expect = tuple(two * alg.mul(A, B)[U_] if k == V_ else mpq(0) for k in range(4))
            if val != expect:
                raise TheoremViolation(f"linear-stratum identity fails at ({alg.labels[i]}, {alg.labels[j]})")
            linear_pairs += 1

    grid_points = 0
    for a_vals in itertools.product(range(3), repeat=4):
        A = tuple(mpq(v) for v in a_vals)
        for b_vals in itertools.product(range(2), repeat=4):
            B = tuple(mpq(v) for v in b_vals)
            val = _value(alg, delta, tau, A, B)
            prod_I = alg.mul(A, B)[I_]
            lhs = tuple(A[I_] * v for v in val)
            rhs = [mpq(0)] * 4
            rhs[V_] = two * A[U_] * prod_I
            rhs[W_] = two * A[I_] * prod_I
            if lhs != tuple(rhs):
                raise TheoremViolation(f"generic-stratum identity fails at A={a_vals}, B={b_vals}")
            grid_points += 1

    sweep_pairs = 0
    for a_vals in itertools.product(range(-1, 2), repeat=4):
        A = tuple(mpq(v) for v in a_vals)
        for B in linalg.nullspace(alg.left_matrix(A), 4):
            B = tuple(B)
            if any(alg.mul(A, B)):
                raise TheoremViolation("annihilator basis vector does not annihilate")
            if any(_value(alg, delta, tau, A, B)):
                raise TheoremViolation(f"zero-product condition fails at A={a_vals}")
            sweep_pairs += 1

    return {
        "verdict": "holds",
        "linear_stratum_basis_pairs": linear_pairs,
        "generic_stratum_grid_points": grid_points,
        "annihilator_sweep_pairs": sweep_pairs,
    }


def _gamma_system(alg, delta, tau, units):
    """Rows ``gamma(e_i e_j) = delta(e_i) e_j + e_i tau(e_j)`` for ``i, j`` in ``units``;
    unknown ``gamma[slot][k]`` at column ``slot * dim + k`` restricted to ``k`` in ``units``.
    """
    cols = {k: c for c, k in enumerate(units)}
    width = len(units)
    M, b, tags = [], [], []
    for i in units:
        for j in units:
            ei, ej = alg.unit(i), alg.unit(j)
            prod = alg.mul(ei, ej)
            if any(v for k, v in enumerate(prod) if v and k not in cols):
                raise ValueError("product leaves the chosen span")
            rhs = _value(alg, delta, tau, ei, ej)
            for slot in range(alg.dim):
                row = [mpq(0)] * (alg.dim * width)
                for k, v in enumerate(prod):
                    if v:
                        row[slot * width + cols[k]] = v
                M.append(row)
                b.append(rhs[slot])
                tags.append((alg.labels[i], alg.labels[j], alg.labels[slot]))
    return M, b, tags


def show_no_gamma() -> dict:
    """Exact infeasibility certificate for the completion of the example pair."""
    alg = build_example_algebra()
    delta, tau = example_maps()
    M, b, _ = _gamma_system(alg, delta, tau, list(range(4)))
    sol = linalg.solve_affine(M, b)
    if sol.feasible:
        raise TheoremViolation("a completing gamma exists for the example pair")
    Iu, Uu = alg.unit(I_), alg.unit(U_)
    forced_from_left_identity = _value(alg, delta, tau, Iu, Uu)  # gamma(U) = gamma(I U)
    forced_from_right_identity = _value(alg, delta, tau, Uu, Iu)  # gamma(U) = gamma(U I)
    if forced_from_left_identity == forced_from_right_identity:
        raise TheoremViolation("forced values of gamma(U) agree")

    sub_M, sub_b, _ = _gamma_system(alg, delta, tau, [I_, V_])
    sub = linalg.solve_affine(sub_M, sub_b)

    def fmt(x):
        return {alg.labels[k]: format_scalar(v) for k, v in enumerate(x) if v}

    return {
        "verdict": "infeasible",
        "unknowns": len(M[0]),
        "equations": len(M),
        "rank": sol.rank,
        "augmented_rank": sol.augmented_rank,
        "rank_gap": sol.augmented_rank - sol.rank,
        "gamma_U_forced_by_(I,U)": fmt(forced_from_left_identity),
        "gamma_U_forced_by_(U,I)": fmt(forced_from_right_identity),
        "subalgebra_I_V_feasible": sub.feasible,
    }


def _radical_dim(dim, left_matrix, mul, unit) -> int:
    """Dimension of the radical via the trace form ``(x, y) -> tr(L_{xy})`` (characteristic 0)."""
    form = []
    for i in range(dim):
        row = []
        for j in range(dim):
            Lm = left_matrix(mul(unit(i), unit(j)))
            row.append(sum((Lm[k][k] for k in range(dim)), mpq(0)))
        form.append(row)
    return dim - linalg.rank(form)


def algebra_census() -> dict:
    """Center and radical dimensions of the example against every nest algebra of dimension 4."""
    alg = build_example_algebra()
    center_rows = []
    for j in range(4):
        ej = alg.unit(j)
        comm = linalg.mat_sub(alg.right_matrix(ej), alg.left_matrix(ej))
        center_rows.extend(comm)
    example = {
        "center_dim": 4 - linalg.rank(center_rows),
        "radical_dim": _radical_dim(4, alg.left_matrix, alg.mul, alg.unit),
    }
    nests = []
    for n in range(2, 5):
        for k in range(1, n + 1):
            for inner in itertools.combinations(range(1, n), k - 1):
                spec = NestSpec(tuple(inner) + (n,))
                basis = build(spec)
                if basis.d != 4:
                    continue

                def lmat(x, basis=basis):
                    return linalg.mult_rep("left", basis.to_matrix(x), basis)

                def bmul(x, y, basis=basis):
                    return basis.coords_of(linalg.mat_mul(basis.to_matrix(x), basis.to_matrix(y)))

                nests.append({
                    "nest": list(spec.dims),
                    "center_dim": len(center(basis)),
                    "radical_dim": _radical_dim(4, lmat, bmul, lambda i, b=basis: b.unit(i).coords),
                })
    isomorphic_candidate = any(
        e["center_dim"] == example["center_dim"] and e["radical_dim"] == example["radical_dim"] for e in nests
    )
    return {"example": example, "nest_algebras_of_dim_4": nests, "invariants_match_some_nest": isomorphic_candidate}


def nest_contrast() -> dict:
    """The same pipeline on the 2x2 upper-triangular algebra (nest [1,2]).

    For ``(A -> A X, A -> X A)`` with ``X`` over ``I`` and the matrix units,
    solver feasibility and the witness search agree in every case, as they
    must on a nest algebra. The mirrored pair ``(A -> X A, A -> A X)`` with
    ``X = E12`` is feasible and its completion is a ternary derivation.
    """
    basis = basis_for((1, 2))
    cases = []
    agree = True
    choices = [("I", basis.identity())] + [(basis.label(k), basis.unit(k)) for k in range(basis.d)]
    for label, X in choices:
        delta, tau = right_mult(X), left_mult(X)
        rep = decide_Z(delta, tau)
        entry = {"X": label, "form": "(R_X, L_X)", "solve_RST_feasible": rep.verdict == "holds",
                 "zero_product": "holds" if rep.verdict == "holds" else rep.verdict}
        if rep.counter_witness is not None:
            w = rep.counter_witness
            entry["witness"] = {"A": repr(w.pair.A), "B": repr(w.pair.B)}
        if rep.verdict == "holds":
            g = gamma_from(delta, tau)
            entry["gamma_verified"] = verify_ternary(TernaryTriple(g, delta, tau)) is None
        agree = agree and rep.verdict in ("holds", "refuted")
        cases.append(entry)

    X = basis.matrix_unit(1, 2)
    delta, tau = left_mult(X), right_mult(X)
    sol = solve_RST(delta, tau)
    g = gamma_from(delta, tau)
    mirrored = {
        "X": "E12",
        "form": "(L_X, R_X)",
        "solve_RST_feasible": sol.feasible,
        "gamma_verified": verify_ternary(TernaryTriple(g, delta, tau)) is None,
    }
    return {
        "nest": [1, 2],
        "one_sided_cases": cases,
        "solver_and_witness_agree": agree,
        "mirrored_case": mirrored,
    }

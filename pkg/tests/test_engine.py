import pytest

from conftest import SMALL_NESTS
from nestder import linalg
from nestder.engine import (OpMap, TernaryTriple, check_Z, decide_Z, extract_inner,
                            find_counter_witness, gamma_from, inner_ternary, left_mult,
                            right_mult, solve_RST, step_identities, uniqueness_check,
                            verify_ternary)
from nestder.errors import ConsistencyError, InputError, TheoremViolation
from nestder.applications import is_central as app_is_central
from nestder.nest import NestSpec, WitnessPair, basis_for, build, center, sample_zero_product_pairs
from nestder.rng import SplitMix64, trial_rng
from nestder.scalars import GAUSSIAN, RATIONAL, random_scalar


def family(basis, rng, field=RATIONAL):
    R, S, T = (basis.random_element(rng, field) for _ in range(3))
    return left_mult(R) + right_mult(S), right_mult(T) - left_mult(S), (R, S, T)


def random_map(basis, rng, field=RATIONAL):
    return OpMap(basis, [[random_scalar(rng, field) for _ in range(basis.d)] for _ in range(basis.d)])


def dense_rst_feasible(delta, tau):
    """Independent oracle: assemble the R, S, T system from explicit
    multiplication matrices and solve it densely."""
    basis = delta.basis
    d = basis.d
    reps = []
    for k in range(d):
        E = basis.unit(k).matrix
        L = linalg.mult_rep("left", E, basis)
        R = linalg.mult_rep("right", E, basis)
        reps.append((L, R))
    zero = linalg.zeros(d, d)
    blocks = []  # per unknown: (contribution to delta, contribution to tau)
    blocks += [(L, zero) for L, _ in reps]
    blocks += [(R, linalg.mat_scale(-1, L)) for L, R in reps]
    blocks += [(zero, R) for _, R in reps]
    M = []
    for part in (0, 1):
        for i in range(d):
            for j in range(d):
                # entry (i, j) of the map matrix
                M.append([blk[part][i][j] for blk in blocks])
    b = [delta.matrix[i][j] for i in range(d) for j in range(d)]
    b += [tau.matrix[i][j] for i in range(d) for j in range(d)]
    return linalg.solve_affine(M, b).feasible


def test_identity_map_pair():
    basis = basis_for((1, 2))
    delta, tau = OpMap.identity(basis), OpMap.zero(basis)
    rep = decide_Z(delta, tau)
    assert rep.verdict == "holds"
    assert gamma_from(delta, tau) == OpMap.identity(basis)


def test_zero_maps():
    basis = basis_for((2,))
    z = OpMap.zero(basis)
    assert decide_Z(z, z).verdict == "holds"
    assert gamma_from(z, z) == z


def test_one_sided_pair_refuted_on_two_by_two_triangular():
    basis = basis_for((1, 2))
    X = basis.matrix_unit(1, 2)
    rep = decide_Z(right_mult(X), left_mult(X))
    assert rep.verdict == "refuted"
    A, B = rep.counter_witness.pair
    assert (A, B) == (basis.matrix_unit(1, 1), basis.matrix_unit(2, 2))
    assert rep.infeasibility["augmented_rank"] == rep.infeasibility["rank"] + 1
    # the mirrored form lies in the family: R = X, T = X, S = 0 gives (L_X, R_X)
    assert decide_Z(left_mult(X), right_mult(X)).verdict == "holds"


def test_check_Z_rejects_nonzero_product():
    basis = basis_for((1, 2))
    I = basis.identity()
    with pytest.raises(InputError):
        check_Z(OpMap.zero(basis), OpMap.zero(basis), [WitnessPair(I, I)])


def test_gamma_from_gate():
    basis = basis_for((1, 2))
    rng = SplitMix64(3)
    with pytest.raises(ConsistencyError) as exc:
        gamma_from(random_map(basis, rng), random_map(basis, rng))
    assert exc.value.unit is not None


@pytest.mark.parametrize("field", [RATIONAL, GAUSSIAN])
@pytest.mark.parametrize("dims", SMALL_NESTS)
def test_round_trip(dims, field):
    basis = basis_for(dims)
    rng = SplitMix64(17)
    for _ in range(5):
        delta, tau, (R, S, T) = family(basis, rng, field)
        sol = solve_RST(delta, tau)
        assert sol.feasible
        gamma = gamma_from(delta, tau)
        assert gamma == left_mult(R) + right_mult(T)
        triple = TernaryTriple(gamma, delta, tau)
        assert verify_ternary(triple) is None
        inner = extract_inner(triple)
        assert inner.delta() == delta and inner.tau() == tau and inner.gamma() == gamma
        assert step_identities(delta, tau).ok
        assert uniqueness_check(delta, tau, sol.triple().gamma(), gamma) == "equal"
        # the solution set is exactly the center shift (R - c, S + c, T + c)
        assert sol.homogeneous_dim == len(center(basis)) == 1
        for h in sol.homogeneous_triples():
            assert h.delta() == OpMap.zero(basis) and h.tau() == OpMap.zero(basis)
            assert h.R == -h.S and h.T == h.S and app_is_central(h.S)


def test_inner_ternary_round_trip():
    basis = basis_for((1, 2, 4))
    rng = SplitMix64(5)
    for _ in range(5):
        a, b, c = (basis.random_element(rng) for _ in range(3))
        triple = inner_ternary(a, b, c)
        assert verify_ternary(triple) is None
        out = extract_inner(triple)
        assert out.delta() == triple.delta and out.tau() == triple.tau and out.gamma() == triple.gamma


def test_verify_ternary_reports_failure():
    basis = basis_for((1, 2))
    rng = SplitMix64(6)
    delta, tau, _ = family(basis, rng)
    gamma = gamma_from(delta, tau)
    bad = verify_ternary(TernaryTriple(gamma + OpMap.identity(basis), delta, tau))
    assert bad is not None and not linalg.is_zero(bad.residual)


def test_extract_inner_raises_on_non_ternary():
    basis = basis_for((1, 2))
    rng = SplitMix64(2)
    m = random_map(basis, rng)
    with pytest.raises(TheoremViolation):
        extract_inner(TernaryTriple(m, m, m))


def test_uniqueness_rejects_non_completion():
    basis = basis_for((1, 2))
    delta, tau, _ = family(basis, SplitMix64(1))
    gamma = gamma_from(delta, tau)
    with pytest.raises(InputError):
        uniqueness_check(delta, tau, gamma, gamma + OpMap.identity(basis))


def test_step_identities_detect_bad_pair():
    basis = basis_for((1, 3))
    rng = SplitMix64(9)
    rep = step_identities(random_map(basis, rng), random_map(basis, rng))
    assert not rep.ok and rep.failures
    with pytest.raises(TheoremViolation):
        step_identities(random_map(basis, rng), random_map(basis, rng), strict=True)


def test_opmap_json_round_trip():
    basis = basis_for((1, 3))
    m = random_map(basis, SplitMix64(1), GAUSSIAN)
    assert OpMap.from_json(m.to_json(), GAUSSIAN) == m
    with pytest.raises(InputError):
        OpMap(basis, [[0]])


def test_witness_budget_reported():
    basis = basis_for((1, 2))
    X = basis.matrix_unit(1, 2)
    w, checked = find_counter_witness(right_mult(X), left_mult(X), budget=0)
    assert w is None and checked == 0
    rep = decide_Z(right_mult(X), left_mult(X), budget=0)
    assert rep.verdict == "inconclusive" and rep.pairs_checked == 0


def _agreement_trial(basis, seed, t):
    rng = trial_rng(seed, t)
    field = GAUSSIAN if rng.chance(1, 4) else RATIONAL
    kind = rng.below(3)
    delta, tau, _ = family(basis, rng, field)
    if kind == 1:
        i, j = rng.below(basis.d), rng.below(basis.d)
        m = [list(r) for r in delta.matrix]
        m[i][j] = m[i][j] + 1
        delta = OpMap(basis, m)
    elif kind == 2:
        delta, tau = random_map(basis, rng, field), random_map(basis, rng, field)
    rep = decide_Z(delta, tau, seed=t, field=field)
    oracle = dense_rst_feasible(delta, tau)
    assert (rep.verdict == "holds") == oracle, t
    if rep.verdict == "holds":
        assert rep.certificate.delta() == delta and rep.certificate.tau() == tau
        assert check_Z(delta, tau, sample_zero_product_pairs(basis, 8, seed=t, field=field)) is None
    else:
        assert rep.verdict == "refuted", t
        A, B = rep.counter_witness.pair
        assert linalg.is_zero(linalg.mat_mul(A.matrix, B.matrix))
        value = linalg.mat_add(linalg.mat_mul(delta(A).matrix, B.matrix), linalg.mat_mul(A.matrix, tau(B).matrix))
        assert not linalg.is_zero(value)
    return rep.verdict


def test_solver_and_witness_search_agree_on_ten_thousand_trials():
    """Solver feasibility agrees with a dense oracle, and every refusal is
    backed by an exact witness, on 10^4 seeded pairs over small nests."""
    counts = {}
    bases = [build(NestSpec(d)) for d in SMALL_NESTS]
    for t in range(10_000):
        v = _agreement_trial(bases[t % len(bases)], 2024, t)
        counts[v] = counts.get(v, 0) + 1
    assert counts.get("holds", 0) > 3000 and counts.get("refuted", 0) > 3000

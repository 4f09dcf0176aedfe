"""Acceptance criteria 1-7, each checked exactly (zero tolerance).

Run under pytest (a summary block lists one PASS/FAIL line per criterion) or
directly with ``python3 tests/test_acceptance.py``.
"""
import time

import pytest

from conftest import ACCEPTANCE_LINES, ACCEPTANCE_NESTS
from kernel_props import run_instance
from nestder import applications as app
from nestder import counterexample as cx
from nestder import linalg
from nestder.campaign import COROLLARIES, CampaignConfig, cmd_corollaries, cmd_verify, random_map
from nestder.engine import (OpMap, decide_Z, extract_inner, inner_ternary, left_mult, right_mult,
                            verify_ternary)
from nestder.nest import AlgElement, NestSpec, build, center
from nestder.rng import SplitMix64, trial_rng
from nestder.scalars import FIELDS, RATIONAL, random_scalar

ROUND_TRIP_TRIALS = 200
REFUTATION_TRIALS = 200
INNER_TRIALS = 100
COROLLARY_TRIALS = 100
KERNEL_INSTANCES = 10_000


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture(scope="module")
def round_trips():
    """Criterion 1 campaigns, shared with criterion 3."""
    out = {}
    started = time.perf_counter()
    for dims in ACCEPTANCE_NESTS:
        for field in FIELDS:
            cfg = CampaignConfig(NestSpec(dims), field, ROUND_TRIP_TRIALS, seed=20240601)
            out[(dims, field)] = cmd_verify(cfg)
    return out, time.perf_counter() - started


def test_criterion_1_round_trip(round_trips):
    reports, elapsed = round_trips
    total = passed = 0
    for rep in reports.values():
        total += rep["body"]["config"]["trials"]
        c = rep["body"]["counts"]
        passed += min(c["feasible_round_trips"], c["steps_passed"])
    ok = passed == total == len(ACCEPTANCE_NESTS) * 2 * ROUND_TRIP_TRIALS
    report(1, ok, f"{passed}/{total} round trips (solve, gamma, ternary check, extraction, steps, uniqueness) "
                  f"in {elapsed:.0f}s")
    assert ok


def _bumped(op, rng, field):
    m = [list(r) for r in op.matrix]
    i, j = rng.below(op.basis.d), rng.below(op.basis.d)
    c = random_scalar(rng, field)
    while not c:
        c = random_scalar(rng, field)
    m[i][j] = m[i][j] + c
    return OpMap(op.basis, m)


def _refutation_trial(basis, seed, t, field):
    """A map pair outside the construction: a family member with one entry
    bumped (in delta or tau), or two random maps."""
    rng = trial_rng(seed, t)
    R, S, T = (basis.random_element(rng, field) for _ in range(3))
    delta, tau = left_mult(R) + right_mult(S), right_mult(T) - left_mult(S)
    kind = rng.below(3)
    if kind == 0:
        delta = _bumped(delta, rng, field)
    elif kind == 1:
        tau = _bumped(tau, rng, field)
    else:
        delta, tau = random_map(basis, rng, field), random_map(basis, rng, field)
    rep = decide_Z(delta, tau, seed=t, field=field)
    if rep.verdict == "holds":
        # landed inside the zero-product space after all; the certificate must reproduce it
        assert rep.certificate.delta() == delta and rep.certificate.tau() == tau
    elif rep.verdict == "refuted":
        A, B = rep.counter_witness.pair
        assert linalg.is_zero(linalg.mat_mul(A.matrix, B.matrix))
        value = linalg.mat_add(linalg.mat_mul(delta(A).matrix, B.matrix), linalg.mat_mul(A.matrix, tau(B).matrix))
        assert not linalg.is_zero(value)
    return rep.verdict


def test_criterion_2_refutation():
    tallies = {}
    for dims in ACCEPTANCE_NESTS:
        basis = build(NestSpec(dims))
        for field in FIELDS:
            for t in range(REFUTATION_TRIALS):
                v = _refutation_trial(basis, 777, t, field)
                key = (dims, field)
                tallies.setdefault(key, {"holds": 0, "refuted": 0, "inconclusive": 0})[v] += 1
    worst = min(
        (c["refuted"] / (c["refuted"] + c["inconclusive"]), k)
        for k, c in tallies.items() if c["refuted"] + c["inconclusive"]
    )
    infeasible = sum(c["refuted"] + c["inconclusive"] for c in tallies.values())
    refuted = sum(c["refuted"] for c in tallies.values())
    inside = sum(c["holds"] for c in tallies.values())
    ok = worst[0] >= 0.99
    report(2, ok, f"{refuted}/{infeasible} infeasible pairs witnessed, worst nest/field {worst[0]:.3f} "
                  f"{worst[1]}; {inside} perturbed pairs were still in the zero-product space (certified)")
    assert ok


def test_criterion_3_inner(round_trips):
    reports, _ = round_trips
    bad = 0
    for dims in ACCEPTANCE_NESTS:
        basis = build(NestSpec(dims))
        rng = SplitMix64(31337)
        for _ in range(INNER_TRIALS):
            a, b, c = (basis.random_element(rng) for _ in range(3))
            triple = inner_ternary(a, b, c)
            out = extract_inner(triple)
            same = (out.delta() == triple.delta and out.tau() == triple.tau and out.gamma() == triple.gamma
                    and verify_ternary(triple) is None)
            bad += not same
    # implementing triples from criterion 1: R + T must equal delta(I) + tau(I) = R0 + T0
    checked = mismatched = 0
    for (dims, field), rep in reports.items():
        basis = build(NestSpec(dims))
        seed = rep["body"]["config"]["seed"]
        for rec in rep["body"]["trials"]:
            rng = trial_rng(seed, rec["trial"])
            R0, S0, T0 = (basis.random_element(rng, field) for _ in range(3))
            cert = rec["certificate"]
            R = AlgElement.from_json(cert["R"], field)
            T = AlgElement.from_json(cert["T"], field)
            checked += 1
            mismatched += R + T != R0 + T0
    ok = bad == 0 and mismatched == 0 and checked == len(reports) * ROUND_TRIP_TRIALS
    report(3, ok, f"{len(ACCEPTANCE_NESTS) * INNER_TRIALS - bad}/{len(ACCEPTANCE_NESTS) * INNER_TRIALS} "
                  f"inner triples reproduced; R+T = delta(I)+tau(I) on {checked - mismatched}/{checked}")
    assert ok


def test_criterion_4_counterexample():
    started = time.perf_counter()
    no_gamma = cx.show_no_gamma()
    z = cx.verify_example_Z()
    contrast = cx.nest_contrast()
    elapsed = time.perf_counter() - started
    again = (cx.show_no_gamma(), cx.verify_example_Z(), cx.nest_contrast())
    forced = (no_gamma["gamma_U_forced_by_(I,U)"], no_gamma["gamma_U_forced_by_(U,I)"])
    mirrored = contrast["mirrored_case"]
    ok = (
        no_gamma["rank_gap"] >= 1
        and no_gamma["augmented_rank"] == no_gamma["rank"] + 1
        and forced == ({}, {"V": "2"})
        and z["verdict"] == "holds"
        and mirrored["solve_RST_feasible"] and mirrored["gamma_verified"]
        and contrast["solver_and_witness_agree"]
        and again == (no_gamma, z, contrast)
        and elapsed < 1.0
    )
    report(4, ok, f"rank {no_gamma['rank']} vs augmented {no_gamma['augmented_rank']}, gamma(U) forced to 0 and 2V, "
                  f"zero-product condition holds, nest [1,2] contrast feasible, {elapsed * 1000:.0f}ms")
    assert ok


def test_criterion_5_derivation_structure():
    rows = []
    ok = True
    for dims in ACCEPTANCE_NESTS:
        basis = build(NestSpec(dims))
        der = app.derivation_space(basis)
        z = center(basis)
        good = len(der) == basis.d - len(z) and len(z) == 1
        # each basis derivation satisfies the derivation identity and kills I
        for D in der:
            good = good and app.generalized_identity_failure(OpMap(basis, D)) is None
            good = good and linalg.is_zero(OpMap(basis, D).at_identity)
        ok = ok and good
        rows.append(f"{list(dims)}:{len(der)}+{len(z)}={basis.d}")
    report(5, ok, "dim Der + dim center = d with center 1-dimensional: " + " ".join(rows))
    assert ok


def test_criterion_6_corollaries():
    mis = 0
    per = {}
    for dims in ACCEPTANCE_NESTS:
        cfg = CampaignConfig(NestSpec(dims), RATIONAL, COROLLARY_TRIALS, seed=4242, checks=("corollaries",))
        rep = cmd_corollaries(cfg)
        for name, s in rep["body"]["summary"].items():
            mis += s["misclassified"]
            acc = per.setdefault(name, [0, 0, 0])
            acc[0] += s["positives_certified"]
            acc[1] += s["negatives_refuted"]
            acc[2] += s["negatives_inconclusive"]
    ok = mis == 0 and set(per) == set(COROLLARIES)
    n = len(ACCEPTANCE_NESTS) * COROLLARY_TRIALS
    inconclusive = sum(v[2] for v in per.values())
    report(6, ok, f"{len(per)} checkers x {n} positives and {n} negatives, {mis} misclassified "
                  f"({inconclusive} negatives inconclusive with budget reported)")
    assert ok


def test_criterion_7_kernel():
    failures = []
    largest = 0
    for i in range(KERNEL_INSTANCES):
        _, size, failure = run_instance(8675309, i)
        largest = max(largest, size)
        if failure:
            failures.append((i, failure))
    ok = not failures and largest == 64
    report(7, ok, f"{KERNEL_INSTANCES - len(failures)}/{KERNEL_INSTANCES} kernel instances "
                  f"(rref idempotence, rank-nullity, solve soundness, representation laws), largest {largest}")
    assert ok, failures[:5]


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))

"""Seeded verification campaigns behind the ``verify``, ``corollaries`` and
``counterexample`` commands.

Draw order for a ``verify`` trial (generator ``trial_rng(seed, trial)``):

1. ``R0``, ``S0``, ``T0``: full random elements, coordinates in basis order.
2. the malformed pair: a kind draw (bump / random), then either one entry
   bump of ``delta`` (row, column, nonzero scalar) or two random dense maps.
3. the witness-search seed for the malformed pair: one ``next_u64``.

Reports are split into ``body`` (deterministic, hashed) and ``timing``.
"""
from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

from . import applications as app
from . import counterexample as cx
from . import linalg
from .engine import (
    OpMap,
    TernaryTriple,
    decide_Z,
    extract_inner,
    gamma_from,
    left_mult,
    right_mult,
    solve_RST,
    step_identities,
    uniqueness_check,
    verify_ternary,
)
from .errors import InputError, TheoremViolation
from .nest import AlgBasis, NestSpec, build
from .rng import trial_rng
from .scalars import FIELDS, RATIONAL, format_scalar, random_scalar

VERIFY_CHECKS = ("theorem", "steps")
ALL_CHECKS = ("theorem", "steps", "corollaries", "counterexample")
COROLLARIES = (
    "right_centralizer",
    "left_centralizer",
    "two_sided_centralizer",
    "derivation_at_zero",
    "generalized_derivation",
    "local_derivation",
    "local_right_centralizer",
    "local_left_centralizer",
    "right_ideal_preserving",
    "left_ideal_preserving",
)


@dataclass(frozen=True)
class CampaignConfig:
    nest: NestSpec
    field: str = RATIONAL
    trials: int = 1
    seed: int = 0
    checks: tuple = VERIFY_CHECKS

    def __post_init__(self):
        if self.field not in FIELDS:
            raise InputError(f"field must be one of {FIELDS}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise InputError("trials must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must fit in 64 bits")
        if not self.checks:
            raise InputError("checks list is empty")

    def to_json(self) -> dict:
        return {
            "nest": list(self.nest.dims),
            "field": self.field,
            "trials": self.trials,
            "seed": self.seed,
            "checks": list(self.checks),
        }


def finalize(body: dict, started: float) -> dict:
    text = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return {
        "body": body,
        "body_sha256": hashlib.sha256(text.encode()).hexdigest(),
        "timing": {"seconds": round(time.perf_counter() - started, 3)},
    }


def _run(fn, indices, workers):
    if workers <= 1:
        return [fn(i) for i in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, indices, chunksize=max(1, len(indices) // (4 * workers))))


# verify -------------------------------------------------------------------------


def random_map(basis: AlgBasis, rng, field) -> OpMap:
    return OpMap(basis, [[random_scalar(rng, field) for _ in range(basis.d)] for _ in range(basis.d)])


def bump(op: OpMap, rng, field) -> OpMap:
    """Add a nonzero scalar to one entry of the map matrix."""
    d = op.basis.d
    i, j = rng.below(d), rng.below(d)
    c = random_scalar(rng, field)
    while not c:
        c = random_scalar(rng, field)
    m = [list(row) for row in op.matrix]
    m[i][j] = m[i][j] + c
    return OpMap(op.basis, m)


def implemented_pair(basis, R, S, T):
    return left_mult(R) + right_mult(S), right_mult(T) - left_mult(S)


def verify_trial(cfg: CampaignConfig, trial: int) -> dict:
    basis = build(cfg.nest)
    rng = trial_rng(cfg.seed, trial)
    R0, S0, T0 = (basis.random_element(rng, cfg.field) for _ in range(3))
    delta, tau = implemented_pair(basis, R0, S0, T0)
    record = {"trial": trial}

    def violation(msg, **extra):
        return TheoremViolation(msg, {
            "config": cfg.to_json(), "trial": trial,
            "delta": delta.to_json(), "tau": tau.to_json(), **extra,
        })

    if "theorem" in cfg.checks:
        sol = solve_RST(delta, tau)
        if not sol.feasible:
            raise violation("solve_RST infeasible for an implemented pair")
        gamma = gamma_from(delta, tau)
        triple = TernaryTriple(gamma, delta, tau)
        bad = verify_ternary(triple)
        if bad is not None:
            raise violation(f"gamma fails the ternary identity at {bad.labels}")
        inner = extract_inner(triple)
        rst_gamma = sol.triple().gamma()
        uniqueness_check(delta, tau, rst_gamma, gamma)
        record["feasible"] = True
        record["certificate"] = inner.to_json()
        record["homogeneous_dim"] = sol.homogeneous_dim
    if "steps" in cfg.checks:
        rep = step_identities(delta, tau, strict=True)
        record["steps"] = rep.ok

    if "theorem" in cfg.checks:
        if rng.chance(1, 2):
            bad_delta, bad_tau = bump(delta, rng, cfg.field), tau
            kind = "bump"
        else:
            bad_delta, bad_tau = random_map(basis, rng, cfg.field), random_map(basis, rng, cfg.field)
            kind = "random"
        zrep = decide_Z(bad_delta, bad_tau, seed=rng.next_u64(), field=cfg.field)
        malformed = {"kind": kind, "verdict": zrep.verdict}
        if zrep.verdict == "refuted":
            w = zrep.counter_witness
            malformed["witness"] = {"A": w.pair.A.to_json()["coords"], "B": w.pair.B.to_json()["coords"]}
            malformed["infeasibility"] = zrep.infeasibility
        elif zrep.verdict == "holds":
            malformed["certificate"] = zrep.certificate.to_json()
        record["malformed"] = malformed
    return record


def cmd_verify(cfg: CampaignConfig, workers: int = 1) -> dict:
    unknown = set(cfg.checks) - set(VERIFY_CHECKS)
    if unknown:
        raise InputError(f"verify does not run checks {sorted(unknown)}")
    started = time.perf_counter()
    records = _run(partial(verify_trial, cfg), list(range(cfg.trials)), workers)
    counts = {"feasible_round_trips": 0, "steps_passed": 0, "malformed_refuted": 0,
              "malformed_inconclusive": 0, "malformed_feasible": 0}
    for r in records:
        counts["feasible_round_trips"] += bool(r.get("feasible"))
        counts["steps_passed"] += bool(r.get("steps"))
        m = r.get("malformed")
        if m:
            key = {"refuted": "malformed_refuted", "inconclusive": "malformed_inconclusive",
                   "holds": "malformed_feasible"}[m["verdict"]]
            counts[key] += 1
    ok = (
        ("theorem" not in cfg.checks or counts["feasible_round_trips"] == cfg.trials)
        and ("steps" not in cfg.checks or counts["steps_passed"] == cfg.trials)
    )
    body = {"command": "verify", "config": cfg.to_json(), "counts": counts, "ok": ok, "trials": records}
    return finalize(body, started)


# corollaries ----------------------------------------------------------------------


def _pairs_hold(basis, f) -> bool:
    return all(f(i, p, q, j, r, s) for i, (p, q) in enumerate(basis.positions)
               for j, (r, s) in enumerate(basis.positions))


def is_right_centralizer(rho: OpMap) -> bool:
    """``rho(E_i E_j) == E_i rho(E_j)`` on all unit pairs (definition, no solve)."""
    b = rho.basis
    z = linalg.zeros(b.n, b.n)
    return _pairs_hold(b, lambda i, p, q, j, r, s: (rho.images[b.index[(p, s)]] if q == r else z)
                       == linalg.unit_left(p, q, rho.images[j]))


def is_left_centralizer(rho: OpMap) -> bool:
    b = rho.basis
    z = linalg.zeros(b.n, b.n)
    return _pairs_hold(b, lambda i, p, q, j, r, s: (rho.images[b.index[(p, s)]] if q == r else z)
                       == linalg.unit_right(rho.images[i], r, s))


def is_derivation(delta: OpMap) -> bool:
    return linalg.is_zero(delta.at_identity) and app.generalized_identity_failure(delta) is None


def is_derivation_plus_scalar(delta: OpMap) -> bool:
    b = delta.basis
    dI = b.from_matrix(delta.at_identity)
    lam = dI.coords[b.diag_slots[0]]
    if dI != lam * b.identity():
        return False
    return is_derivation(delta - lam * OpMap.identity(b))


def _noncentral(basis, rng, field):
    while True:
        D = basis.random_element(rng, field)
        if not app.is_central(D):
            return D


def _negative(pos: OpMap, rng, field, in_family) -> OpMap:
    """Bump or random map, redrawn until the definitional oracle rejects it."""
    while True:
        cand = bump(pos, rng, field) if rng.chance(1, 2) else random_map(pos.basis, rng, field)
        if not in_family(cand):
            return cand


def corollary_cases(name: str, basis: AlgBasis, rng, field):
    """One constructed positive and one negative map for corollary ``name``."""
    el = lambda: basis.random_element(rng, field)  # noqa: E731
    if name in ("right_centralizer", "local_right_centralizer", "right_ideal_preserving"):
        pos = right_mult(el())
        neg = left_mult(_noncentral(basis, rng, field)) if rng.chance(1, 3) else _negative(pos, rng, field, is_right_centralizer)
        if is_right_centralizer(neg):
            neg = _negative(pos, rng, field, is_right_centralizer)
    elif name in ("left_centralizer", "local_left_centralizer", "left_ideal_preserving"):
        pos = left_mult(el())
        neg = right_mult(_noncentral(basis, rng, field)) if rng.chance(1, 3) else _negative(pos, rng, field, is_left_centralizer)
        if is_left_centralizer(neg):
            neg = _negative(pos, rng, field, is_left_centralizer)
    elif name == "two_sided_centralizer":
        lam = random_scalar(rng, field)
        pos = lam * OpMap.identity(basis)
        both = lambda m: is_right_centralizer(m) and is_left_centralizer(m)  # noqa: E731
        neg = right_mult(_noncentral(basis, rng, field)) if rng.chance(1, 2) else _negative(pos, rng, field, both)
    elif name == "derivation_at_zero":
        S = el()
        lam = random_scalar(rng, field)
        pos = right_mult(S) - left_mult(S) + lam * OpMap.identity(basis)
        neg = left_mult(_noncentral(basis, rng, field)) if rng.chance(1, 3) else _negative(pos, rng, field, is_derivation_plus_scalar)
    elif name == "generalized_derivation":
        pos = left_mult(el()) + right_mult(el())
        neg = _negative(pos, rng, field, lambda m: app.generalized_identity_failure(m) is None)
    elif name == "local_derivation":
        S = el()
        pos = right_mult(S) - left_mult(S)
        if rng.chance(1, 2):
            R, T = el(), el()
            while not (R + T):
                T = el()
            neg = left_mult(R) + right_mult(T)
        else:
            neg = _negative(pos, rng, field, is_derivation)
    else:
        raise InputError(f"unknown corollary {name!r}")
    return pos, neg


def run_corollary(name: str, op: OpMap, seed: int, field, samples: int = 15) -> app.Verdict:
    if name == "right_centralizer":
        return app.right_centralizer_check(op, seed=seed, field=field)
    if name == "left_centralizer":
        return app.left_centralizer_check(op, seed=seed, field=field)
    if name == "two_sided_centralizer":
        return app.two_sided_check(op, seed=seed, field=field)
    if name == "derivation_at_zero":
        return app.derivation_at_zero_check(op, seed=seed, field=field)
    if name == "generalized_derivation":
        return app.gd_zero_product_check(op, samples=3 * samples, seed=seed, field=field)
    if name == "local_derivation":
        return app.local_derivation_check(op, samples=samples, seed=seed, field=field)
    if name == "local_right_centralizer":
        return app.local_centralizer_check(op, app.RIGHT, samples=samples, seed=seed, field=field)
    if name == "local_left_centralizer":
        return app.local_centralizer_check(op, app.LEFT, samples=samples, seed=seed, field=field)
    if name == "right_ideal_preserving":
        return app.ideal_preserving_check(op, app.RIGHT, samples=samples, seed=seed, field=field)
    if name == "left_ideal_preserving":
        return app.ideal_preserving_check(op, app.LEFT, samples=samples, seed=seed, field=field)
    raise InputError(f"unknown corollary {name!r}")


def corollary_trial(cfg: CampaignConfig, trial: int) -> dict:
    """Per corollary (in ``cfg.checks`` order): build the cases, then run positive, negative.

    The checker seed is shared across trials so cached locality data is reused.
    """
    basis = build(cfg.nest)
    rng = trial_rng(cfg.seed, trial)
    out = {"trial": trial, "results": {}}
    for name in corollary_names(cfg.checks):
        pos, neg = corollary_cases(name, basis, rng, cfg.field)
        vp = run_corollary(name, pos, cfg.seed, cfg.field)
        vn = run_corollary(name, neg, cfg.seed, cfg.field)
        out["results"][name] = {
            "positive": vp.verdict,
            "negative": vn.verdict,
            "negative_witness": vn.witness,
            "misclassified": (vp.verdict != "certified") + (vn.verdict == "certified"),
        }
    return out


def corollary_names(checks) -> tuple:
    """``corollaries`` in ``checks`` selects every checker; otherwise names are taken as given."""
    return COROLLARIES if "corollaries" in checks else tuple(checks)


def cmd_corollaries(cfg: CampaignConfig, workers: int = 1) -> dict:
    names = corollary_names(cfg.checks)
    unknown = [c for c in names if c not in COROLLARIES]
    if unknown:
        raise InputError(f"unknown corollaries {unknown}; choose from {list(COROLLARIES)}")
    started = time.perf_counter()
    records = _run(partial(corollary_trial, cfg), list(range(cfg.trials)), workers)
    summary = {}
    for name in names:
        s = {"positives_certified": 0, "negatives_refuted": 0, "negatives_inconclusive": 0, "misclassified": 0}
        for r in records:
            res = r["results"][name]
            s["positives_certified"] += res["positive"] == "certified"
            s["negatives_refuted"] += res["negative"] == "refuted"
            s["negatives_inconclusive"] += res["negative"] == "inconclusive"
            s["misclassified"] += res["misclassified"]
        summary[name] = s
    ok = all(s["misclassified"] == 0 for s in summary.values())
    body = {"command": "corollaries", "config": cfg.to_json(), "summary": summary, "ok": ok, "trials": records}
    return finalize(body, started)


# counterexample -----------------------------------------------------------------------


def cmd_counterexample() -> dict:
    started = time.perf_counter()
    alg = cx.build_example_algebra()
    delta, tau = cx.example_maps()
    fmt_vec = lambda v: [format_scalar(x) for x in v]  # noqa: E731
    structure = {
        f"{alg.labels[i]}*{alg.labels[j]}": fmt_vec(alg.table[(i, j)])
        for i in range(alg.dim) for j in range(alg.dim)
    }
    no_gamma = cx.show_no_gamma()
    z = cx.verify_example_Z()
    contrast = cx.nest_contrast()
    body = {
        "command": "counterexample",
        "basis": list(alg.labels),
        "structure_constants": structure,
        "delta": [fmt_vec(r) for r in delta],
        "tau": [fmt_vec(r) for r in tau],
        "zero_product_check": z,
        "infeasibility_certificate": no_gamma,
        "census": cx.algebra_census(),
        "nest_contrast": contrast,
        "ok": no_gamma["rank_gap"] >= 1 and z["verdict"] == "holds" and contrast["solver_and_witness_agree"],
    }
    return finalize(body, started)


def solve_report(delta: OpMap, tau: OpMap, seed: int = 0, field=RATIONAL) -> dict:
    started = time.perf_counter()
    rep = decide_Z(delta, tau, seed=seed, field=field)
    body = {"command": "solve", "nest": list(delta.basis.spec.dims), "report": rep.to_json()}
    if rep.verdict == "holds":
        body["gamma"] = gamma_from(delta, tau).to_json()
    return finalize(body, started)

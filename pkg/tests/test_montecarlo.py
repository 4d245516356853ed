"""Monte Carlo machinery tests.

Classification is checked against hand-prepared tableau states, single
faults against hand-derived recovery timelines, the fast Pauli-frame
engine against the reference tableau engine trial-for-trial, and the
skip-ahead sampler against full per-cycle simulation distributionally.
"""

from itertools import product

import numpy as np
import pytest
from scipy import stats

from mfqec.circuits import Variant, enumerate_error_sites
from mfqec.codes import BIT_FLIP_CODE, SURFACE17_CODE, UNENCODED
from mfqec.errors import ErrorChannel
from mfqec.montecarlo import (
    AllCensored,
    Classification,
    FaultOutcome,
    RateEstimate,
    TrialConfig,
    TrialResult,
    aggregate_rate_estimate,
    circuit_for,
    classify_state,
    estimate_logical_error_rate,
    make_engine,
    prepare_logical_zero,
    run_single_fault,
    run_trial,
    trial_seed,
)
from mfqec.pauli import PauliOperator


def _pauli(n, xs=(), zs=()):
    x = np.zeros(n, np.uint8)
    z = np.zeros(n, np.uint8)
    x[list(xs)] = 1
    z[list(zs)] = 1
    return PauliOperator(x, z)


LETTERS = ("I", "X", "Y", "Z")


def _all_paulis(site):
    if site.channel is ErrorChannel.INIT:
        return [("X",)]
    combos = []
    for combo in product(LETTERS, repeat=len(site.qubits)):
        if set(combo) != {"I"}:
            combos.append(combo)
    return combos


# ---------------------------------------------------------------------------
# configuration validation
# ---------------------------------------------------------------------------


def test_trial_config_validation():
    ok = TrialConfig(BIT_FLIP_CODE, Variant.SIMPLIFIED, 0.1, seed=1)
    assert ok.max_cycles == 10_000_000
    with pytest.raises(ValueError, match="p must be"):
        TrialConfig(BIT_FLIP_CODE, Variant.SIMPLIFIED, -0.1, seed=1)
    with pytest.raises(ValueError, match="p must be"):
        TrialConfig(BIT_FLIP_CODE, Variant.SIMPLIFIED, 1.0, seed=1)
    with pytest.raises(ValueError, match="max_cycles"):
        TrialConfig(BIT_FLIP_CODE, Variant.SIMPLIFIED, 0.1, seed=1, max_cycles=0)


def test_noiseless_trial_is_censored():
    cfg = TrialConfig(BIT_FLIP_CODE, Variant.SIMPLIFIED, 0.0, seed=7, max_cycles=50)
    assert run_trial(cfg) == TrialResult(50, True)


def test_run_trial_rejects_unknown_method():
    cfg = TrialConfig(BIT_FLIP_CODE, Variant.SIMPLIFIED, 0.1, seed=1)
    with pytest.raises(ValueError, match="skip.*full"):
        run_trial(cfg, method="bogus")


def test_make_engine():
    circ = circuit_for("bf", Variant.SIMPLIFIED)
    tab = make_engine(circ, "tableau")
    frame = make_engine(circ, "frame")
    assert tab.name == "tableau"
    assert frame.name == "frame"
    assert make_engine(circ, frame) is frame  # instances pass through
    with pytest.raises(ValueError, match="unknown engine"):
        make_engine(circ, "statevector")


# ---------------------------------------------------------------------------
# state classification
# ---------------------------------------------------------------------------


def test_classify_fresh_state_is_clean():
    for name, variant in [
        ("bf", Variant.SIMPLIFIED),
        ("bf", Variant.PERFECT),
        ("surface17", Variant.SIMPLIFIED),
        ("surface17", Variant.PERFECT),
        ("unencoded", Variant.NONE),
    ]:
        circ = circuit_for(name, variant)
        tab = prepare_logical_zero(circ)
        assert classify_state(tab, circ.code) is Classification.CLEAN_ZERO


def test_classify_bf_cases():
    circ = circuit_for("bf", Variant.SIMPLIFIED)
    n = circ.n_qubits

    tab = prepare_logical_zero(circ)
    tab.apply_pauli(_pauli(n, xs=(0, 1, 2)))  # logical X
    assert classify_state(tab, circ.code) is Classification.LOGICAL_FLIP

    tab = prepare_logical_zero(circ)
    tab.apply_pauli(_pauli(n, xs=(0,)))  # one data flip
    assert classify_state(tab, circ.code) is Classification.RESIDUAL

    tab = prepare_logical_zero(circ)
    tab.apply_pauli(_pauli(n, xs=(1,), zs=(1,)))  # Y on data
    assert classify_state(tab, circ.code) is Classification.RESIDUAL

    tab = prepare_logical_zero(circ)
    tab.apply_pauli(_pauli(n, xs=(3,)))  # flipped ancilla
    assert classify_state(tab, circ.code) is Classification.RESIDUAL

    tab = prepare_logical_zero(circ)
    tab.apply_pauli(_pauli(n, zs=(0, 1)))  # a Z-stabilizer: invisible
    assert classify_state(tab, circ.code) is Classification.CLEAN_ZERO


def test_classify_surface17_cases():
    circ = circuit_for("surface17", Variant.SIMPLIFIED)
    n = circ.n_qubits
    code = circ.code

    tab = prepare_logical_zero(circ)
    tab.apply_pauli(_pauli(n, xs=code.logical_x))
    assert classify_state(tab, code) is Classification.LOGICAL_FLIP

    tab = prepare_logical_zero(circ)
    tab.apply_pauli(_pauli(n, xs=(0,)))
    assert classify_state(tab, code) is Classification.RESIDUAL

    tab = prepare_logical_zero(circ)
    tab.apply_pauli(_pauli(n, zs=(0,)))  # lone phase flip
    assert classify_state(tab, code) is Classification.RESIDUAL

    tab = prepare_logical_zero(circ)
    tab.apply_pauli(_pauli(n, xs=code.x_stabilizers[1]))  # a stabilizer
    assert classify_state(tab, code) is Classification.CLEAN_ZERO


def test_classify_unencoded_cases():
    circ = circuit_for("unencoded", Variant.NONE)
    tab = prepare_logical_zero(circ)
    tab.apply_pauli(_pauli(1, zs=(0,)))  # Z|0> = |0>
    assert classify_state(tab, UNENCODED) is Classification.CLEAN_ZERO
    tab.apply_pauli(_pauli(1, xs=(0,)))
    assert classify_state(tab, UNENCODED) is Classification.LOGICAL_FLIP


# ---------------------------------------------------------------------------
# single-fault behavior
# ---------------------------------------------------------------------------


def test_single_data_flip_recovery_timelines():
    """An X on data qubit 0 during step 1 needs two consecutive firings of
    the same stabilizer, so it is fixed in cycle 2; the ancilla banks then
    take until cycle 4 to drain in the simplified variant but only until
    cycle 3 with erasure, whose removal reset lands in cycle 3."""
    R, C = Classification.RESIDUAL, Classification.CLEAN_ZERO
    circ = circuit_for("bf", Variant.SIMPLIFIED)
    site = enumerate_error_sites(circ, "a")[0]
    assert site.qubits == (0,) and site.step == 1
    out = run_single_fault(circ, site, ("X",))
    assert out == FaultOutcome(False, 4, (R, R, R, C))

    circ = circuit_for("bf", Variant.PERFECT)
    site = enumerate_error_sites(circ, "a")[0]
    out = run_single_fault(circ, site, ("X",))
    assert out == FaultOutcome(False, 3, (R, R, C))


@pytest.mark.parametrize(
    "variant,expected_stuck",
    [(Variant.PERFECT, 0), (Variant.SIMPLIFIED, 16)],
)
def test_bf_exhaustive_single_faults(variant, expected_stuck):
    """No single fault may cause a logical flip.  Faults on the correction
    gates themselves can leave a self-sustaining syndrome/error cycle when
    syndromes are not erased; with erasure every fault drains."""
    circ = circuit_for("bf", variant)
    total = flips = 0
    stuck = []
    for which in ("a", "b"):
        for site in enumerate_error_sites(circ, which):
            for paulis in _all_paulis(site):
                out = run_single_fault(circ, site, paulis, selector=which)
                total += 1
                flips += out.flipped
                if not out.flipped and out.clean_after == 0:
                    stuck.append(site)
    assert flips == 0
    assert len(stuck) == expected_stuck
    assert total == (1402 if variant is Variant.PERFECT else 598)
    # every stuck fault sits on a correction gate
    assert all(s.channel is ErrorChannel.THREE_QUBIT for s in stuck)


def test_surface17_data_memory_faults_never_flip():
    for variant in (Variant.PERFECT, Variant.SIMPLIFIED):
        circ = circuit_for("surface17", variant)
        data_sites = [
            s
            for s in enumerate_error_sites(circ, "a")
            if s.step == 1 and s.qubits[0] < 9
        ]
        assert len(data_sites) == 9
        for site in data_sites:
            for paulis in (("X",), ("Y",), ("Z",)):
                out = run_single_fault(circ, site, paulis)
                assert not out.flipped
                assert out.clean_after > 0


def test_single_fault_stops_early_and_reports_trace():
    circ = circuit_for("bf", Variant.SIMPLIFIED)
    site = enumerate_error_sites(circ, "a")[0]
    out = run_single_fault(circ, site, ("Z",))  # Z on data is invisible
    assert out == FaultOutcome(False, 1, (Classification.CLEAN_ZERO,))

    # a stuck fault runs the full follow window: flipping both controls
    # and the target of the same-cycle correction re-arms the syndrome
    # pattern that fires it, cycle after cycle
    stuck_site = next(
        s
        for s in enumerate_error_sites(circ, "a")
        if s.channel is ErrorChannel.THREE_QUBIT and s.step == 4
    )
    out = run_single_fault(circ, stuck_site, ("X", "X", "X"), follow_cycles=6)
    assert out.clean_after == 0 and not out.flipped
    assert len(out.classifications) == 7
    assert all(c is Classification.RESIDUAL for c in out.classifications)


def test_single_fault_engines_agree():
    circ = circuit_for("bf", Variant.SIMPLIFIED)
    for which in ("a", "b"):
        for site in enumerate_error_sites(circ, which):
            for paulis in _all_paulis(site):
                ref = run_single_fault(circ, site, paulis, selector=which)
                fast = run_single_fault(
                    circ, site, paulis, selector=which, engine="frame"
                )
                assert ref == fast, (which, site, paulis)


# ---------------------------------------------------------------------------
# engine equivalence and sampling method equivalence
# ---------------------------------------------------------------------------

TRIAL_BUDGETS = [
    ("bf", Variant.SIMPLIFIED, 0.05),
    ("bf", Variant.PERFECT, 0.02),
    ("surface17", Variant.SIMPLIFIED, 0.003),
    ("surface17", Variant.PERFECT, 0.002),
]


@pytest.mark.parametrize("name,variant,p", TRIAL_BUDGETS)
def test_frame_engine_matches_tableau_per_trial(name, variant, p):
    """Both engines consume the same error stream, so every seeded trial
    must give the identical cycles-to-failure."""
    circ = circuit_for(name, variant)
    code = circ.code if name != "unencoded" else UNENCODED
    tab = make_engine(circ, "tableau")
    frame = make_engine(circ, "frame")
    for seed in range(10):
        cfg = TrialConfig(code, variant, p, seed=seed, max_cycles=20_000)
        assert run_trial(cfg, engine=tab) == run_trial(cfg, engine=frame)


def test_skip_and_full_methods_agree_in_distribution():
    circ = circuit_for("bf", Variant.SIMPLIFIED)
    frame = make_engine(circ, "frame")
    results = {"skip": [], "full": []}
    for method in results:
        for seed in range(400):
            cfg = TrialConfig(
                BIT_FLIP_CODE, Variant.SIMPLIFIED, 0.05,
                seed=trial_seed(1234, 0 if method == "skip" else 1, seed),
                max_cycles=100_000,
            )
            res = run_trial(cfg, engine=frame, method=method)
            assert not res.censored
            results[method].append(res.cycles_to_failure)
    ks = stats.ks_2samp(results["skip"], results["full"])
    assert ks.pvalue > 1e-3


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


def test_aggregate_basics():
    rng = np.random.default_rng(0)
    est = aggregate_rate_estimate([10, 20, 30, 40], 2, rng)
    assert est.mean_cycles == 25.0
    assert est.p_log == 1.0 / 25.0
    assert est.n_trials == 6
    assert est.n_failures == 4
    assert est.n_censored == 2
    assert est.failure_cycles == (10, 20, 30, 40)
    assert est.ci_low <= est.p_log <= est.ci_high
    assert isinstance(est.ci_low, float) and isinstance(est.ci_high, float)


def test_aggregate_degenerate_ci():
    rng = np.random.default_rng(0)
    est = aggregate_rate_estimate([17], 0, rng)
    assert est.ci_low == est.ci_high == est.p_log == 1.0 / 17.0
    est = aggregate_rate_estimate([8, 8, 8], 1, rng)
    assert est.ci_low == est.ci_high == est.p_log == 1.0 / 8.0


def test_aggregate_all_censored():
    with pytest.raises(AllCensored):
        aggregate_rate_estimate([], 5, np.random.default_rng(0))


def test_aggregate_bootstrap_is_seeded():
    a = aggregate_rate_estimate(list(range(10, 60)), 0, np.random.default_rng(4))
    b = aggregate_rate_estimate(list(range(10, 60)), 0, np.random.default_rng(4))
    assert a == b


# ---------------------------------------------------------------------------
# rate estimation end to end
# ---------------------------------------------------------------------------


def test_trial_seed_is_deterministic_and_spread():
    seeds = {trial_seed(42, 0, t) for t in range(100)}
    assert len(seeds) == 100
    assert trial_seed(42, 0, 7) == trial_seed(42, 0, 7)
    assert trial_seed(42, 1, 7) != trial_seed(42, 0, 7)
    assert trial_seed(43, 0, 7) != trial_seed(42, 0, 7)


def test_estimate_requires_trials():
    with pytest.raises(ValueError, match="n_trials"):
        estimate_logical_error_rate(
            BIT_FLIP_CODE, Variant.SIMPLIFIED, 0.05, 0, 42
        )


def test_estimate_reproducible_and_seed_sensitive():
    kwargs = dict(max_cycles=100_000, engine="frame")
    a = estimate_logical_error_rate(
        BIT_FLIP_CODE, Variant.SIMPLIFIED, 0.05, 60, 42, **kwargs
    )
    b = estimate_logical_error_rate(
        BIT_FLIP_CODE, Variant.SIMPLIFIED, 0.05, 60, 42, **kwargs
    )
    c = estimate_logical_error_rate(
        BIT_FLIP_CODE, Variant.SIMPLIFIED, 0.05, 60, 43, **kwargs
    )
    assert a == b
    assert a.failure_cycles != c.failure_cycles
    assert a.n_trials == 60 and a.n_failures == 60


def test_estimate_worker_count_does_not_change_results():
    kwargs = dict(max_cycles=100_000, engine="frame")
    serial = estimate_logical_error_rate(
        BIT_FLIP_CODE, Variant.SIMPLIFIED, 0.05, 40, 42, workers=1, **kwargs
    )
    parallel = estimate_logical_error_rate(
        BIT_FLIP_CODE, Variant.SIMPLIFIED, 0.05, 40, 42, workers=2, **kwargs
    )
    assert serial == parallel


def test_estimate_censoring_and_all_censored():
    est = estimate_logical_error_rate(
        BIT_FLIP_CODE, Variant.SIMPLIFIED, 0.05, 30, 42,
        max_cycles=2, engine="frame",
    )
    assert est.n_failures + est.n_censored == 30
    assert est.n_censored > 0  # two cycles is rarely enough to fail at p=0.05
    assert all(c <= 2 for c in est.failure_cycles)
    with pytest.raises(AllCensored):
        estimate_logical_error_rate(
            BIT_FLIP_CODE, Variant.SIMPLIFIED, 1e-7, 5, 42,
            max_cycles=10, engine="frame",
        )


def test_estimate_progress_reporting():
    calls = []
    estimate_logical_error_rate(
        BIT_FLIP_CODE, Variant.SIMPLIFIED, 0.05, 20, 42,
        max_cycles=100_000, engine="frame",
        progress=lambda done, total: calls.append((done, total)),
    )
    assert calls[-1] == (20, 20)
    assert all(total == 20 for _, total in calls)
    assert [d for d, _ in calls] == sorted(d for d, _ in calls)


def test_estimate_unencoded_baseline():
    est = estimate_logical_error_rate(
        UNENCODED, Variant.NONE, 0.3, 50, 42, max_cycles=1000, engine="frame"
    )
    # an unprotected qubit fails after ~1/p cycles (2/3 of errors flip it)
    assert est.n_failures == 50
    assert 1.0 < est.mean_cycles < 20.0

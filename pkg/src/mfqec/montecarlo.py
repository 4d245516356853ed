"""Time-to-failure Monte Carlo over correction cycles.

A trial starts from a noiselessly prepared logical |0> (all generators,
logical Z, and ancilla Z operators at +1), then runs cycles a, b, a, b, ...
with stochastic Pauli noise until the state carries a logical flip (all
generators back at +1 but logical Z at -1) or a cycle cap is hit.

Whenever the state is exactly the clean |0_L>|0...0>, whole error-free
cycles are skipped in one geometric draw and the next cycle is simulated
with at least one error (count conditioned on >= 1, sites uniform without
replacement).  That is distributionally identical to simulating every cycle
with per-site Bernoulli(p) noise, which `method="full"` still does for
cross-validation.  Cycle parity is preserved across skips because the two
cycles are not equivalent.

Two interchangeable engines execute cycles:

* "tableau" — the reference path: a full stabilizer tableau runs every
  instruction (`run_cycle` below).
* "frame" — an error-frame fast path: since the noiseless reference run is
  the identity on the clean state, the entire state is two bit masks (X and
  Z frame), gates permute frame bits, and classically-controlled
  corrections read frame bits directly.

Both consume the RNG stream identically (only error sampling draws), so a
trial gives bit-identical results under either engine; the test suite
enforces that trial-for-trial.
"""
from __future__ import annotations

import enum
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuits import Circuit, GateKind, Variant, build_circuit, enumerate_error_sites
from .codes import CodeSpec
from .pauli import PauliOperator
from .errors import (
    DegenerateRate,
    ErrorEvent,
    draw_event_paulis,
    event_pauli,
    sample_clean_run_length,
    sample_error_count_given_any,
)
from .tableau import Sign, Tableau


class AllCensored(RuntimeError):
    """Every trial hit the cycle cap without failing."""


class Classification(enum.Enum):
    CLEAN_ZERO = "clean_zero"
    LOGICAL_FLIP = "logical_flip"
    RESIDUAL = "residual"


@dataclass(frozen=True)
class CycleOutcome:
    classification: Classification
    events_applied: int


@dataclass(frozen=True)
class TrialConfig:
    code: CodeSpec
    variant: Variant
    p: float
    seed: int
    max_cycles: int = 10_000_000

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise ValueError(f"p must be in [0, 1), got {self.p}")
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be >= 1")


@dataclass(frozen=True)
class TrialResult:
    cycles_to_failure: int
    censored: bool


@lru_cache(maxsize=None)
def circuit_for(code_name: str, variant: Variant) -> Circuit:
    return build_circuit(code_name, variant)


# ---------------------------------------------------------------------------
# reference engine: full tableau execution
# ---------------------------------------------------------------------------

def prepare_logical_zero(circuit: Circuit) -> Tableau:
    """Noiseless logical |0> on the full register.  |0...0> already
    satisfies every Z-type generator, logical Z, and the ancilla Z's, so
    only the X-type generators need projecting; projection onto their +1
    eigenspaces is deterministic and consumes no randomness."""
    tab = Tableau(circuit.n_qubits)
    code = circuit.code
    for i in range(len(code.x_stabilizers)):
        tab._project_plus(code.x_stabilizer_pauli(i, circuit.n_qubits))
    return tab


@lru_cache(maxsize=None)
def _classify_operators(code: CodeSpec, n: int):
    zeros = np.zeros(n, np.uint8)
    ancilla_zs = []
    for q in range(code.n_data, n):
        z = zeros.copy()
        z[q] = 1
        ancilla_zs.append(PauliOperator(zeros, z))
    return tuple(code.generators(n)), code.logical_z_pauli(n), tuple(ancilla_zs)


def classify_state(tab: Tableau, code: CodeSpec) -> Classification:
    generators, logical_z, ancilla_zs = _classify_operators(code, tab.n)
    for g in generators:
        if tab.deterministic_sign(g) is not Sign.PLUS:
            return Classification.RESIDUAL
    zl = tab.deterministic_sign(logical_z)
    if zl is Sign.INDETERMINATE:
        return Classification.RESIDUAL
    if zl is Sign.MINUS:
        return Classification.LOGICAL_FLIP
    for anc in ancilla_zs:
        if tab.deterministic_sign(anc) is not Sign.PLUS:
            return Classification.RESIDUAL
    return Classification.CLEAN_ZERO


_SITES_CACHE: dict = {}


def _sites(circuit: Circuit, which: str):
    key = (id(circuit), which)
    hit = _SITES_CACHE.get(key)
    if hit is None or hit[0] is not circuit:
        hit = (circuit, enumerate_error_sites(circuit, which))
        _SITES_CACHE[key] = hit
    return hit[1]


def run_cycle(tab: Tableau, circuit: Circuit, selector: str, events=(), rng=None) -> CycleOutcome:
    """Execute one cycle on the tableau.  Each event fires immediately
    after its site's instruction has executed ideally."""
    by_site = {ev.site: ev for ev in events}
    applied = 0
    idx = 0
    sites = _sites(circuit, selector)
    for step in circuit.cycle(selector):
        for ins in step.instructions:
            kind = ins.kind
            if kind is GateKind.CNOT:
                tab.apply_CNOT(*ins.qubits)
            elif kind is GateKind.TOFFOLI:
                tab.classical_toffoli(*ins.qubits)
            elif kind is GateKind.CCZ:
                tab.classical_ccz(*ins.qubits)
            elif kind is GateKind.RESET:
                tab.reset_zero(ins.qubits[0], rng)
            elif kind is GateKind.H:
                tab.apply_H(ins.qubits[0])
            # IDLE: nothing
            ev = by_site.get(sites[idx])
            if ev is not None:
                tab.apply_pauli(event_pauli(ev, tab.n))
                applied += 1
            idx += 1
    return CycleOutcome(classify_state(tab, circuit.code), applied)


class _TableauEngine:
    name = "tableau"

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        self._fresh = prepare_logical_zero(circuit)

    def new_run(self) -> Tableau:
        return self._fresh.copy()

    def run_cycle(self, state: Tableau, selector: str, events, rng) -> Classification:
        return run_cycle(state, self.circuit, selector, events, rng).classification


# ---------------------------------------------------------------------------
# fast engine: X/Z error frame as two bit masks
# ---------------------------------------------------------------------------

_OP_H, _OP_CNOT, _OP_TOFX, _OP_TOFZ, _OP_RESET = range(5)


class _FrameEngine:
    """Tracks the Pauli frame relative to the noiseless reference run.

    The reference run from the clean state never fires a correction and
    returns every ancilla to |0>, so all controls read as the frame's X bit
    and a reset simply clears the frame on that qubit.  Gate-by-gate this
    reproduces the tableau semantics exactly (the suite checks trial
    equivalence bit-for-bit).
    """

    name = "frame"

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        code = circuit.code
        n = circuit.n_qubits
        self.gen_masks = []
        for g in code.generators(n):
            gx = sum(1 << q for q in range(n) if g.x[q])
            gz = sum(1 << q for q in range(n) if g.z[q])
            self.gen_masks.append((gx, gz))
        self.zl_mask = sum(1 << q for q in code.logical_z)
        self.nondata_mask = ((1 << n) - 1) ^ ((1 << code.n_data) - 1)
        self._compiled = {
            "a": self._compile(circuit, "a"),
            "b": self._compile(circuit, "b"),
        }

    @staticmethod
    def _compile(circuit: Circuit, which: str):
        ops = []
        op_site = []  # site index of each compiled op, ascending
        idx = 0
        for step in circuit.cycle(which):
            for ins in step.instructions:
                kind = ins.kind
                if kind is GateKind.CNOT:
                    c, t = ins.qubits
                    ops.append((_OP_CNOT, 1 << c, 1 << t))
                elif kind is GateKind.TOFFOLI:
                    c1, c2, t = ins.qubits
                    ops.append((_OP_TOFX, 1 << c1, 1 << c2, 1 << t))
                elif kind is GateKind.CCZ:
                    c1, c2, t = ins.qubits
                    ops.append((_OP_TOFZ, 1 << c1, 1 << c2, 1 << t))
                elif kind is GateKind.RESET:
                    ops.append((_OP_RESET, ~(1 << ins.qubits[0])))
                elif kind is GateKind.H:
                    ops.append((_OP_H, 1 << ins.qubits[0]))
                else:  # IDLE
                    idx += 1
                    continue
                op_site.append(idx)
                idx += 1
        site_index = {site: i for i, site in enumerate(_sites(circuit, which))}
        return ops, op_site, site_index

    def new_run(self):
        return [0, 0]  # [x frame, z frame]

    @staticmethod
    def _exec(ops, a, b, fx, fz):
        for i in range(a, b):
            op = ops[i]
            code = op[0]
            if code == _OP_CNOT:
                if fx & op[1]:
                    fx ^= op[2]
                if fz & op[2]:
                    fz ^= op[1]
            elif code == _OP_TOFX:
                if (fx & op[1]) and (fx & op[2]):
                    fx ^= op[3]
            elif code == _OP_TOFZ:
                if (fx & op[1]) and (fx & op[2]):
                    fz ^= op[3]
            elif code == _OP_RESET:
                fx &= op[1]
                fz &= op[1]
            else:  # H: swap the two frame bits on the qubit
                m = op[1]
                if bool(fx & m) != bool(fz & m):
                    fx ^= m
                    fz ^= m
        return fx, fz

    def run_cycle(self, state, selector: str, events, rng=None) -> Classification:
        ops, op_site, site_index = self._compiled[selector]
        fx, fz = state
        done = 0
        for ev in sorted(events, key=lambda e: site_index[e.site]):
            upto = bisect_right(op_site, site_index[ev.site])
            fx, fz = self._exec(ops, done, upto, fx, fz)
            done = upto
            ex = ez = 0
            for q, letter in zip(ev.site.qubits, ev.paulis):
                if letter in ("X", "Y"):
                    ex |= 1 << q
                if letter in ("Z", "Y"):
                    ez |= 1 << q
            fx ^= ex
            fz ^= ez
        fx, fz = self._exec(ops, done, len(ops), fx, fz)
        cls = self._classify(fx, fz)
        if cls is Classification.CLEAN_ZERO:
            fx = fz = 0  # same quantum state; canonicalize the frame
        state[0] = fx
        state[1] = fz
        return cls

    def _classify(self, fx, fz) -> Classification:
        for gx, gz in self.gen_masks:
            if ((gx & fz).bit_count() + (gz & fx).bit_count()) & 1:
                return Classification.RESIDUAL
        if (self.zl_mask & fx).bit_count() & 1:
            return Classification.LOGICAL_FLIP
        if fx & self.nondata_mask:
            return Classification.RESIDUAL
        return Classification.CLEAN_ZERO


_ENGINES = {"tableau": _TableauEngine, "frame": _FrameEngine}


def make_engine(circuit: Circuit, engine="tableau"):
    if not isinstance(engine, str):
        return engine  # already an engine instance
    try:
        cls = _ENGINES[engine]
    except KeyError:
        raise ValueError(f"unknown engine {engine!r}") from None
    return cls(circuit)


# ---------------------------------------------------------------------------
# trials
# ---------------------------------------------------------------------------

def _draw_cycle_events(sites, indices, rng):
    return [
        ErrorEvent(sites[i], draw_event_paulis(sites[i].channel, rng))
        for i in indices
    ]


def run_trial(cfg: TrialConfig, engine=None, method: str = "skip") -> TrialResult:
    """One seeded trial.  ``engine`` may be an engine object, an engine
    name, or None for the reference tableau engine.  ``method="full"``
    simulates every cycle with Binomial(N, p) events instead of skipping
    provably clean stretches."""
    if method not in ("skip", "full"):
        raise ValueError("method must be 'skip' or 'full'")
    circuit = circuit_for(cfg.code.name, cfg.variant)
    if engine is None or isinstance(engine, str):
        engine = make_engine(circuit, engine or "tableau")
    if cfg.p == 0.0:
        # no error can ever occur; the clean state survives to the cap
        return TrialResult(cfg.max_cycles, True)
    rng = np.random.default_rng(cfg.seed)
    sites_a = _sites(circuit, "a")
    sites_b = _sites(circuit, "b")
    n_sites = len(sites_a)
    if len(sites_b) != n_sites:
        raise AssertionError("cycles a and b disagree on site count")
    state = engine.new_run()
    t = 0
    clean = True
    while t < cfg.max_cycles:
        if clean and method == "skip":
            t += sample_clean_run_length(cfg.p, n_sites, rng)
            if t >= cfg.max_cycles:
                break
            k = sample_error_count_given_any(cfg.p, n_sites, rng)
        else:
            k = int(rng.binomial(n_sites, cfg.p))
        sites = sites_a if t % 2 == 0 else sites_b
        if k:
            indices = np.sort(rng.choice(n_sites, size=k, replace=False))
            events = _draw_cycle_events(sites, indices, rng)
        else:
            events = ()
        cls = engine.run_cycle(state, "a" if t % 2 == 0 else "b", events, rng)
        t += 1
        if cls is Classification.LOGICAL_FLIP:
            return TrialResult(t, False)
        clean = cls is Classification.CLEAN_ZERO
    return TrialResult(cfg.max_cycles, True)


# ---------------------------------------------------------------------------
# rate estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateEstimate:
    p_log: float
    ci_low: float
    ci_high: float
    mean_cycles: float
    n_trials: int
    n_failures: int
    n_censored: int
    failure_cycles: tuple  # cycles_to_failure of uncensored trials, trial order


def trial_seed(master_seed: int, point_index: int, trial_index: int) -> int:
    ss = np.random.SeedSequence([master_seed, point_index, trial_index])
    return int(ss.generate_state(1, np.uint64)[0])


def _bootstrap_ci(samples: np.ndarray, rng, n_bootstrap: int = 1000):
    n = samples.size
    means = np.empty(n_bootstrap)
    chunk = max(1, min(n_bootstrap, int(2e7) // max(n, 1)))
    done = 0
    while done < n_bootstrap:
        b = min(chunk, n_bootstrap - done)
        idx = rng.integers(0, n, size=(b, n))
        means[done : done + b] = samples[idx].mean(axis=1)
        done += b
    lo_mean, hi_mean = np.percentile(means, [2.5, 97.5])
    return float(1.0 / hi_mean), float(1.0 / lo_mean)


def aggregate_rate_estimate(
    failure_cycles, n_censored: int, rng, n_bootstrap: int = 1000
) -> RateEstimate:
    samples = np.asarray(failure_cycles, dtype=np.float64)
    n_trials = samples.size + n_censored
    if samples.size == 0:
        raise AllCensored(f"no failures in {n_trials} trials")
    mean = float(samples.mean())
    if samples.size == 1 or np.all(samples == samples[0]):
        ci = (1.0 / mean, 1.0 / mean)
    else:
        ci = _bootstrap_ci(samples, rng, n_bootstrap)
    return RateEstimate(
        p_log=1.0 / mean,
        ci_low=ci[0],
        ci_high=ci[1],
        mean_cycles=mean,
        n_trials=n_trials,
        n_failures=samples.size,
        n_censored=n_censored,
        failure_cycles=tuple(int(c) for c in failure_cycles),
    )


def _run_trial_block(args):
    (code_name, variant_value, p, max_cycles, engine_name, master_seed,
     point_index, method, indices) = args
    from .codes import CODES, UNENCODED

    variant = Variant(variant_value)
    code = UNENCODED if variant is Variant.NONE else CODES[code_name]
    circuit = circuit_for(code.name, variant)
    engine = make_engine(circuit, engine_name)
    out = []
    for t in indices:
        cfg = TrialConfig(code, variant, p, trial_seed(master_seed, point_index, t),
                          max_cycles)
        res = run_trial(cfg, engine=engine)
        out.append((t, res.cycles_to_failure, res.censored))
    return out


def estimate_logical_error_rate(
    code: CodeSpec,
    variant: Variant,
    p: float,
    n_trials: int,
    master_seed: int,
    *,
    max_cycles: int = 10_000_000,
    point_index: int = 0,
    workers: int = 1,
    engine: str = "tableau",
    n_bootstrap: int = 1000,
    progress=None,
) -> RateEstimate:
    """n_trials independent seeded trials; p_log = 1/mean cycles-to-failure
    over uncensored trials with a bootstrap CI.  Results are identical for
    any worker count because each trial's seed depends only on
    (master_seed, point_index, trial index)."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    results = [None] * n_trials
    base = (code.name, variant.value, p, max_cycles, engine, master_seed,
            point_index, "skip")
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        chunks = [
            list(range(i, n_trials, workers * 4)) for i in range(workers * 4)
        ]
        chunks = [c for c in chunks if c]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for block in pool.map(_run_trial_block, [base + (c,) for c in chunks]):
                for t, cycles, censored in block:
                    results[t] = (cycles, censored)
                if progress is not None:
                    progress(sum(r is not None for r in results), n_trials)
    else:
        circuit = circuit_for(code.name, variant)
        eng = make_engine(circuit, engine)
        tick = max(1, n_trials // 20)
        for t in range(n_trials):
            cfg = TrialConfig(code, variant, p,
                              trial_seed(master_seed, point_index, t), max_cycles)
            res = run_trial(cfg, engine=eng)
            results[t] = (res.cycles_to_failure, res.censored)
            if progress is not None and (t + 1) % tick == 0:
                progress(t + 1, n_trials)
    failure_cycles = [c for c, censored in results if not censored]
    n_censored = sum(1 for _, censored in results if censored)
    boot_rng = np.random.default_rng(
        np.random.SeedSequence([master_seed, point_index])
    )
    return aggregate_rate_estimate(failure_cycles, n_censored, boot_rng, n_bootstrap)


# ---------------------------------------------------------------------------
# deterministic fault injection (used by the fault-tolerance tests)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FaultOutcome:
    flipped: bool
    clean_after: int  # cycles until CLEAN_ZERO (injection cycle = 1); 0 = never
    classifications: tuple


def run_single_fault(
    circuit: Circuit,
    site,
    paulis,
    selector: str = "a",
    follow_cycles: int = 10,
    engine: str = "tableau",
) -> FaultOutcome:
    """Inject exactly one event into an otherwise noiseless run and follow
    it for ``follow_cycles`` clean cycles (stopping early once clean, since
    a clean state stays clean without noise)."""
    eng = make_engine(circuit, engine)
    state = eng.new_run()
    event = ErrorEvent(site, tuple(paulis))
    order = "ab" if selector == "a" else "ba"
    seen = []
    cls = eng.run_cycle(state, selector, [event], None)
    seen.append(cls)
    cycle_no = 1
    while (
        cls not in (Classification.CLEAN_ZERO, Classification.LOGICAL_FLIP)
        and cycle_no <= follow_cycles
    ):
        cls = eng.run_cycle(state, order[cycle_no % 2], (), None)
        seen.append(cls)
        cycle_no += 1
    return FaultOutcome(
        flipped=cls is Classification.LOGICAL_FLIP,
        clean_after=cycle_no if cls is Classification.CLEAN_ZERO else 0,
        classifications=tuple(seen),
    )

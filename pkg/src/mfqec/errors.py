"""Stochastic Pauli noise attached to circuit locations.

Every instruction in a padded cycle is one error site.  A site errs with
probability p, and conditioned on erring draws uniformly from the
non-identity Paulis on its qubits:

* MEMORY (idle, H, and any other 1q slot): X, Y or Z, each p/3
* TWO_QUBIT (CNOT): the 15 non-identity pairs, each p/15
* THREE_QUBIT (Toffoli / CCZ): the 63 non-identity triples, each p/63
* INIT (reset): X with probability p

Besides per-site sampling there are two aggregate samplers used by the
skip-ahead Monte Carlo loop: the geometric number of consecutive error-free
cycles, and the error count of a cycle conditioned on having at least one
error.  Both are exact, not approximations.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .pauli import PauliOperator


class DegenerateRate(ValueError):
    """Physical error rate admits no error events (p <= 0) or is > 1."""


class ErrorChannel(enum.Enum):
    MEMORY = "memory"
    TWO_QUBIT = "two_qubit"
    THREE_QUBIT = "three_qubit"
    INIT = "init"


@dataclass(frozen=True)
class ErrorSite:
    channel: ErrorChannel
    step: int           # 1-based time step within the cycle
    qubits: tuple

    @property
    def n_paulis(self) -> int:
        return {
            ErrorChannel.MEMORY: 3,
            ErrorChannel.TWO_QUBIT: 15,
            ErrorChannel.THREE_QUBIT: 63,
            ErrorChannel.INIT: 1,
        }[self.channel]


@dataclass(frozen=True)
class ErrorEvent:
    site: ErrorSite
    paulis: tuple  # one letter per site qubit, not all "I"


_LETTERS = ("I", "X", "Y", "Z")


def _check_rate(p: float):
    if not 0.0 < p <= 1.0:
        raise DegenerateRate(f"physical error rate must be in (0, 1], got {p}")


def draw_event_paulis(channel: ErrorChannel, rng: np.random.Generator) -> tuple:
    """Uniform non-identity Pauli for a site known to err."""
    if channel is ErrorChannel.MEMORY:
        return (_LETTERS[1 + int(rng.integers(3))],)
    if channel is ErrorChannel.TWO_QUBIT:
        idx = int(rng.integers(1, 16))
        return (_LETTERS[idx // 4], _LETTERS[idx % 4])
    if channel is ErrorChannel.THREE_QUBIT:
        idx = int(rng.integers(1, 64))
        return (_LETTERS[idx // 16], _LETTERS[(idx // 4) % 4], _LETTERS[idx % 4])
    if channel is ErrorChannel.INIT:
        return ("X",)
    raise ValueError(f"unknown channel {channel}")


def sample_site_error(site: ErrorSite, p: float, rng: np.random.Generator):
    """One Bernoulli(p) draw for the site; an ErrorEvent or None."""
    _check_rate(p)
    if rng.random() >= p:
        return None
    return ErrorEvent(site, draw_event_paulis(site.channel, rng))


def event_pauli(event: ErrorEvent, n_total: int) -> PauliOperator:
    x = np.zeros(n_total, np.uint8)
    z = np.zeros(n_total, np.uint8)
    for q, letter in zip(event.site.qubits, event.paulis):
        if letter in ("X", "Y"):
            x[q] = 1
        if letter in ("Z", "Y"):
            z[q] = 1
    return PauliOperator(x, z)


def apply_event(tab, event: ErrorEvent):
    tab.apply_pauli(event_pauli(event, tab.n))


# ---------------------------------------------------------------------------
# aggregate samplers for the skip-ahead loop
# ---------------------------------------------------------------------------

def sample_clean_run_length(p: float, n_sites: int, rng: np.random.Generator) -> int:
    """Number of consecutive cycles (possibly 0) in which none of the
    ``n_sites`` locations errs.  Exact geometric inverse-CDF sampling with
    success probability 1 - (1-p)**n_sites, done in log space."""
    _check_rate(p)
    if n_sites < 1:
        raise ValueError("need at least one error site")
    log_clean = n_sites * math.log1p(-p)  # log P(cycle has no error)
    if log_clean == 0.0:
        raise DegenerateRate("cycles are certainly clean; run length diverges")
    r = rng.random()
    return int(math.floor(math.log1p(-r) / log_clean))


_COUNT_TABLES: dict = {}


def _count_table(p: float, n_sites: int) -> np.ndarray:
    """Cumulative distribution of Binomial(n_sites, p) conditioned on >= 1,
    computed in log space so it stays exact-to-double for tiny p."""
    key = (p, n_sites)
    table = _COUNT_TABLES.get(key)
    if table is None:
        ks = np.arange(1, n_sites + 1, dtype=np.float64)
        logw = (
            math.lgamma(n_sites + 1)
            - np.array([math.lgamma(k + 1) for k in ks])
            - np.array([math.lgamma(n_sites - k + 1) for k in ks])
            + ks * math.log(p)
            + (n_sites - ks) * math.log1p(-p)
        )
        w = np.exp(logw - logw.max())
        table = np.cumsum(w)
        table /= table[-1]
        _COUNT_TABLES[key] = table
    return table


def sample_error_count_given_any(
    p: float, n_sites: int, rng: np.random.Generator
) -> int:
    """Draw how many of ``n_sites`` locations err in a cycle known to have
    at least one error."""
    _check_rate(p)
    if n_sites < 1:
        raise ValueError("need at least one error site")
    table = _count_table(p, n_sites)
    return int(np.searchsorted(table, rng.random(), side="right")) + 1

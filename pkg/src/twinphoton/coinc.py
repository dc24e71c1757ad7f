"""Windowed coincidence counting and binned cross-correlation g2."""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ContractViolation, DomainError, UndefinedNormalizationError


@dataclass(frozen=True)
class CoincidenceResult:
    N1: int
    N2: int
    Ncc: int
    gate_s: float
    tau_cc_ns: float
    gate_index: int = 0


@dataclass(frozen=True, eq=False)
class G2Histogram:
    """``offsets_ns`` are left bin edges; ``counts / expected`` gives g2."""

    bin_width_ns: float
    offsets_ns: np.ndarray
    counts: np.ndarray
    expected: float

    @property
    def g2(self):
        if len(self.counts) == 0:
            return np.zeros(0)
        if self.expected <= 0:
            raise UndefinedNormalizationError("zero singles rate on a channel")
        return self.counts / self.expected

    @property
    def centers_ns(self):
        return self.offsets_ns + self.bin_width_ns / 2

    def __add__(self, other):
        if self.bin_width_ns != other.bin_width_ns or not np.array_equal(
            self.offsets_ns, other.offsets_ns
        ):
            raise ContractViolation("cannot merge histograms with different bins")
        return G2Histogram(
            self.bin_width_ns, self.offsets_ns, self.counts + other.counts,
            self.expected + other.expected,
        )


def _check_sorted(times, name):
    if len(times) > 1 and np.any(np.diff(times) < 0):
        raise ContractViolation(f"{name} timestamps are not sorted")


@njit(cache=True)
def _greedy_pairs(a, b, half):
    i = 0
    j = 0
    n = 0
    while i < a.shape[0] and j < b.shape[0]:
        d = b[j] - a[i]
        if d < -half:
            j += 1
        elif d > half:
            i += 1
        else:
            n += 1
            i += 1
            j += 1
    return n


def count_coincidences(idler, signal, tau_cc_ns):
    """One-to-one coincidences with ``|t_s - t_i| <= tau_cc/2`` (greedy, earliest first)."""
    _check_sorted(idler.times, "idler")
    _check_sorted(signal.times, "signal")
    if idler.gate_index != signal.gate_index:
        raise ContractViolation("streams come from different gates")
    half = tau_cc_ns * 1e3 / 2
    ncc = int(_greedy_pairs(idler.times, signal.times, half)) if tau_cc_ns > 0 else 0
    return CoincidenceResult(
        len(idler), len(signal), ncc, idler.gate_s, tau_cc_ns, idler.gate_index
    )


def accidental_counts(N1, N2, tau_cc_ns, gate_s):
    """Expected accidental coincidences per gate for N1, N2 counts per gate."""
    if not gate_s > 0:
        raise DomainError("gate_s must be positive")
    return N1 * N2 * tau_cc_ns * 1e-9 / gate_s


def g2_histogram(idler, signal, tau_w_ns, range_ns):
    """All-pairs histogram of ``t_signal - t_idler`` normalised to uncorrelated light.

    Bins of width ``tau_w_ns`` tile ``[-range/2, range/2)``; with an odd bin
    count the central bin is centred on zero delay.
    """
    if not tau_w_ns > 0:
        raise DomainError("bin width must be positive")
    n_bins = range_ns / tau_w_ns
    if range_ns < 0 or abs(n_bins - round(n_bins)) > 1e-9:
        raise DomainError("range must be a non-negative multiple of the bin width")
    n_bins = int(round(n_bins))
    _check_sorted(idler.times, "idler")
    _check_sorted(signal.times, "signal")
    offsets = -range_ns / 2 + tau_w_ns * np.arange(n_bins)
    if n_bins == 0:
        return G2Histogram(tau_w_ns, offsets, np.zeros(0, dtype=np.int64), 0.0)
    if len(idler) == 0 or len(signal) == 0:
        raise UndefinedNormalizationError("zero singles rate on a channel")

    edges_ps = np.append(offsets, range_ns / 2) * 1e3
    t_i = idler.times.astype(np.float64)
    t_s = signal.times
    # number of signal events with delay < edge, summed over idler events
    cumulative = np.array(
        [np.searchsorted(t_s, t_i + e, side="left").sum() for e in edges_ps], dtype=np.int64
    )
    counts = np.diff(cumulative)
    r1, r2 = idler.rate(), signal.rate()
    expected = r1 * r2 * tau_w_ns * 1e-9 * idler.gate_s
    return G2Histogram(tau_w_ns, offsets, counts, expected)

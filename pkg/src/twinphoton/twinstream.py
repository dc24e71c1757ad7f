"""Monte-Carlo timestamp streams for a heralded twin-photon source.

Times are integer picoseconds from the start of the gate. Channel 1 is the
idler (reference) arm, channel 2 the signal (sample) arm.
"""

from dataclasses import dataclass, fields

import numpy as np
from numba import njit
from scipy.special import erf

from .errors import DomainError

IDLER, SIGNAL = 1, 2
# pseudo-channel for the shared pair-emission process
_PAIRS = 0


@dataclass(frozen=True)
class SourceConfig:
    pair_rate: float = 4.43e6
    eta1: float = 0.28
    eta2: float = 0.0864
    dark1: float = 351.0
    dark2: float = 483.0
    jitter_sigma_ps: float = 600.0
    dead_time_ns: float = 50.0
    gate_s: float = 0.3
    n_gates: int = 100
    seed: int = 0
    delay_ps: float = 0.0

    def __post_init__(self):
        for name in ("pair_rate", "dark1", "dark2", "jitter_sigma_ps", "dead_time_ns"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")
        for name in ("eta1", "eta2"):
            if not 0 <= getattr(self, name) <= 1:
                raise DomainError(f"{name} must lie in [0, 1]")
        if not self.gate_s > 0:
            raise DomainError("gate_s must be positive")
        if self.n_gates < 1:
            raise DomainError("n_gates must be >= 1")

    @classmethod
    def field_types(cls):
        return {f.name: (int if f.type in (int, "int") else float) for f in fields(cls)}


@dataclass(frozen=True)
class SampleModel:
    true_transmittance: float = 1.0

    def __post_init__(self):
        if not 0 <= self.true_transmittance <= 1:
            raise DomainError("true_transmittance must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class TimestampStream:
    channel: int
    times: np.ndarray
    gate_index: int
    gate_s: float

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=np.int64)
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

    def __len__(self):
        return len(self.times)

    @property
    def gate_ps(self):
        return int(round(self.gate_s * 1e12))

    def rate(self):
        return len(self.times) / self.gate_s

    def shifted(self, offset_ps):
        return TimestampStream(self.channel, self.times + int(offset_ps), self.gate_index, self.gate_s)


def _rng(seed, stream, gate_index, channel):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream, gate_index, channel])))


def _finish(times_ps, gate_ps):
    t = np.floor(times_ps)
    t = t[(t >= 0) & (t < gate_ps)].astype(np.int64)
    t.sort(kind="stable")
    return t


def generate_gate(config, sample, gate_index, stream=0):
    """Idler and signal streams for one acquisition gate.

    ``stream`` separates independent runs (e.g. reference 0, sample 1) that
    share a seed. Output depends only on (config, sample, gate_index, stream).
    """
    gate_ps = config.gate_s * 1e12
    rng_p = _rng(config.seed, stream, gate_index, _PAIRS)
    rng_1 = _rng(config.seed, stream, gate_index, IDLER)
    rng_2 = _rng(config.seed, stream, gate_index, SIGNAL)

    n_pairs = rng_p.poisson(config.pair_rate * config.gate_s)
    t_pairs = rng_p.uniform(0.0, gate_ps, n_pairs)
    p_signal = config.eta2 * sample.true_transmittance

    streams = []
    for rng, channel, p_detect, dark, offset in (
        (rng_1, IDLER, config.eta1, config.dark1, 0.0),
        (rng_2, SIGNAL, p_signal, config.dark2, config.delay_ps),
    ):
        hits = t_pairs[rng.random(n_pairs) < p_detect]
        if config.jitter_sigma_ps > 0:
            hits = hits + rng.normal(0.0, config.jitter_sigma_ps, len(hits))
        darks = rng.uniform(0.0, gate_ps, rng.poisson(dark * config.gate_s))
        times = np.concatenate([hits + offset, darks])
        streams.append(TimestampStream(channel, _finish(times, gate_ps), gate_index, config.gate_s))
    return streams[0], streams[1]


@njit(cache=True)
def _dead_time_mask(times, dead_ps):
    keep = np.zeros(times.shape[0], dtype=np.bool_)
    last = 0
    have = False
    for k in range(times.shape[0]):
        if not have or times[k] - last >= dead_ps:
            keep[k] = True
            last = times[k]
            have = True
    return keep


def apply_dead_time(stream, dead_time_ns):
    """Non-paralyzable dead time: drop events closer than ``dead_time_ns`` to the last kept one."""
    if dead_time_ns <= 0 or len(stream) == 0:
        return stream
    keep = _dead_time_mask(stream.times, dead_time_ns * 1e3)
    return TimestampStream(stream.channel, stream.times[keep], stream.gate_index, stream.gate_s)


def simulate_gates(config, sample, stream=0, dead_time=True):
    """Yield (idler, signal) per gate, with dead time applied if requested."""
    for g in range(config.n_gates):
        idler, signal = generate_gate(config, sample, g, stream)
        if dead_time:
            idler = apply_dead_time(idler, config.dead_time_ns)
            signal = apply_dead_time(signal, config.dead_time_ns)
        yield idler, signal


def simulate_counts(config, sample, tau_cc_ns, stream=0, n_gates=None):
    """Per-gate (N1, N2, Ncc) drawn from the count-level marginal of the event model.

    Equivalent in distribution to ``generate_gate`` -> ``apply_dead_time`` ->
    coincidence counting, up to two approximations: dead-time losses are
    independent thinnings with the non-paralyzable survival probability
    ``1/(1 + r tau)``, and accidentals are Poisson with mean
    ``N1 N2 tau_cc / T``. Used where event-level simulation at full rate is
    too slow (thousands of 0.3 s gates).
    """
    n = config.n_gates if n_gates is None else int(n_gates)
    rng = _rng(config.seed, stream, 2**32 - 1, _PAIRS)
    T = config.gate_s
    p1 = config.eta1
    p2 = config.eta2 * sample.true_transmittance
    tau_d = config.dead_time_ns * 1e-9

    pairs = rng.poisson(config.pair_rate * T, n)
    both, idler_only, signal_only, _ = rng.multinomial(
        pairs, [p1 * p2, p1 * (1 - p2), (1 - p1) * p2, (1 - p1) * (1 - p2)]
    ).T
    other1 = idler_only + rng.poisson(config.dark1 * T, n)
    other2 = signal_only + rng.poisson(config.dark2 * T, n)

    r1 = config.pair_rate * p1 + config.dark1
    r2 = config.pair_rate * p2 + config.dark2
    q1 = 1.0 / (1.0 + r1 * tau_d)
    q2 = 1.0 / (1.0 + r2 * tau_d)

    both_1 = rng.binomial(both, q1)
    both_12 = rng.binomial(both_1, q2)
    both_2 = both_12 + rng.binomial(both - both_1, q2)
    n1 = both_1 + rng.binomial(other1, q1)
    n2 = both_2 + rng.binomial(other2, q2)

    sigma_delay = np.sqrt(2.0) * config.jitter_sigma_ps
    half = tau_cc_ns * 1e3 / 2
    if sigma_delay > 0:
        z = np.array([half - config.delay_ps, half + config.delay_ps]) / (sigma_delay * np.sqrt(2))
        p_window = 0.5 * (erf(z[0]) + erf(z[1]))
    else:
        p_window = 1.0 if abs(config.delay_ps) <= half else 0.0
    true_cc = rng.binomial(both_12, p_window)
    accidental = rng.poisson(n1 * n2.astype(float) * tau_cc_ns * 1e-9 / T)
    ncc = np.minimum(true_cc + accidental, np.minimum(n1, n2))
    return n1, n2, ncc

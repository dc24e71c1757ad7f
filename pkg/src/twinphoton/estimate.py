"""Count corrections and transmittance estimators.

Rates are in counts per second throughout; transmittances and their
uncertainties are in percent.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, InconsistentCountsError, InsufficientDataError, UndefinedReferenceError


@dataclass(frozen=True)
class ChannelCounts:
    Ncc: float
    N1: float
    N2: float
    dNcc: float = 0.0
    dN1: float = 0.0
    dN2: float = 0.0
    dark1: float = 0.0
    dark2: float = 0.0
    tau_cc_ns: float = 0.0
    tau_dead_ns: float = 0.0
    gate_s: float = 0.3
    label: str = ""
    valid: bool = True
    invalid_term: str = ""

    def __post_init__(self):
        for name in ("Ncc", "N1", "N2", "dNcc", "dN1", "dN2", "dark1", "dark2"):
            if getattr(self, name) < 0 and self.valid:
                raise DomainError(f"{name} must be >= 0")


@dataclass(frozen=True)
class TransmittanceEstimate:
    mean: float
    uncertainty: float
    method: str

    def rounded(self, digits=2):
        return round(self.mean, digits), round(self.uncertainty, digits)


@dataclass(frozen=True)
class AdvantageReport:
    G_T: float | None
    G_N: float
    SNR_cc: float
    SNR_sc: float
    sensitivity_cc: float
    sensitivity_sc: float


def dead_time_factor(rate, tau_dead_ns):
    """``gamma = 1 - N tau_dead`` for a recorded rate N (cps)."""
    return 1.0 - rate * tau_dead_ns * 1e-9


def correct_counts(raw, literal=False):
    """Dark, dead-time and accidental corrections, in that order.

    Singles become ``(N - dark) / gamma`` with gamma from the recorded rate;
    ``literal=True`` multiplies by gamma instead. The accidental rate
    ``N1 N2 tau_cc`` uses the corrected singles. A correction that drives a
    rate negative returns a copy with ``valid=False`` naming the term.
    """
    singles = {}
    for j in (1, 2):
        n, dn, dark = getattr(raw, f"N{j}"), getattr(raw, f"dN{j}"), getattr(raw, f"dark{j}")
        gamma = dead_time_factor(n, raw.tau_dead_ns)
        if gamma <= 0:
            return _invalid(raw, f"dead-time factor gamma{j}={gamma:.4g} <= 0")
        scale = gamma if literal else 1.0 / gamma
        net = n - dark
        if net < 0:
            return _invalid(raw, f"N{j} - dark{j} = {net:.6g} < 0")
        singles[j] = (net * scale, dn * scale)

    (n1, dn1), (n2, dn2) = singles[1], singles[2]
    accidental = n1 * n2 * raw.tau_cc_ns * 1e-9
    ncc = raw.Ncc - accidental
    if ncc < 0:
        return _invalid(raw, f"Ncc - accidental = {ncc:.6g} < 0")
    return replace(raw, Ncc=ncc, N1=n1, N2=n2, dN1=dn1, dN2=dn2)


def _invalid(raw, term):
    return replace(raw, valid=False, invalid_term=term)


def quantum_efficiency(Ncc0, N10):
    """Heralding efficiency of the signal arm, ``Ncc / N1`` without a sample."""
    if not N10 > 0:
        raise UndefinedReferenceError("idler reference rate must be positive")
    eta = Ncc0 / N10
    if eta > 1:
        raise InconsistentCountsError(f"Ncc0/N10 = {eta:.4g} exceeds 1")
    return eta


def transmittance_cc(Ncc_s, N1_s, Ncc_0, N1_0):
    """Coincidence-based transmittance in percent, idler-normalised."""
    if not (Ncc_0 > 0 and N1_0 > 0 and N1_s > 0):
        raise UndefinedReferenceError("reference coincidence and idler rates must be positive")
    return 100.0 * (Ncc_s / N1_s) * (N1_0 / Ncc_0)


def transmittance_cc_approx(Ncc_s, Ncc_0):
    """Coincidence ratio alone, valid when the idler rate is unchanged."""
    if not Ncc_0 > 0:
        raise UndefinedReferenceError("reference coincidence rate must be positive")
    return 100.0 * Ncc_s / Ncc_0


def transmittance_sc(N2_s, N2_0):
    if not N2_0 > 0:
        raise UndefinedReferenceError("reference signal rate must be positive")
    return 100.0 * N2_s / N2_0


def uncertainty_cc(Ncc_s, dNcc_s, Ncc_0, dNcc_0, N1_s=1.0, dN1_s=0.0, N1_0=1.0, dN1_0=0.0):
    """Absolute uncertainty (percent points) of ``transmittance_cc``.

    The idler terms enter as a signed difference, so equal relative idler
    spreads cancel.
    """
    rel = (
        abs(dNcc_s / Ncc_s)
        + abs(dNcc_0 / Ncc_0)
        + abs(dN1_s / N1_s - dN1_0 / N1_0)
    )
    return rel * transmittance_cc(Ncc_s, N1_s, Ncc_0, N1_0)


def uncertainty_sc(N2_s, dN2_s, N2_0, dN2_0):
    rel = abs(dN2_s / N2_s) + abs(dN2_0 / N2_0)
    return rel * transmittance_sc(N2_s, N2_0)


def snr_db(signal_rate, noise_rate):
    if not (signal_rate > 0 and noise_rate > 0):
        raise DomainError("SNR needs positive signal and noise")
    return 10.0 * math.log10(signal_rate / noise_rate)


def sensitivity_db(min_noise_rate, unit_scale=1.0):
    """``-10 log10`` of the noise floor; ``unit_scale`` converts from cps (1e-3 for Kcps)."""
    noise = min_noise_rate * unit_scale
    if not noise > 0:
        raise DomainError("sensitivity needs a positive noise rate")
    return -10.0 * math.log10(noise)


def relative_error(mean, spread):
    return spread / mean


def estimate_pair(sample, reference):
    """(CC estimate, SC estimate) for corrected sample and reference counts."""
    t_cc = transmittance_cc(sample.Ncc, sample.N1, reference.Ncc, reference.N1)
    u_cc = uncertainty_cc(
        sample.Ncc, sample.dNcc, reference.Ncc, reference.dNcc,
        sample.N1, sample.dN1, reference.N1, reference.dN1,
    )
    t_sc = transmittance_sc(sample.N2, reference.N2)
    u_sc = uncertainty_sc(sample.N2, sample.dN2, reference.N2, reference.dN2)
    return TransmittanceEstimate(t_cc, u_cc, "cc"), TransmittanceEstimate(t_sc, u_sc, "sc")


def advantage(sample, reference=None, unit_scale=1.0):
    """Entanglement-advantage ratios and SNR/sensitivity for one row.

    ``G_N`` compares the relative spreads of the signal singles and the
    coincidences of ``sample``; ``G_T`` (only with a reference) compares the
    relative uncertainties of the two transmittance estimators.
    """
    if not (sample.Ncc > 0 and sample.N2 > 0):
        raise DomainError("advantage needs positive rates")
    g_n = relative_error(sample.N2, sample.dN2) / relative_error(sample.Ncc, sample.dNcc)
    g_t = None
    if reference is not None:
        cc, sc = estimate_pair(sample, reference)
        g_t = (sc.uncertainty / sc.mean) / (cc.uncertainty / cc.mean)
    return AdvantageReport(
        G_T=g_t,
        G_N=g_n,
        SNR_cc=snr_db(sample.Ncc, sample.dNcc),
        SNR_sc=snr_db(sample.N2, sample.dN2),
        sensitivity_cc=sensitivity_db(sample.dNcc, unit_scale),
        sensitivity_sc=sensitivity_db(sample.dN2, unit_scale),
    )


def fresnel_index(transmittance):
    """Index n > 1 with ``4 n / (1 + n)^2 = T`` at normal incidence from air."""
    T = float(transmittance)
    if not 0 < T <= 1:
        raise DomainError(f"transmittance must be in (0, 1], got {T}")
    return ((2.0 - T) + 2.0 * math.sqrt(1.0 - T)) / T


def batch_stats(values, standard_error=False):
    """Mean and sample standard deviation (or standard error) of per-gate rates."""
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        raise InsufficientDataError("need at least 2 gates for a spread")
    spread = float(x.std(ddof=1))
    if standard_error:
        spread /= math.sqrt(x.size)
    return float(x.mean()), spread

"""Type-I phase matching in a negative uniaxial crystal.

Wavelengths are in nm at the public surface and converted to micrometres
for the dispersion formula. Angles are in degrees; emission angles are
external (measured in air after the exit face).
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .config import coerce, data_path, read_kv
from .errors import DomainError, NoPhaseMatchError

PUMP_ANGLE_RULES = ("fixed", "signal-offset")

# angle bracket searched for the emission cone
SCAN_MAX_DEG = 15.0
SCAN_STEP_DEG = 0.05
ANGLE_XTOL_DEG = 1e-12


@dataclass(frozen=True)
class SellmeierCoefficients:
    """``n^2 = L1 + L2/(lambda^2 - L3) - L4 lambda^2`` with lambda in um."""

    L1: float
    L2: float
    L3: float
    L4: float
    valid_min_um: float
    valid_max_um: float

    def __post_init__(self):
        if not self.valid_min_um < self.valid_max_um:
            raise DomainError(
                f"valid range [{self.valid_min_um}, {self.valid_max_um}] um is empty"
            )
        lo2, hi2 = self.valid_min_um**2, self.valid_max_um**2
        if self.L2 != 0 and lo2 <= self.L3 <= hi2:
            raise DomainError("Sellmeier pole L3 lies inside the valid range")
        grid = np.linspace(self.valid_min_um, self.valid_max_um, 512)
        if np.any(self._radicand(grid) <= 0):
            raise DomainError("Sellmeier radicand is not positive across the valid range")

    def _radicand(self, lam_um):
        lam2 = np.asarray(lam_um, dtype=float) ** 2
        return self.L1 + self.L2 / (lam2 - self.L3) - self.L4 * lam2


@dataclass(frozen=True)
class CrystalConfig:
    ordinary: SellmeierCoefficients
    extraordinary: SellmeierCoefficients
    cut_angle_psi: float = 29.3
    length_mm: float = 0.5
    pump_wavelength_nm: float = 405.0
    # "fixed": the pump sees the cut angle psi. "signal-offset": the pump
    # angle to the optic axis is psi minus the internal signal angle.
    pump_angle_rule: str = "fixed"

    def __post_init__(self):
        if not 0 < self.cut_angle_psi < 90:
            raise DomainError(f"cut angle must be in (0, 90) deg, got {self.cut_angle_psi}")
        if not self.length_mm > 0:
            raise DomainError(f"crystal length must be positive, got {self.length_mm}")
        if self.pump_angle_rule not in PUMP_ANGLE_RULES:
            raise DomainError(f"pump_angle_rule must be one of {PUMP_ANGLE_RULES}")
        lam = self.pump_wavelength_nm * 1e-3
        for name, c in (("ordinary", self.ordinary), ("extraordinary", self.extraordinary)):
            if not c.valid_min_um <= lam <= c.valid_max_um:
                raise DomainError(
                    f"pump wavelength {self.pump_wavelength_nm} nm outside the {name} valid range"
                )


_COEFF_KEYS = [f"{axis}.L{m}" for axis in ("ordinary", "extraordinary") for m in range(1, 5)]
_FILE_FIELDS = {k: float for k in _COEFF_KEYS + ["valid_min_um", "valid_max_um"]}


def load_coefficients(path=None):
    """Read (ordinary, extraordinary) coefficients from a key-value file.

    With no path the bundled BBO file is used.
    """
    raw = read_kv(path if path is not None else data_path("bbo.txt"))
    values = coerce(_FILE_FIELDS, raw, where=str(path or "bbo.txt"))
    missing = sorted(set(_FILE_FIELDS) - set(values))
    if missing:
        raise ValueError(f"crystal file is missing keys: {', '.join(missing)}")
    rng = (values["valid_min_um"], values["valid_max_um"])

    def axis(name):
        return SellmeierCoefficients(*(values[f"{name}.L{m}"] for m in range(1, 5)), *rng)

    return axis("ordinary"), axis("extraordinary")


def load_crystal(path=None, **kwargs):
    ordinary, extraordinary = load_coefficients(path)
    return CrystalConfig(ordinary, extraordinary, **kwargs)


def default_crystal(**kwargs):
    """BBO with the bundled coefficients, cut at 29.3 deg, 405 nm pump."""
    return load_crystal(None, **kwargs)


def refractive_index(coeffs, lam_um):
    """Sellmeier index at ``lam_um`` (scalar or array, micrometres)."""
    lam = np.asarray(lam_um, dtype=float)
    if np.any(lam < coeffs.valid_min_um):
        raise DomainError(
            f"wavelength {lam.min():g} um below valid_min_um={coeffs.valid_min_um}"
        )
    if np.any(lam > coeffs.valid_max_um):
        raise DomainError(
            f"wavelength {lam.max():g} um above valid_max_um={coeffs.valid_max_um}"
        )
    rad = coeffs._radicand(lam)
    if np.any(rad <= 0):
        raise DomainError("non-positive Sellmeier radicand")
    n = np.sqrt(rad)
    return float(n) if n.ndim == 0 else n


def effective_index(n_o, n_e, phi_e):
    """Index of an extraordinary ray at ``phi_e`` degrees from the optic axis."""
    if np.any(np.asarray(n_o) <= 1) or np.any(np.asarray(n_e) <= 1):
        raise DomainError("indices must exceed 1")
    phi = np.asarray(phi_e, dtype=float)
    if np.any(phi < 0) or np.any(phi > 90):
        raise DomainError(f"phi_e must be within [0, 90] deg, got {phi_e}")
    return _neff(n_o, n_e, np.radians(phi))


def _neff(n_o, n_e, phi_rad):
    out = (np.cos(phi_rad) ** 2 / n_o**2 + np.sin(phi_rad) ** 2 / n_e**2) ** -0.5
    return float(out) if np.ndim(out) == 0 else out


def idler_wavelength(lambda_signal_nm, pump_nm):
    return lambda_signal_nm * pump_nm / (lambda_signal_nm - pump_nm)


def _mismatch_terms(lambda_signal_nm, theta_out_deg, crystal):
    """Return (k_s_z + k_i_z, k_p) in 1/um; NaN where the geometry is unphysical."""
    lp = crystal.pump_wavelength_nm * 1e-3
    ls = np.asarray(lambda_signal_nm, dtype=float) * 1e-3
    li = ls * lp / (ls - lp)
    s = np.sin(np.radians(np.asarray(theta_out_deg, dtype=float)))
    no_s = refractive_index(crystal.ordinary, ls)
    no_i = refractive_index(crystal.ordinary, li)
    sin_s = s / no_s
    sin_i = (li / ls) * s / no_i
    with np.errstate(invalid="ignore"):
        cos_s = np.sqrt(1 - sin_s**2)
        cos_i = np.sqrt(1 - sin_i**2)
    longitudinal = 2 * np.pi * no_s / ls * cos_s + 2 * np.pi * no_i / li * cos_i

    psi = np.radians(crystal.cut_angle_psi)
    if crystal.pump_angle_rule == "signal-offset":
        psi = psi - np.arcsin(np.clip(sin_s, -1, 1))
    n_p = _neff(
        refractive_index(crystal.ordinary, lp), refractive_index(crystal.extraordinary, lp), psi
    )
    k_p = 2 * np.pi * n_p / lp
    return longitudinal, k_p


def pm_residual(lambda_signal_nm, theta_signal_out, crystal):
    """Relative longitudinal phase mismatch ``(k_s,z + k_i,z - k_p) / k_p``.

    Positive below the emission cone, negative above it.
    """
    if not lambda_signal_nm > crystal.pump_wavelength_nm:
        raise DomainError("signal wavelength must exceed the pump wavelength")
    if not 0 <= theta_signal_out < 90:
        raise DomainError(f"external angle must be in [0, 90) deg, got {theta_signal_out}")
    longitudinal, k_p = _mismatch_terms(lambda_signal_nm, theta_signal_out, crystal)
    if not np.isfinite(longitudinal):
        raise DomainError(
            f"no real idler wavevector at {theta_signal_out} deg, {lambda_signal_nm} nm"
        )
    return float((longitudinal - k_p) / k_p)


def phase_mismatch(lambda_signal_nm, theta_signal_out, crystal):
    """Longitudinal mismatch ``k_p - k_s,z - k_i,z`` in 1/mm (input to sinc_envelope)."""
    longitudinal, k_p = _mismatch_terms(lambda_signal_nm, theta_signal_out, crystal)
    return (k_p - longitudinal) * 1e3


def solve_signal_angle(lambda_signal_nm, crystal):
    """External signal angle (deg) at which the mismatch vanishes.

    Raises NoPhaseMatchError when the residual does not change sign on
    [0, 15] deg.
    """
    if not lambda_signal_nm > crystal.pump_wavelength_nm:
        raise DomainError("signal wavelength must exceed the pump wavelength")
    grid = np.arange(0.0, SCAN_MAX_DEG + SCAN_STEP_DEG / 2, SCAN_STEP_DEG)
    longitudinal, k_p = _mismatch_terms(lambda_signal_nm, grid, crystal)
    res = (longitudinal - k_p) / k_p

    def f(theta):
        return pm_residual(lambda_signal_nm, theta, crystal)

    for j in range(len(grid) - 1):
        a, b = res[j], res[j + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0:
            return float(grid[j])
        if a * b < 0:
            return float(brentq(f, grid[j], grid[j + 1], xtol=ANGLE_XTOL_DEG, rtol=4 * np.finfo(float).eps))
    if np.isfinite(res[-1]) and res[-1] == 0:
        return float(grid[-1])
    raise NoPhaseMatchError(
        f"no phase-matched emission at {lambda_signal_nm} nm within "
        f"[0, {SCAN_MAX_DEG}] deg (psi={crystal.cut_angle_psi})"
    )


@dataclass(frozen=True)
class TuningCurvePoint:
    lambda_signal: float
    lambda_idler: float
    theta_signal_out: float
    theta_idler_out: float
    residual: float
    phase_matched: bool = True
    note: str = ""


def tuning_point(lambda_signal_nm, crystal):
    pump = crystal.pump_wavelength_nm
    lam_i = idler_wavelength(lambda_signal_nm, pump)
    try:
        theta_s = solve_signal_angle(lambda_signal_nm, crystal)
    except (NoPhaseMatchError, DomainError) as exc:
        nan = float("nan")
        return TuningCurvePoint(lambda_signal_nm, lam_i, nan, nan, nan, False, str(exc))
    # transverse momentum balance, expressed with external angles
    sin_i = lam_i / lambda_signal_nm * np.sin(np.radians(theta_s))
    theta_i = float(np.degrees(np.arcsin(sin_i)))
    residual = pm_residual(lambda_signal_nm, theta_s, crystal)
    return TuningCurvePoint(lambda_signal_nm, lam_i, theta_s, theta_i, residual)


def tuning_curve(lambda_min_nm, lambda_max_nm, steps, crystal):
    """Solved emission angles on a uniform signal-wavelength grid.

    ``steps == 1`` evaluates the single wavelength ``lambda_min_nm``. Points
    with no root are kept with ``phase_matched=False``.
    """
    pump = crystal.pump_wavelength_nm
    if steps == 1:
        grid = [float(lambda_min_nm)]
    else:
        if steps < 2:
            raise DomainError("steps must be >= 1")
        if not pump < lambda_min_nm < lambda_max_nm:
            raise DomainError("need pump < lambda_min < lambda_max")
        grid = np.linspace(lambda_min_nm, lambda_max_nm, int(steps)).tolist()
    return [tuning_point(lam, crystal) for lam in grid]


def sinc_envelope(delta_k, length_mm):
    """``|sin(x)/x|`` with ``x = delta_k * L / 2`` (delta_k in 1/mm, L in mm)."""
    if not length_mm > 0:
        raise DomainError("crystal length must be positive")
    x = np.asarray(delta_k, dtype=float) * length_mm / 2
    out = np.abs(np.sinc(x / np.pi))
    return float(out) if out.ndim == 0 else out

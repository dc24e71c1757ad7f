"""Double-exponential transmittance-vs-concentration model.

``T(C) = T0 exp(-C/C0) + Tinf exp(-C/Cinf)`` with T in percent and C in
ng/ul. Fitting is weighted least squares by a Levenberg-Marquardt style
damped Gauss-Newton iteration on ``(T0, log C0, Tinf, log Cinf)``.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IllConditionedError, InsufficientDataError, OutOfRangeError

MAX_ITER = 500
RSS_RTOL = 1e-10
GRAD_TOL = 1e-8


@dataclass(frozen=True)
class ConcentrationModel:
    T0: float
    C0: float
    Tinf: float
    Cinf: float

    def __post_init__(self):
        if not (self.C0 > 0 and self.Cinf > 0):
            raise DomainError("decay concentrations must be positive")

    def as_dict(self):
        return {"T0": self.T0, "C0": self.C0, "Tinf": self.Tinf, "Cinf": self.Cinf}


@dataclass(frozen=True)
class FitResult:
    model: ConcentrationModel
    rss: float
    uncertainties: dict
    converged: bool
    iterations: int
    gradient_norm: float


def eval_model(model, C):
    C = np.asarray(C, dtype=float)
    if np.any(C < 0):
        raise DomainError("concentration must be >= 0")
    out = model.T0 * np.exp(-C / model.C0) + model.Tinf * np.exp(-C / model.Cinf)
    return float(out) if out.ndim == 0 else out


def model_slope(model, C):
    """dT/dC in percent per ng/ul."""
    C = np.asarray(C, dtype=float)
    out = -(model.T0 / model.C0) * np.exp(-C / model.C0) - (model.Tinf / model.Cinf) * np.exp(
        -C / model.Cinf
    )
    return float(out) if out.ndim == 0 else out


# -- fitting ---------------------------------------------------------------


def _predict(p, C):
    T0, l0, Ti, li = p
    e0 = np.exp(-C * np.exp(-l0))
    ei = np.exp(-C * np.exp(-li))
    return T0 * e0 + Ti * ei, e0, ei


def _jacobian(p, C, e0, ei):
    T0, l0, Ti, li = p
    # d/dlogC0 of exp(-C/C0) = exp(-C/C0) * C/C0
    return np.column_stack([e0, T0 * e0 * C * np.exp(-l0), ei, Ti * ei * C * np.exp(-li)])


def _lm(p, C, T, w, max_iter=MAX_ITER):
    """Weighted Levenberg-Marquardt. Returns (params, rss, converged, iterations, |grad|)."""
    lam = 1e-3
    pred, e0, ei = _predict(p, C)
    r = (pred - T) * w
    rss = float(r @ r)
    grad_norm = np.inf
    for it in range(1, max_iter + 1):
        J = _jacobian(p, C, e0, ei) * w[:, None]
        g = J.T @ r
        grad_norm = float(np.linalg.norm(g))
        if grad_norm < GRAD_TOL:
            return p, rss, True, it, grad_norm
        A = J.T @ J
        improved = False
        while lam < 1e16:
            step = np.linalg.lstsq(A + lam * np.diag(np.diag(A) + 1e-12), -g, rcond=None)[0]
            trial = p + step
            pred_t, e0_t, ei_t = _predict(trial, C)
            r_t = (pred_t - T) * w
            rss_t = float(r_t @ r_t)
            if np.isfinite(rss_t) and rss_t <= rss:
                improved = True
                break
            lam *= 10.0
        if not improved:
            # no descent direction left at any damping: treat as stationary
            return p, rss, True, it, grad_norm
        change = (rss - rss_t) / max(rss, 1e-300)
        p, pred, e0, ei, r = trial, pred_t, e0_t, ei_t, r_t
        rss = rss_t
        lam = max(lam / 10.0, 1e-12)
        if change < RSS_RTOL or rss < 1e-28:
            return p, rss, True, it, grad_norm
    return p, rss, False, max_iter, grad_norm


def initial_guesses(C, T):
    """Heuristic start plus 8 multiplicative perturbations of the two decay scales."""
    C = np.asarray(C, dtype=float)
    T = np.asarray(T, dtype=float)
    positive = C[C > 0]
    geo = float(np.exp(np.mean(np.log(positive)))) if positive.size else 1.0
    base = (float(T.max() - T.min()), geo, float(T[np.argmin(C)]), float(C.max()))
    guesses = [base]
    for f0, fi in itertools.product((1 / 3, 1.0, 3.0), repeat=2):
        if (f0, fi) != (1.0, 1.0):
            guesses.append((base[0], base[1] * f0, base[2], base[3] * fi))
    return guesses


def _canonical(p):
    T0, l0, Ti, li = p
    if l0 > li:
        T0, l0, Ti, li = Ti, li, T0, l0
    return np.array([T0, l0, Ti, li])


def fit(points, max_iter=MAX_ITER):
    """Fit the model to ``(C, T, dT)`` triples (dT may be None or 0 for unit weight).

    Returns the best of all starts ranked by (converged, rss, parameters);
    output is canonicalised so that ``C0 <= Cinf``.
    """
    pts = [tuple(p) + (None,) * (3 - len(p)) for p in points]
    if len(pts) < 4:
        raise InsufficientDataError("need at least 4 points to fit 4 parameters")
    C = np.array([p[0] for p in pts], dtype=float)
    T = np.array([p[1] for p in pts], dtype=float)
    if np.any(C < 0) or len(np.unique(C)) != len(C):
        raise DomainError("concentrations must be distinct and >= 0")
    dT = [p[2] for p in pts]
    weighted = all(d is not None and d > 0 for d in dT)
    w = 1.0 / np.array(dT, dtype=float) if weighted else np.ones_like(C)

    results = []
    for T0, C0, Ti, Ci in initial_guesses(C, T):
        p0 = np.array([T0, math.log(C0), Ti, math.log(Ci)])
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            p, rss, ok, its, gn = _lm(p0, C, T, w, max_iter)
        if np.all(np.isfinite(p)):
            p = _canonical(p)
            results.append((not ok, rss, tuple(np.round(p, 12)), p, ok, its, gn))
    if not results:
        raise IllConditionedError("every start diverged")
    results.sort(key=lambda r: r[:3])
    _, rss, _, p, ok, its, gn = results[0]

    model = ConcentrationModel(float(p[0]), math.exp(p[1]), float(p[2]), math.exp(p[3]))
    return FitResult(model, rss, _uncertainties(p, C, T, w, weighted, rss), ok, its, gn)


def _uncertainties(p, C, T, w, weighted, rss):
    _, e0, ei = _predict(p, C)
    J = _jacobian(p, C, e0, ei) * w[:, None]
    dof = len(C) - 4
    scale = 1.0 if weighted else (rss / dof if dof > 0 else float("nan"))
    try:
        cov = np.linalg.inv(J.T @ J) * scale
        sd = np.sqrt(np.abs(np.diag(cov)))
    except np.linalg.LinAlgError:
        sd = np.full(4, np.nan)
    return {
        "T0": float(sd[0]),
        "C0": float(math.exp(p[1]) * sd[1]),
        "Tinf": float(sd[2]),
        "Cinf": float(math.exp(p[3]) * sd[3]),
    }


def fit_single_exponential(points):
    """Best ``A exp(-C/C1)`` (same weighting rules); returns (A, C1, rss)."""
    C = np.array([p[0] for p in points], dtype=float)
    T = np.array([p[1] for p in points], dtype=float)
    dT = [p[2] if len(p) > 2 else None for p in points]
    w = 1.0 / np.array(dT, float) if all(d is not None and d > 0 for d in dT) else np.ones_like(C)
    best = (np.inf, None, None)
    # variable projection: the amplitude is linear once C1 is fixed
    for logc in np.linspace(-6, 12, 3601):
        basis = np.exp(-C / math.exp(logc)) * w
        A = float(basis @ (T * w) / (basis @ basis))
        r = A * basis - T * w
        rss = float(r @ r)
        if rss < best[0]:
            best = (rss, A, math.exp(logc))
    rss, A, C1 = best
    return A, C1, rss


# -- inversion -------------------------------------------------------------


def invert(model, T, c_max=None, rtol=1e-10):
    """Concentration at which the model equals ``T`` (bisection)."""
    top = model.T0 + model.Tinf
    if T == top:
        return 0.0
    if c_max is None:
        c_max = 1e3 * max(model.C0, model.Cinf)
    bottom = eval_model(model, c_max)
    if not bottom < T <= top:
        raise OutOfRangeError(
            f"T={T} outside attainable range ({bottom:.6g}, {top:.6g}]", (bottom, top)
        )
    lo, hi = 0.0, float(c_max)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if eval_model(model, mid) > T:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


def concentration_uncertainty(model, T, dT):
    """``dT / |dT/dC|`` at the inverted concentration."""
    C = invert(model, T)
    slope = abs(model_slope(model, C))
    if not slope > 0 or not math.isfinite(slope):
        raise IllConditionedError(f"model slope vanishes at C={C:g}")
    return dT / slope

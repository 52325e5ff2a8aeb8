"""Two-parameter least-squares fit of eigenvalue-versus-scale curves.

Each eigenvalue rank is fitted separately by

    lam(tau) ~= amplitude / attenuation(alpha, tau)

with amplitude = n_assets * gamma_f > 0 and memory decay alpha in
[0, 1 - 1e-6].  The solver is a damped Gauss-Newton iteration: the Jacobian
column in amplitude is analytic (the model is linear in it), the column in
alpha uses a central finite difference, and steps are halved until the
residual decreases.  Because short curves can leave the objective nearly flat
in alpha, every fit multi-starts from alpha in {0.0, 0.1, ..., 0.9} (with the
amplitude profiled analytically at each start) and keeps the lowest-residual
candidate.  Weights are uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .moments import _attenuation_array

__all__ = ["EigenCurve", "FitResult", "fit_eigencurve", "relaxation_time"]

_ALPHA_MAX = 1.0 - 1e-6
_AMP_MIN = 1e-12
_FD_STEP = 5e-7
_STARTS = tuple(x / 10.0 for x in range(10))
_MAX_ITER = 200


@dataclass(frozen=True)
class EigenCurve:
    """One eigenvalue rank as a function of the aggregation scale.

    taus are strictly ascending positive integers (base steps); values are the
    matching positive eigenvalues; rank 1 is the largest eigenvalue.
    """

    taus: np.ndarray
    values: np.ndarray
    rank: int = 1

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if taus.ndim != 1 or values.shape != taus.shape or taus.size < 1:
            raise ValidationError("taus and values must be equal-length nonempty vectors")
        if taus[0] < 1 or np.any(np.diff(taus) <= 0):
            raise ValidationError("taus must be strictly ascending positive integers")
        if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
            raise ValidationError("curve values must be positive and finite")
        if int(self.rank) < 1:
            raise ValidationError("rank must be a positive integer")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "rank", int(self.rank))

    def __len__(self) -> int:
        return self.taus.size


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters for one eigenvalue rank.

    amplitude is n_assets * gamma_f; t_alpha is the relaxation time
    base_scale / ln(1/alpha) in the same time unit as the base scale (0.0 at
    the no-memory boundary alpha = 0).
    """

    alpha: float
    amplitude: float
    gamma_f: float
    t_alpha: float
    rss: float
    iterations: int
    converged: bool


def relaxation_time(alpha: float, base_scale_minutes: float = 1.0) -> float:
    """Memory decay time base_scale / ln(1/alpha) of the lead-lag kernel."""
    alpha = float(alpha)
    if alpha == 0.0:
        raise ValidationError("no memory: relaxation time undefined (zero)")
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must lie strictly inside (0, 1)")
    if base_scale_minutes <= 0.0:
        raise ValidationError("base_scale_minutes must be positive")
    return float(base_scale_minutes) / math.log(1.0 / alpha)


def _clamp_alpha(alpha: float) -> float:
    return min(max(alpha, 0.0), _ALPHA_MAX)


def _growth(alpha: float, taus: np.ndarray) -> np.ndarray:
    # model shape 1 / attenuation; amplitude multiplies this
    return 1.0 / _attenuation_array(alpha, taus)


def _growth_derivative(alpha: float, taus: np.ndarray) -> np.ndarray:
    # central finite difference, clamped into the admissible alpha range
    hi = min(alpha + _FD_STEP, _ALPHA_MAX)
    lo = max(alpha - _FD_STEP, 0.0)
    return (_growth(hi, taus) - _growth(lo, taus)) / (hi - lo)


def _rss(values: np.ndarray, amplitude: float, alpha: float, taus: np.ndarray) -> float:
    r = values - amplitude * _growth(alpha, taus)
    return float(r @ r)


def _profile_amplitude(values: np.ndarray, alpha: float, taus: np.ndarray) -> float:
    g = _growth(alpha, taus)
    return max(float(values @ g) / float(g @ g), _AMP_MIN)


def _gauss_newton(values: np.ndarray, taus: np.ndarray, amplitude: float,
                  alpha: float):
    rss = _rss(values, amplitude, alpha, taus)
    scale = float(values @ values)
    converged = False
    iterations = 0
    for iterations in range(1, _MAX_ITER + 1):
        g = _growth(alpha, taus)
        residual = values - amplitude * g
        jac = np.column_stack((g, amplitude * _growth_derivative(alpha, taus)))
        step, *_ = np.linalg.lstsq(jac, residual, rcond=None)

        improved = False
        damping = 1.0
        for _ in range(30):
            cand_amp = max(amplitude + damping * step[0], _AMP_MIN)
            cand_alpha = _clamp_alpha(alpha + damping * step[1])
            cand_rss = _rss(values, cand_amp, cand_alpha, taus)
            if cand_rss < rss:
                moved = math.hypot(cand_amp - amplitude, cand_alpha - alpha)
                amplitude, alpha, rss = cand_amp, cand_alpha, cand_rss
                improved = True
                if moved <= 1e-12 * (1.0 + abs(amplitude)):
                    converged = True
                break
            damping *= 0.5
        if not improved:
            # no decrease along the Gauss-Newton direction: stationary point
            converged = True
            break
        if converged or rss <= 1e-28 * max(scale, 1.0):
            converged = True
            break
    return amplitude, alpha, rss, iterations, converged


def fit_eigencurve(curve: EigenCurve, n_assets: int, base_scale_minutes: float = 1.0) -> FitResult:
    """Fit (alpha, amplitude) to one eigenvalue curve.

    Requires at least 3 points (two parameters plus one).  Returns the best
    multi-start candidate; if no start converges the best-effort parameters
    are returned with converged=False.
    """
    if len(curve) < 3:
        raise ValidationError("curve must contain at least 3 points to fit 2 parameters")
    n_assets = int(n_assets)
    if n_assets < 1:
        raise ValidationError("n_assets must be a positive integer")
    taus = curve.taus.astype(np.float64)
    # optimize on unit-normalized values so tolerances are scale-free and the
    # fit is equivariant under rescaling of the curve
    unit = float(np.max(curve.values))
    values = curve.values / unit

    best = None
    for start in _STARTS:
        amp0 = _profile_amplitude(values, start, taus)
        candidate = _gauss_newton(values, taus, amp0, start)
        if best is None or candidate[2] < best[2]:
            best = candidate
    amplitude, alpha, rss, iterations, converged = best
    amplitude *= unit
    rss *= unit * unit

    t_alpha = relaxation_time(alpha, base_scale_minutes) if alpha > 0.0 else 0.0
    return FitResult(
        alpha=alpha,
        amplitude=amplitude,
        gamma_f=amplitude / n_assets,
        t_alpha=t_alpha,
        rss=rss,
        iterations=iterations,
        converged=converged,
    )

"""Eigenvalue machinery for lead-lag factor correlation matrices.

A one-factor correlation matrix here has unit diagonal and off-diagonal
entries rho_i * rho_j, i.e. it is an identity-plus-rank-one perturbation
diag(1 - rho_i^2) + rho rho^T.  Its spectrum decomposes exactly:

* assets with rho_i = 0 contribute eigenvalue 1, once each;
* a group of m assets sharing the same z_i = 1 - rho_i^2 contributes the
  eigenvalue z_i with multiplicity m - 1;
* the remaining eigenvalues are the roots of the secular equation

      f(z) = sum_i rho_i^2 / (z - z_i) = 1,

  one root strictly inside each interval between consecutive distinct z
  values and one above the largest, bounded by z_max + sum_i rho_i^2.
  f is strictly decreasing between poles, so bisection is unconditionally
  convergent; Newton is avoided because of the poles at the bracket ends.

With F factors the correlation matrix is diag(1 - rho_i^2) + rho rho^T for an
N x F loading matrix.  Eigenvalues above 1 are the zeros of the reduced F x F
determinant det(I_F - phi(lam)) with
phi[f, g](lam) = sum_i rho[i, f] * rho[i, g] / (lam - 1 + rho_i^2); for large
eigenvalues they are close to the eigenvalues of the Gram matrix rho^T rho,
and across scales they all follow n_assets * strength_f / attenuation(tau).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ValidationError
from .fitting import EigenCurve
from .model import ModelSpec
from .moments import ScaleMatrix, _attenuation_array, attenuation

__all__ = [
    "LoadingVector",
    "LoadingMatrix",
    "Spectrum",
    "FactorStrengthMatrix",
    "correlation_loading",
    "loading_vector",
    "loading_matrix",
    "equicorrelation_eigenvalues",
    "secular_function",
    "secular_eigenvalues",
    "top_eigenvalue_approx",
    "reduced_determinant",
    "factor_eigenvalues",
    "gram_eigenvalues",
    "factor_strength_matrix",
    "factor_strengths",
    "factor_eigencurve",
    "dense_eigenvalues",
]

_UNIT_TOL = 1e-12       # slack on rho_i^2 <= 1
_GROUP_TOL = 1e-12      # absolute tolerance for grouping identical z values
_WIDTH_TOL = 1e-14      # bracket-width convergence target
_SINGULAR_TOL = 1e-12   # proximity of lambda to a pole of the resolvent


@dataclass(frozen=True)
class LoadingVector:
    """Correlation loadings rho_i at one aggregation scale (one factor)."""

    rho: np.ndarray
    scale: int = 1

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=np.float64)
        if rho.ndim != 1 or rho.size < 1:
            raise ValidationError("rho must be a nonempty vector")
        if not np.all(np.isfinite(rho)):
            raise ValidationError("loadings must be finite")
        if np.max(rho**2) > 1.0 + _UNIT_TOL:
            raise ValidationError("not a valid correlation structure: rho_i^2 exceeds 1")
        if int(self.scale) < 1:
            raise ValidationError("scale must be a positive integer")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "scale", int(self.scale))

    @property
    def n_assets(self) -> int:
        return self.rho.size


@dataclass(frozen=True)
class LoadingMatrix:
    """Per-factor correlation loadings rho[i, f] at one aggregation scale."""

    rho: np.ndarray
    scale: int = 1

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=np.float64)
        if rho.ndim != 2 or rho.size < 1:
            raise ValidationError("rho must be an (n_assets, n_factors) matrix")
        if not np.all(np.isfinite(rho)):
            raise ValidationError("loadings must be finite")
        if np.max((rho**2).sum(axis=1)) > 1.0 + _UNIT_TOL:
            raise ValidationError("not a valid correlation structure: row norm exceeds 1")
        if int(self.scale) < 1:
            raise ValidationError("scale must be a positive integer")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "scale", int(self.scale))

    @property
    def n_assets(self) -> int:
        return self.rho.shape[0]

    @property
    def n_factors(self) -> int:
        return self.rho.shape[1]

    def row_norms_sq(self) -> np.ndarray:
        return (self.rho**2).sum(axis=1)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in descending order with per-entry multiplicity counts.

    multiplicities[i] is the number of entries sharing exactly the value
    eigenvalues[i] (so a simple eigenvalue carries 1).  When eigenvectors are
    attached, column j pairs with eigenvalues[j].
    """

    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    eigenvectors: np.ndarray | None = None

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=np.float64)
        mult = np.asarray(self.multiplicities, dtype=np.int64)
        if vals.ndim != 1 or mult.shape != vals.shape:
            raise ValidationError("eigenvalues and multiplicities must be equal-length vectors")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("eigenvalues must be finite")
        if np.any(np.diff(vals) > 1e-9):
            raise ValidationError("eigenvalues must be in descending order")
        if np.any(mult < 1):
            raise ValidationError("multiplicities must be positive")
        if self.eigenvectors is not None:
            vecs = np.asarray(self.eigenvectors, dtype=np.float64)
            if vecs.shape != (vals.size, vals.size):
                raise ValidationError("eigenvectors must form a square matrix")
            object.__setattr__(self, "eigenvectors", vecs)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "multiplicities", mult)

    @property
    def trace(self) -> float:
        return float(self.eigenvalues.sum())


def _exact_multiplicities(values: np.ndarray) -> np.ndarray:
    uniq, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    return counts[inverse]


def _spectrum_from_values(values: np.ndarray, vectors: np.ndarray | None = None) -> Spectrum:
    order = np.argsort(values, kind="stable")[::-1]
    values = values[order]
    if vectors is not None:
        vectors = vectors[:, order]
    return Spectrum(values, _exact_multiplicities(values), vectors)


def correlation_loading(gamma: float, alpha: float, tau) -> float:
    """Loading rho(tau) = sqrt(gamma / (gamma + attenuation(alpha, tau))).

    gamma is the asset's signal-to-noise ratio (factor-driven variance over
    idiosyncratic variance at the base scale); tau may be math.inf.
    """
    gamma = float(gamma)
    if gamma <= 0.0:
        raise ValidationError("gamma must be positive")
    return math.sqrt(gamma / (gamma + attenuation(alpha, tau)))


def loading_matrix(spec: ModelSpec, tau: int) -> LoadingMatrix:
    """Per-factor loadings of the model at scale tau.

    beta_i^2 = sum_f factor_sigma_f^2 beta[i,f]^2 sets the per-asset
    signal-to-noise gamma_i = beta_i^2 / sigma_i^2, and
    rho[i, f] = factor_sigma_f * beta[i, f] / beta_i * rho_i(tau).
    Assets with beta_i = 0 get zero loadings.
    """
    eta = attenuation(spec.alpha, tau)
    scaled = spec.beta * spec.factor_sigma[None, :]
    beta_sq = (scaled**2).sum(axis=1)
    gamma = beta_sq / spec.sigma**2
    with np.errstate(divide="ignore", invalid="ignore"):
        rho_i = np.sqrt(gamma / (gamma + eta))
        direction = scaled / np.sqrt(beta_sq)[:, None]
    rho = np.where(beta_sq[:, None] > 0.0, direction * rho_i[:, None], 0.0)
    return LoadingMatrix(rho, scale=int(tau))


def loading_vector(spec: ModelSpec, tau: int) -> LoadingVector:
    """One-factor loadings of the model at scale tau (requires n_factors=1)."""
    if spec.n_factors != 1:
        raise ValidationError("loading_vector requires a one-factor spec")
    return LoadingVector(loading_matrix(spec, tau).rho[:, 0], scale=int(tau))


def equicorrelation_eigenvalues(n_assets: int, rho_sq: float) -> Spectrum:
    """Closed-form spectrum of the equal-loading (equicorrelated) matrix:
    1 + (N-1)*rho_sq once and 1 - rho_sq with multiplicity N-1."""
    n = int(n_assets)
    if n < 1:
        raise ValidationError("n_assets must be a positive integer")
    rho_sq = float(rho_sq)
    if not 0.0 <= rho_sq <= 1.0:
        raise ValidationError("rho_sq must lie in [0, 1]")
    values = np.full(n, 1.0 - rho_sq)
    values[0] = 1.0 + (n - 1) * rho_sq
    return _spectrum_from_values(values)


def _nonzero_poles(loadings: LoadingVector):
    r2 = np.minimum(loadings.rho**2, 1.0)  # clip the <=1e-12 overshoot allowed by the type
    nonzero = np.flatnonzero(r2 > 0.0)
    return r2, nonzero


def secular_function(loadings: LoadingVector, z: float) -> float:
    """f(z) = sum over nonzero loadings of rho_i^2 / (z - (1 - rho_i^2))."""
    r2, nonzero = _nonzero_poles(loadings)
    poles = 1.0 - r2[nonzero]
    with np.errstate(divide="ignore"):
        return float(np.sum(r2[nonzero] / (z - poles)))


def _group_poles(z_sorted: np.ndarray):
    # indices where a new group of (near-)identical z values starts
    starts = np.flatnonzero(np.concatenate(([True], np.diff(z_sorted) > _GROUP_TOL)))
    ends = np.append(starts[1:], z_sorted.size)
    return starts, ends


def _bisect_secular(z_groups: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """One root of sum_g w_g / (z - z_g) = 1 per bracket.

    Brackets are (z_g, z_{g+1}) plus (z_max, z_max + sum(w)]; the function
    decreases from +inf to -inf (or to below 1) on each, so the endpoint signs
    are known without evaluation.
    """
    m = z_groups.size
    lo = z_groups.copy()
    hi = np.empty(m)
    hi[:-1] = z_groups[1:]
    hi[-1] = z_groups[-1] + weights.sum()
    # pure width-driven bisection: |f - 1| alone is a poor proxy for the root
    # error where f is flat (tiny weights), and width < 1e-14 implies both
    for _ in range(240):
        mid = 0.5 * (lo + hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            fmid = (weights[:, None] / (mid[None, :] - z_groups[:, None])).sum(axis=0)
        above = fmid > 1.0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.all(hi - lo < _WIDTH_TOL):
            break
    return 0.5 * (lo + hi)


def _null_basis(row: np.ndarray) -> np.ndarray:
    # orthonormal basis of the hyperplane orthogonal to `row` (size m -> m-1 vectors)
    _, _, vh = np.linalg.svd(row[None, :])
    return vh[1:].T


def secular_eigenvalues(loadings: LoadingVector, with_vectors: bool = False) -> Spectrum:
    """Exact spectrum of the one-factor correlation matrix via its secular
    equation.

    Handles zero loadings (eigenvalue 1), grouped identical loadings
    (eigenvalue 1 - rho^2 with multiplicity m - 1), and bracketed bisection
    for the remaining roots, converged to bracket width < 1e-14 (which also
    puts |f(z) - 1| below 1e-12 except on the poles' immediate flanks).
    Eigenvectors are computed only on demand; degenerate subspaces get an
    orthonormal basis.
    """
    r2, nonzero = _nonzero_poles(loadings)
    n = r2.size
    values = []
    builders = []  # callables filling the eigenvector columns lazily

    zero_idx = np.setdiff1d(np.arange(n), nonzero)
    for idx in zero_idx:
        values.append(1.0)
        if with_vectors:
            def unit(i=idx):
                v = np.zeros(n)
                v[i] = 1.0
                return v[:, None]
            builders.append(unit)

    if nonzero.size:
        z_all = 1.0 - r2[nonzero]
        order = np.argsort(z_all, kind="stable")
        z_sorted = z_all[order]
        idx_sorted = nonzero[order]
        starts, ends = _group_poles(z_sorted)
        reps = np.array([z_sorted[a:b].mean() for a, b in zip(starts, ends)])
        weights = np.array([(1.0 - z_sorted[a:b]).sum() for a, b in zip(starts, ends)])

        for a, b, rep in zip(starts, ends, reps):
            count = b - a
            if count > 1:
                values.extend([rep] * (count - 1))
                if with_vectors:
                    members = idx_sorted[a:b]

                    def tied(members=members):
                        basis = _null_basis(loadings.rho[members])
                        block = np.zeros((n, basis.shape[1]))
                        block[members, :] = basis
                        return block
                    builders.append(tied)

        roots = _bisect_secular(reps, weights)
        values.extend(roots.tolist())
        if with_vectors:
            for root in roots:
                def simple(lam=root):
                    v = np.zeros(n)
                    v[nonzero] = loadings.rho[nonzero] / (lam - (1.0 - r2[nonzero]))
                    return (v / np.linalg.norm(v))[:, None]
                builders.append(simple)

    values = np.asarray(values)
    vectors = np.hstack([b() for b in builders]) if with_vectors else None
    return _spectrum_from_values(values, vectors)


def top_eigenvalue_approx(loadings: LoadingVector) -> float:
    """Large-N approximation of the largest eigenvalue: sum_i rho_i^2.

    Always a lower bound on the exact value; the gap is at most
    1 - min_i rho_i^2, so the approximation degrades at small N.
    """
    return float(np.sum(loadings.rho**2))


def _reduced_determinant_raw(rho: np.ndarray, row_sq: np.ndarray, lam: float) -> float:
    denom = lam - (1.0 - row_sq)
    phi = rho.T @ (rho / denom[:, None])
    return float(np.linalg.det(np.eye(rho.shape[1]) - phi))


def reduced_determinant(loadings: LoadingMatrix, lam: float) -> float:
    """det(I_F - phi(lam)) whose zeros above 1 are correlation eigenvalues.

    phi[f, g](lam) = sum_i rho[i, f] rho[i, g] / (lam - 1 + rho_i^2).  The
    resolvent is singular at lam = 1 - rho_i^2; values of lam within 1e-12 of
    a singularity are rejected.
    """
    lam = float(lam)
    row_sq = loadings.row_norms_sq()
    if np.min(np.abs(lam - (1.0 - row_sq))) < _SINGULAR_TOL:
        raise DataError(f"lambda={lam!r} coincides with a resolvent singularity 1 - rho_i^2")
    return _reduced_determinant_raw(loadings.rho, row_sq, lam)


def gram_eigenvalues(loadings: LoadingMatrix) -> np.ndarray:
    """Descending eigenvalues of the F x F Gram matrix rho^T rho.

    These approximate the large correlation eigenvalues (the diagonal
    1 - rho_i^2 background is neglected, an O(1) absolute error).
    """
    vals = np.linalg.eigvalsh(loadings.rho.T @ loadings.rho)
    return np.clip(vals[::-1], 0.0, None)


def factor_eigenvalues(loadings: LoadingMatrix, grid_points: int = 512) -> np.ndarray:
    """Correlation eigenvalues strictly above 1, via the reduced determinant.

    Candidate brackets come from the Gram eigenvalues expanded by +/-50% (and
    widened to cover the guaranteed root interval [mu, mu + 1]); each bracket
    is scanned on a uniform grid for sign changes of the determinant, which
    are then bisected.  Assumes simple roots, which holds for factors with
    separated strengths.
    """
    rho = loadings.rho
    row_sq = loadings.row_norms_sq()
    mu = gram_eigenvalues(loadings)

    intervals = []
    for m in mu:
        lo = max(1.0 + 1e-9, 0.5 * m)
        hi = max(1.5 * m, m + 1.0) + 1e-9
        if hi > lo:
            intervals.append([lo, hi])
    if not intervals:
        return np.empty(0)
    intervals.sort()
    merged = [intervals[0]]
    for lo, hi in intervals[1:]:
        if lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    roots = []
    for lo, hi in merged:
        xs = np.linspace(lo, hi, grid_points + 1)
        ds = np.array([_reduced_determinant_raw(rho, row_sq, x) for x in xs])
        for i in range(grid_points):
            a, b, da, db = xs[i], xs[i + 1], ds[i], ds[i + 1]
            if da == 0.0:
                roots.append(a)
                continue
            if da * db >= 0.0:
                continue
            for _ in range(100):
                mid = 0.5 * (a + b)
                dm = _reduced_determinant_raw(rho, row_sq, mid)
                if dm == 0.0 or (b - a) < 1e-12:
                    a = b = mid
                    break
                if da * dm < 0.0:
                    b, db = mid, dm
                else:
                    a, da = mid, dm
            roots.append(0.5 * (a + b))

    roots.sort(reverse=True)
    out = []
    for root in roots:
        if not out or out[-1] - root > 1e-9:
            out.append(root)
    return np.asarray(out)


@dataclass(frozen=True)
class FactorStrengthMatrix:
    """Scale-independent factor strengths.

    values[f, g] = factor_sigma_f * factor_sigma_g / N
                   * sum_i beta[i, f] * beta[i, g] / sigma_i^2

    Symmetric positive semi-definite; its descending eigenvalues are the
    per-factor strengths entering n_assets * strength / attenuation(tau).
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError("factor-strength matrix must be square")
        if float(np.max(np.abs(arr - arr.T))) > 1e-12 * max(1.0, float(np.max(np.abs(arr)))):
            raise ValidationError("factor-strength matrix must be symmetric")
        if float(np.min(np.linalg.eigvalsh(arr))) < -1e-12:
            raise ValidationError("factor-strength matrix must be positive semi-definite")
        object.__setattr__(self, "values", arr)

    def strengths(self) -> np.ndarray:
        """Descending eigenvalues, clipped at zero."""
        return np.clip(np.linalg.eigvalsh(self.values)[::-1], 0.0, None)


def factor_strength_matrix(spec: ModelSpec) -> FactorStrengthMatrix:
    """Cross-sectional mean of volatility-normalized squared sensitivities."""
    weighted = spec.beta / spec.sigma[:, None]
    core = (weighted.T @ weighted) / spec.n_assets
    values = core * np.outer(spec.factor_sigma, spec.factor_sigma)
    return FactorStrengthMatrix(0.5 * (values + values.T))


def factor_strengths(spec: ModelSpec) -> np.ndarray:
    """Descending factor strengths gamma_f of a model spec."""
    return factor_strength_matrix(spec).strengths()


def factor_eigencurve(n_assets: int, strength: float, alpha: float, taus,
                      rank: int = 1) -> EigenCurve:
    """Predicted eigenvalue-versus-scale curve for one factor:
    n_assets * strength / attenuation(alpha, tau) on the given grid.

    Strictly increasing in tau for alpha > 0, flat at n_assets * strength for
    alpha = 0.
    """
    if float(strength) <= 0.0:
        raise ValidationError("strength must be positive")
    if not 0.0 <= float(alpha) < 1.0:
        raise ValidationError("alpha must satisfy 0 <= alpha < 1")
    taus = np.asarray(list(taus), dtype=np.int64)
    values = int(n_assets) * float(strength) / _attenuation_array(float(alpha), taus)
    return EigenCurve(taus, values, rank=rank)


def dense_eigenvalues(matrix: ScaleMatrix, with_vectors: bool = False) -> Spectrum:
    """Full spectrum of a symmetric matrix (LAPACK symmetric eigensolver).

    Serves as the independent dense oracle for the secular and reduced-
    determinant paths.  Rejects matrices that are not symmetric within
    tolerance; per-pair residuals satisfy ||A v - lam v|| <= 1e-9 ||A||.
    """
    a = matrix.values
    sym = 0.5 * (a + a.T)
    if with_vectors:
        vals, vecs = np.linalg.eigh(sym)
        return _spectrum_from_values(vals, vecs)
    vals = np.linalg.eigvalsh(sym)
    return _spectrum_from_values(vals)

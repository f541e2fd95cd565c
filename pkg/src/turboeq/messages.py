"""Value types and algebra for discrete and Gaussian messages.

Gaussians live in two parameterizations: moment form (mean, variance or
covariance) and canonical form (precision matrix W, potential vector xi,
density proportional to exp(-0.5 s'Ws + xi's)).  Canonical form is closed
under products and can represent rank-deficient (degenerate) messages,
which moment form cannot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VARIANCE_FLOOR = 1e-10
VARIANCE_CAP = 1e8
PRECISION_JITTER = 1e-9
COND_MAX = 1e14


class IllConditionedPrecision(RuntimeError):
    """Precision matrix not invertible within cond_max even after jitter."""


def _as_float_array(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class DiscreteSymbolPmf:
    """Normalized mass function over an ordered real symbol alphabet."""

    alphabet: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        alphabet = _as_float_array(self.alphabet)
        weights = _as_float_array(self.weights)
        if alphabet.ndim != 1 or weights.shape != alphabet.shape:
            raise ValueError("alphabet and weights must be 1-d arrays of equal length")
        if np.any(np.diff(alphabet) <= 0):
            raise ValueError("alphabet values must be strictly increasing")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        total = weights.sum()
        if total <= 0:
            raise ValueError("weights must have positive sum")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "weights", weights / total)

    @classmethod
    def uniform(cls, alphabet) -> "DiscreteSymbolPmf":
        alphabet = _as_float_array(alphabet)
        return cls(alphabet, np.full(alphabet.shape, 1.0 / alphabet.size))

    @classmethod
    def from_log_weights(cls, alphabet, log_weights) -> "DiscreteSymbolPmf":
        lw = _as_float_array(log_weights)
        w = np.exp(lw - lw.max())
        return cls(alphabet, w)


@dataclass(frozen=True)
class Gaussian1D:
    """Scalar Gaussian in moment form.

    A variance at or above ``VARIANCE_CAP`` is the distinguished
    non-informative value: such a message carries zero precision and its
    mean is ignored by the algebra below.
    """

    mean: float
    var: float

    def __post_init__(self):
        if not self.var > 0:
            raise ValueError(f"variance must be positive, got {self.var}")

    @classmethod
    def noninformative(cls, cap: float = VARIANCE_CAP) -> "Gaussian1D":
        return cls(0.0, cap)

    def is_noninformative(self, cap: float = VARIANCE_CAP) -> bool:
        return self.var >= cap


@dataclass(frozen=True)
class GaussianVec:
    """Multivariate Gaussian in moment form (mean vector, covariance)."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _as_float_array(self.mean)
        cov = _as_float_array(self.cov)
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise ValueError("cov must be square and match mean length")
        if np.max(np.abs(cov - cov.T)) > 1e-10 * max(1.0, np.max(np.abs(cov))):
            raise ValueError("cov must be symmetric")
        if d and np.linalg.eigvalsh(cov).min() < -1e-10:
            raise ValueError("cov must be positive semidefinite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class CanonicalGaussianVec:
    """Gaussian in canonical (information) form, rank deficiency allowed."""

    precision: np.ndarray
    potential: np.ndarray

    def __post_init__(self):
        prec = _as_float_array(self.precision)
        pot = _as_float_array(self.potential)
        d = pot.shape[0]
        if prec.shape != (d, d):
            raise ValueError("precision must be square and match potential length")
        if np.max(np.abs(prec - prec.T)) > 1e-10 * max(1.0, np.max(np.abs(prec))):
            raise ValueError("precision must be symmetric")
        if d and np.linalg.eigvalsh(prec).min() < -1e-10 * max(1.0, np.max(np.abs(prec))):
            raise ValueError("precision must be positive semidefinite")
        object.__setattr__(self, "precision", prec)
        object.__setattr__(self, "potential", pot)

    @property
    def dim(self) -> int:
        return self.potential.shape[0]

    @classmethod
    def zero(cls, d: int) -> "CanonicalGaussianVec":
        return cls(np.zeros((d, d)), np.zeros(d))


def pmf_moments(p: DiscreteSymbolPmf) -> tuple[float, float]:
    """Mean and (nonnegative) variance of a normalized symbol pmf."""
    mean = float(p.weights @ p.alphabet)
    var = float(p.weights @ (p.alphabet**2) - mean**2)
    return mean, max(var, 0.0)


def project_to_gaussian(
    p: DiscreteSymbolPmf,
    floor: float = VARIANCE_FLOOR,
    cap: float = VARIANCE_CAP,
) -> Gaussian1D:
    """Moment-matched (KL-minimizing) Gaussian of a pmf, variance clamped."""
    mean, var = pmf_moments(p)
    return Gaussian1D(mean, float(np.clip(var, floor, cap)))


def gaussian_multiply(a: Gaussian1D, b: Gaussian1D, cap: float = VARIANCE_CAP) -> Gaussian1D:
    """Pointwise product of two scalar Gaussians (precision addition)."""
    wa = 0.0 if a.is_noninformative(cap) else 1.0 / a.var
    wb = 0.0 if b.is_noninformative(cap) else 1.0 / b.var
    w = wa + wb
    if w <= 1.0 / cap:
        return Gaussian1D.noninformative(cap)
    v = 1.0 / w
    return Gaussian1D(v * (wa * a.mean + wb * b.mean), v)


def gaussian_divide(
    numerator: Gaussian1D,
    denominator: Gaussian1D,
    floor: float = VARIANCE_FLOOR,
    cap: float = VARIANCE_CAP,
) -> Gaussian1D:
    """Quotient of scalar Gaussians by precision subtraction.

    A non-positive resulting precision (the quotient is not a valid
    density) falls back to the non-informative message N(0, cap);
    callers that need to count these events should use
    :func:`gaussian_divide_arrays`.
    """
    m, v, _ = gaussian_divide_arrays(
        np.array([numerator.mean]),
        np.array([numerator.var]),
        np.array([denominator.mean]),
        np.array([denominator.var]),
        floor=floor,
        cap=cap,
    )
    return Gaussian1D(float(m[0]), float(v[0]))


def gaussian_divide_arrays(
    num_mean: np.ndarray,
    num_var: np.ndarray,
    den_mean: np.ndarray,
    den_var: np.ndarray,
    floor: float = VARIANCE_FLOOR,
    cap: float = VARIANCE_CAP,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Elementwise guarded Gaussian division.

    Returns (means, variances, fallback_mask); the mask marks entries where
    the precision difference was non-positive and the non-informative
    fallback N(0, cap) was substituted.
    """
    w_num = np.where(num_var >= cap, 0.0, 1.0 / num_var)
    w_den = np.where(den_var >= cap, 0.0, 1.0 / den_var)
    w = w_num - w_den
    fallback = w <= 0.0
    w_safe = np.where(fallback, 1.0, w)
    mean = (w_num * num_mean - w_den * den_mean) / w_safe
    var = 1.0 / w_safe
    mean = np.where(fallback, 0.0, mean)
    var = np.where(fallback, cap, np.clip(var, floor, cap))
    # Clamping to the cap re-enters the non-informative regime: zero the mean
    # there too so the distinguished value stays canonical.
    mean = np.where(var >= cap, 0.0, mean)
    var = np.where(var >= cap, cap, var)
    return mean, var, fallback


def canonical_combine(terms) -> CanonicalGaussianVec:
    """BP product of canonical Gaussian factors: parameters add."""
    terms = list(terms)
    if not terms:
        raise ValueError("need at least one term")
    d = terms[0].dim
    if any(t.dim != d for t in terms):
        raise ValueError("dimension mismatch in canonical_combine")
    prec = np.zeros((d, d))
    pot = np.zeros(d)
    for t in terms:
        prec = prec + t.precision
        pot = pot + t.potential
    return CanonicalGaussianVec(prec, pot)


def canonical_to_moment(
    c: CanonicalGaussianVec,
    jitter: float = PRECISION_JITTER,
    cond_max: float = COND_MAX,
) -> GaussianVec:
    """Invert canonical form to moment form, jittering near-singular precisions."""
    W = c.precision
    eig = np.linalg.eigvalsh(W)
    if eig.min() < jitter:
        W = W + jitter * np.eye(c.dim)
        eig = eig + jitter
    if eig.max() / eig.min() > cond_max:
        raise IllConditionedPrecision(
            f"precision condition number {eig.max() / eig.min():.3e} exceeds {cond_max:.3e}"
        )
    cov = np.linalg.inv(W)
    cov = 0.5 * (cov + cov.T)
    mean = np.linalg.solve(W, c.potential)
    return GaussianVec(mean, cov)

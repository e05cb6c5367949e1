"""Geometry of SL(n,R): KAK factorization, the growth metric, Lie
derivatives, Weyl-chamber integration and spherical averages.

Conventions used throughout:

* ``|A|`` is the normalized Hilbert-Schmidt norm, |A|^2 = tr(A^T A)/n.
* ``L(g) = max(||g||, ||g^{-1}||)`` (operator norms), so L >= 1 with
  equality exactly on the orthogonal group.
* Haar measure on SO(n) is the probability measure; Haar measure on the
  full group is normalized as  d(mu) = prod_{i<j} sinh(Z_i - Z_j) dZ dk1 dk2
  over the KAK chart with the descending chamber parametrized by its
  first n-1 coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import AccuracyError, DomainError, InputError, NumericError

__all__ = [
    "GroupElement",
    "CartanDecomposition",
    "LieBasis",
    "MultiIndex",
    "identity",
    "kak_decompose",
    "length",
    "dist_to_identity",
    "lie_derivative",
    "default_step",
    "weyl_ball_volume",
    "harish_chandra_xi",
    "distortion_constant",
    "mc_l2_norm",
    "haar_so",
    "haar_ball_sample",
    "hs_norm",
]


def hs_norm(a):
    """Normalized Hilbert-Schmidt norm |a| with |identity| = 1."""
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    return np.sqrt(np.sum(a * a, axis=(-2, -1)) / n)


@dataclass(frozen=True)
class GroupElement:
    """An n x n real matrix of determinant one."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise InputError(f"expected a square matrix of size >= 2, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InputError("matrix entries must be finite")
        det = float(np.linalg.det(m))
        scale = max(1.0, float(np.abs(m).max()) ** m.shape[0])
        if abs(det - 1.0) > 1e-10 * scale:
            raise DomainError(f"determinant {det} too far from 1", measured=det)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def inverse(self) -> "GroupElement":
        return GroupElement(np.linalg.inv(self.entries))

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.entries @ other.entries)


def identity(n: int) -> GroupElement:
    return GroupElement(np.eye(n))


@dataclass(frozen=True)
class CartanDecomposition:
    """KAK factorization g = k1 diag(e^{s_i}) k2 with s_1 >= ... >= s_n."""

    k1: np.ndarray
    exponents: np.ndarray
    k2: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.k1 @ np.diag(np.exp(self.exponents)) @ self.k2


def kak_decompose(g: GroupElement) -> CartanDecomposition:
    """KAK factorization through the singular value decomposition.

    Both orthogonal factors are returned in SO(n); the exponents are the
    logarithms of the singular values, sorted descending with zero sum.
    """
    m = g.entries
    try:
        u, sig, vt = np.linalg.svd(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy rarely fails here
        raise NumericError(f"SVD failed: {exc}") from exc
    if np.linalg.det(u) < 0:
        # det(u)det(v) = sign(det g) = +1, so both flips happen together
        u = u.copy()
        vt = vt.copy()
        u[:, -1] *= -1.0
        vt[-1, :] *= -1.0
    s = np.log(sig)
    s = s - s.mean()  # exact zero sum despite rounding
    return CartanDecomposition(k1=u, exponents=s, k2=vt)


def length(g: GroupElement) -> float:
    """max(||g||, ||g^{-1}||), computed from the Cartan exponents."""
    dec = kak_decompose(g)
    s = dec.exponents
    return float(np.exp(max(s[0], -s[-1])))


def dist_to_identity(g: GroupElement) -> float:
    """Distance-type function vanishing only at the identity.

    Concrete representative max(min(|g-e|, 1), L(g)-1): comparable to
    |g-e| near the identity and to L(g) at infinity, and positive on
    SO(n) \\ {e} where L-1 alone would vanish.
    """
    m = g.entries
    near = min(hs_norm(m - np.eye(g.n)), 1.0)
    return max(near, length(g) - 1.0)


# ---------------------------------------------------------------------------
# Lie algebra basis and derivatives


@dataclass(frozen=True)
class LieBasis:
    """Orthonormal basis of the traceless matrices under <X,Y> = tr(X^T Y)."""

    n: int
    mats: np.ndarray = field(repr=False)

    @classmethod
    def standard(cls, n: int) -> "LieBasis":
        mats = []
        for i in range(n):
            for j in range(n):
                if i != j:
                    e = np.zeros((n, n))
                    e[i, j] = 1.0
                    mats.append(e)
        for k in range(1, n):
            d = np.zeros((n, n))
            d[np.arange(k), np.arange(k)] = 1.0
            d[k, k] = -float(k)
            mats.append(d / math.sqrt(k * (k + 1)))
        return cls(n=n, mats=np.array(mats))

    def __len__(self) -> int:
        return self.mats.shape[0]

    def __getitem__(self, j: int) -> np.ndarray:
        return self.mats[j]


@dataclass(frozen=True)
class MultiIndex:
    """Ordered tuple of basis directions; order matters, repeats allowed."""

    indices: tuple

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(j) for j in self.indices))

    @property
    def order(self) -> int:
        return len(self.indices)


def default_step(g: GroupElement, order: int = 1) -> float:
    """Finite-difference step scaled to the distance from the identity.

    Deep nesting loses nearly all significand bits at the base relative
    step, so orders above 2 widen the step; with one Richardson level the
    added truncation error stays far below the rounding noise it avoids.
    """
    rel = {1: 1e-4, 2: 1e-4, 3: 1e-3, 4: 3e-3}.get(max(order, 1), 1e-2)
    return max(1e-4, rel * dist_to_identity(g))


def max_derivative_order(n: int) -> int:
    """Regularity order [n^2/2] + 1 used by the certification sweeps."""
    return n * n // 2 + 1


def lie_derivative(m, g: GroupElement, gamma, basis: LieBasis, h: float | None = None,
                   max_order: int | None = None) -> complex:
    """Iterated derivative of a symbol along the flows s -> g exp(s X_j).

    ``gamma`` lists basis directions outermost first, so the last index is
    applied to ``m`` before the others.  Each directional derivative is a
    central difference with one Richardson extrapolation level.

    ``m`` is called with a raw (n, n) ndarray.
    """
    if isinstance(gamma, MultiIndex):
        idx = gamma.indices
    else:
        idx = tuple(int(j) for j in gamma)
    limit = max_order if max_order is not None else max_derivative_order(g.n)
    if len(idx) > limit:
        raise InputError(f"derivative order {len(idx)} exceeds configured maximum {limit}")
    if h is None:
        h = default_step(g, len(idx))
    if not (h > 0):
        raise NumericError("step must be positive")

    flow_cache: dict[tuple[int, float], np.ndarray] = {}

    def flow(j: int, s: float) -> np.ndarray:
        key = (j, s)
        if key not in flow_cache:
            flow_cache[key] = expm(s * basis[j])
        return flow_cache[key]

    def deriv(mat: np.ndarray, order: tuple, step: float) -> complex:
        if not order:
            val = m(mat)
            if val is None or not np.all(np.isfinite([np.real(val), np.imag(val)])):
                raise NumericError("symbol evaluation returned a non-finite value")
            return complex(val)
        j, rest = order[0], order[1:]

        def central(hh: float) -> complex:
            if hh < 1e-300:
                raise NumericError("finite-difference step underflow")
            plus = deriv(mat @ flow(j, hh), rest, step)
            minus = deriv(mat @ flow(j, -hh), rest, step)
            return (plus - minus) / (2.0 * hh)

        d1 = central(step)
        d2 = central(step / 2.0)
        return (4.0 * d2 - d1) / 3.0

    return deriv(g.entries, idx, h)


# ---------------------------------------------------------------------------
# Weyl chamber integration

_GL_CACHE: dict = {}


def _gauss_legendre(npts: int):
    if npts not in _GL_CACHE:
        _GL_CACHE[npts] = np.polynomial.legendre.leggauss(npts)
    return _GL_CACHE[npts]


def _sinh_weight(z: np.ndarray) -> np.ndarray:
    """prod_{i<j} sinh(z_i - z_j) on descending rows of z."""
    n = z.shape[-1]
    w = np.ones(z.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            w = w * np.sinh(z[..., i] - z[..., j])
    return w


def _weyl_volume_quad(n: int, r: float, npts: int) -> float:
    x, w = _gauss_legendre(npts)
    if n == 2:
        t = 0.5 * r * (x + 1.0)
        return float(np.sum(w * np.sinh(2.0 * t)) * 0.5 * r)
    if n == 3:
        a = 0.5 * r * (x + 1.0)
        wa = w * 0.5 * r
        total = 0.0
        for ai, wi in zip(a, wa):
            lo, hi = -0.5 * ai, min(ai, r - ai)
            if hi <= lo:
                continue
            b = lo + 0.5 * (hi - lo) * (x + 1.0)
            z = np.stack([np.full_like(b, ai), b, -ai - b], axis=-1)
            total += wi * np.sum(w * _sinh_weight(z)) * 0.5 * (hi - lo)
        return float(total)
    raise InputError("tensor quadrature implemented for n in {2, 3}")


def _weyl_volume_mc(n: int, r: float, samples: int, seed: int) -> tuple[float, float]:
    rng = np.random.default_rng(seed)
    y = rng.uniform(-r, r, size=(samples, n - 1))
    z = np.concatenate([y, -y.sum(axis=1, keepdims=True)], axis=1)
    z.sort(axis=1)
    z = z[:, ::-1]
    keep = np.maximum(z[:, 0], -z[:, -1]) <= r
    vals = np.where(keep, _sinh_weight(z), 0.0)
    box = (2.0 * r) ** (n - 1) / math.factorial(n)
    est = box * vals.mean()
    err = box * vals.std(ddof=1) / math.sqrt(samples)
    return float(est), float(err)


def weyl_ball_volume(n: int, r: float, mc_samples: int = 200_000, seed: int = 7) -> float:
    """Volume of the ball {log L(g) <= r} in the Haar normalization above.

    Tensor Gauss-Legendre for n = 2, 3; Monte Carlo for n = 4, 5 with a
    5% self-consistency requirement.
    """
    if n < 2 or n > 5:
        raise InputError("n must be in {2, ..., 5}")
    if not (r > 0):
        raise DomainError("radius must be positive", measured=r)
    if n <= 3:
        v1 = _weyl_volume_quad(n, r, 120)
        v2 = _weyl_volume_quad(n, r, 180)
        if abs(v1 - v2) > 0.05 * max(abs(v2), 1e-300):
            raise AccuracyError("chamber quadrature did not converge", estimate=abs(v1 - v2))
        return v2
    est, err = _weyl_volume_mc(n, r, mc_samples, seed)
    if est <= 0 or err > 0.05 * est:
        raise AccuracyError("chamber Monte Carlo above 5% relative error", estimate=err)
    return est


# ---------------------------------------------------------------------------
# Haar sampling and the spherical function


def haar_so(n: int, size: int, rng) -> np.ndarray:
    """Haar-distributed stack of SO(n) matrices.

    QR orthogonalization of Gaussian matrices with the positive-diagonal
    sign correction, then a last-column flip onto determinant +1.
    """
    a = rng.standard_normal((size, n, n))
    q, r = np.linalg.qr(a)
    d = np.sign(np.einsum("sii->si", r))
    d[d == 0] = 1.0
    q = q * d[:, None, :]
    neg = np.linalg.det(q) < 0
    q[neg, :, -1] *= -1.0
    return q


def _modular_exponents(n: int) -> np.ndarray:
    return np.array([n + 1 - 2 * (i + 1) for i in range(n)], dtype=float)


def harish_chandra_xi(g: GroupElement, samples: int = 100_000, seed: int = 0):
    """Monte Carlo value of the spherical function Xi(g) with its error.

    Xi(g) averages Delta(gk)^{-1/2} over Haar k in SO(n); Delta is read
    off the QR factorization gk = k' p through the diagonal of p with the
    upper-triangular modular weights n+1-2i.
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    n = g.n
    rng = np.random.default_rng(seed)
    expo = _modular_exponents(n)
    total = 0.0
    total_sq = 0.0
    done = 0
    chunk = 65536
    while done < samples:
        m = min(chunk, samples - done)
        k = haar_so(n, m, rng)
        gk = g.entries @ k
        _, r = np.linalg.qr(gk)
        d = np.abs(np.einsum("sii->si", r))
        if np.any(d <= 0) or not np.all(np.isfinite(d)):
            raise NumericError("QR breakdown in modular function evaluation")
        vals = np.exp(-0.5 * (np.log(d) @ expo))
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    err = math.sqrt(var / samples)
    return mean, err


def haar_ball_sample(n: int, radius: float, size: int, seed: int):
    """Weighted sample of the Haar ball {log L <= radius}.

    Returns (matrices, weights, scale) such that for any F,
    integral of F over the ball is approximately
    scale * mean(weights * F(matrices)).
    """
    rng = np.random.default_rng(seed)
    y = rng.uniform(-radius, radius, size=(size, n - 1))
    z = np.concatenate([y, -y.sum(axis=1, keepdims=True)], axis=1)
    z.sort(axis=1)
    z = z[:, ::-1]
    keep = np.maximum(z[:, 0], -z[:, -1]) <= radius
    w = np.where(keep, _sinh_weight(z), 0.0)
    k1 = haar_so(n, size, rng)
    k2 = haar_so(n, size, rng)
    mats = k1 * np.exp(z)[:, None, :] @ k2  # k1 @ diag(e^z) @ k2
    scale = (2.0 * radius) ** (n - 1) / math.factorial(n)
    return mats, w, scale


def mc_l2_norm(phi, n: int, radius: float, haar_samples: int = 40_000, seed: int = 0) -> float:
    """L2 norm of phi against the haar_ball_sample measure (same seed/radius)."""
    mats, w, scale = haar_ball_sample(n, radius, haar_samples, seed)
    vals = np.asarray(phi(mats), dtype=float)
    return math.sqrt(max(scale * float(np.mean(w * vals * vals)), 0.0))


def distortion_constant(phi, omega_samples, haar_samples: int = 40_000, seed: int = 0,
                        radius: float | None = None, norm_tol: float = 1e-3) -> float:
    """sup over the supplied set of (1/2) integral |phi(gh) - phi(h)|^2 dh.

    ``phi`` must be nonnegative and L2-normalized to within ``norm_tol``
    against the Monte Carlo measure of :func:`haar_ball_sample` (same
    seed and radius).  ``phi`` is called on a stack of matrices.
    """
    elems = [g if isinstance(g, GroupElement) else GroupElement(g) for g in omega_samples]
    if not elems:
        raise InputError("need at least one group element")
    n = elems[0].n
    if radius is None:
        sup_rad = getattr(phi, "support_radius", None)
        if sup_rad is None:
            raise InputError("phi needs a support_radius (log L units) or pass radius=")
        radius = float(sup_rad) + 0.5
    mats, w, scale = haar_ball_sample(n, radius, haar_samples, seed)
    vals = np.asarray(phi(mats), dtype=float)
    if np.any(vals < -1e-12):
        raise DomainError("phi must be nonnegative")
    norm_sq = scale * float(np.mean(w * vals * vals))
    if abs(norm_sq - 1.0) > norm_tol:
        raise DomainError(
            f"phi is not L2-normalized over the Monte Carlo measure (|phi|_2^2 = {norm_sq:.6f})",
            measured=norm_sq,
        )
    # (1/2) int |phi(gh) - phi(h)|^2 dh  ==  |phi|^2 - <lambda(g)phi, phi>
    # by unimodularity; the overlap form keeps the integrand inside
    # supp(phi), where the sample actually lives.
    worst = 0.0
    for g in elems:
        shifted = np.asarray(phi(g.entries @ mats), dtype=float)
        overlap = scale * float(np.mean(w * shifted * vals))
        worst = max(worst, norm_sq - overlap)
    return worst

"""Euclidean symbol analysis on R^d.

Dyadic partitions of unity, the fractional-laplacian length and its
constant, grid Mikhlin constants, transform-based Sobolev norms, local
matrix inversion and the homogeneous twisted symbol sweep.

Fourier convention: f^(xi) = int f(x) exp(-2 pi i <x, xi>) dx, so
Plancherel holds without extra factors and frequencies are cycles per
unit length (fftfreq units).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import AccuracyError, DomainError, InputError, NumericError
from .symbols import EuclideanSymbol

__all__ = [
    "DyadicPartition",
    "GridSpec",
    "lp_partition_value",
    "sigma_partition_value",
    "frac_laplacian_constant",
    "frac_laplacian_length",
    "mikhlin_constant",
    "mikhlin_profile",
    "sobolev_norm_h",
    "sobolev_norm_w",
    "local_inversion",
    "twisted_homogeneous_mikhlin",
]


def _smoothstep(t):
    """C-infinity increasing step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class DyadicPartition:
    """Radial plateau eta with chi_{B1} <= eta <= chi_{B2}.

    The default profile is the canonical mollified step, so every
    partition value is deterministic.  ``j_range`` is the default dyadic
    window for whole-partition sums.
    """

    eta: object = None
    j_range: tuple = (-40, 40)

    def __post_init__(self):
        if self.eta is None:
            object.__setattr__(self, "eta", lambda r: _smoothstep(2.0 - np.asarray(r, dtype=float)))

    def eta_of_point(self, xi):
        xi = np.asarray(xi, dtype=float)
        r = np.linalg.norm(np.atleast_1d(xi), axis=-1) if xi.ndim else np.abs(xi)
        return self.eta(r)

    def partition_sum(self, xi):
        """Sum of squared partition values over the dyadic window; equals
        1 wherever the window covers the dyadic shell of xi."""
        lo, hi = self.j_range
        return sum(lp_partition_value(self, j, xi) ** 2 for j in range(lo, hi + 1))


def _radius(xi):
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0:
        return np.abs(xi)
    return np.linalg.norm(xi, axis=-1)


def lp_partition_value(p: DyadicPartition, j: int, xi):
    """phi_j(xi) = (eta(2^-j xi) - eta(2^{1-j} xi))^{1/2}."""
    r = _radius(xi)
    val = p.eta(np.ldexp(r, -j)) - p.eta(np.ldexp(r, 1 - j))
    return np.sqrt(np.maximum(val, 0.0))


def sigma_partition_value(p: DyadicPartition, n_width: int, j: int, xi):
    """Averaged plateau sigma_j = (sum of phi_k^2, k = j-N..j+N) / (2N+1)."""
    if n_width < 1:
        raise InputError("plateau width must be >= 1")
    r = _radius(xi)
    # telescoping: sum of phi_k^2 over k in [a, b] = eta(2^-b r) - eta(2^{1-a} r)
    total = p.eta(np.ldexp(r, -(j + n_width))) - p.eta(np.ldexp(r, 1 - (j - n_width)))
    return np.maximum(total, 0.0) / (2 * n_width + 1)


# ---------------------------------------------------------------------------
# Fractional laplacian length


@lru_cache(maxsize=None)
def _cosine_moment(d: int, eps: float, npts: int = 200) -> float:
    """Mean of |c|^{2 eps} for c the first coordinate of a uniform point
    on the (d-1)-sphere.  Written as a theta integral (c = sin theta)
    so the integrand is smooth for every d."""
    if d == 1:
        return 1.0
    x, w = np.polynomial.legendre.leggauss(npts)
    theta = 0.25 * math.pi * (x + 1.0)  # [0, pi/2]
    dens = np.cos(theta) ** (d - 2)
    num = float(np.sum(w * dens * np.sin(theta) ** (2.0 * eps)))
    den = float(np.sum(w * dens))
    return num / den


def frac_laplacian_constant(d: int, eps: float) -> float:
    """Constant c in  2 int (1 - cos(2 pi <xi, x>)) dx / |x|^{d+2 eps}
    = c |xi|^{2 eps}.

    The radial factor int_0^inf (1 - cos(a r)) r^{-1-2 eps} dr carries the
    oscillation and is evaluated in closed form,
    a^{2 eps} pi / (2 Gamma(1+2 eps) sin(pi eps)); the remaining
    direction-cosine moment is a 1-D quadrature.
    """
    if not (0.0 < eps < 1.0):
        raise DomainError("eps must lie strictly inside (0, 1)", measured=eps)
    if d < 1:
        raise InputError("dimension must be >= 1")
    surface = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    radial = math.pi / (2.0 * math.gamma(1.0 + 2.0 * eps) * math.sin(math.pi * eps))
    return 2.0 * surface * (2.0 * math.pi) ** (2.0 * eps) * radial * _cosine_moment(d, eps)


def frac_laplacian_length(d: int, eps: float, xi):
    """psi_eps(xi) = c_{d,eps} |xi|^{2 eps}; returns (value, constant)."""
    c = frac_laplacian_constant(d, eps)
    return c * _radius(xi) ** (2.0 * eps), c


# ---------------------------------------------------------------------------
# Grids and Mikhlin constants


def _directions(d: int, count: int) -> np.ndarray:
    """Deterministic direction design: coordinate axes, then fixed
    pseudorandom unit vectors to reach the requested count."""
    dirs = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        dirs.append(e.copy())
        dirs.append(-e)
    if d == 2:
        for t in np.arange(count):
            ang = 2.0 * math.pi * (t + 0.5) / count
            dirs.append(np.array([math.cos(ang), math.sin(ang)]))
    elif len(dirs) < count:
        rng = np.random.default_rng(0x5EED)
        extra = rng.standard_normal((count - len(dirs), d))
        extra /= np.linalg.norm(extra, axis=1, keepdims=True)
        dirs.extend(extra)
    return np.array(dirs)


@dataclass(frozen=True)
class GridSpec:
    """Evaluation design: log-spaced radii with a fixed angular design,
    plus the uniform box used by the transform-based norms."""

    d: int
    radii: np.ndarray = field(repr=False)
    directions: np.ndarray = field(repr=False)
    box_halfwidth: float = 8.0
    box_points: int = 256
    step_fraction: float = 1e-2

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        if radii.size == 0 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
            raise InputError("radii must be positive and strictly increasing")
        if len(self.directions) == 0 or self.box_points < 8 or self.box_halfwidth <= 0:
            raise InputError("grid needs directions and a positive box")
        object.__setattr__(self, "radii", radii)

    @classmethod
    def default(cls, d: int, levels: int = 49, r_min: float = 2.0 ** -12,
                r_max: float = 2.0 ** 12, n_directions: int = 16,
                box_halfwidth: float = 8.0, box_points: int = 256) -> "GridSpec":
        radii = np.geomspace(r_min, r_max, levels)
        return cls(d=d, radii=radii, directions=_directions(d, n_directions),
                   box_halfwidth=box_halfwidth, box_points=box_points)

    def points(self) -> np.ndarray:
        return (self.radii[:, None, None] * self.directions[None, :, :]).reshape(-1, self.d)


def _multi_indices(d: int, order: int):
    """All Euclidean multi-indices with 1 <= |gamma| <= order."""
    out = []
    for total in range(1, order + 1):
        for combo in itertools.combinations_with_replacement(range(d), total):
            gamma = [0] * d
            for c in combo:
                gamma[c] += 1
            out.append(tuple(gamma))
    return out


def _partial_derivative(m, xi: np.ndarray, gamma, h: float) -> complex:
    """Nested central differences for the mixed partial d^gamma m."""
    for i, gi in enumerate(gamma):
        if gi > 0:
            e = np.zeros_like(xi)
            e[i] = h
            reduced = tuple(g - (1 if k == i else 0) for k, g in enumerate(gamma))
            return (_partial_derivative(m, xi + e, reduced, h)
                    - _partial_derivative(m, xi - e, reduced, h)) / (2.0 * h)
    return complex(m(xi))


def mikhlin_profile(m: EuclideanSymbol, order: int, grid: GridSpec) -> np.ndarray:
    """Per-radius sup of |xi|^{|gamma|} |d^gamma m(xi)| over the design."""
    if order < 0:
        raise InputError("order must be >= 0")
    gammas = _multi_indices(grid.d, order)
    prof = np.zeros(len(grid.radii))
    for ir, r in enumerate(grid.radii):
        worst = 0.0
        for u in grid.directions:
            xi = r * u
            val = abs(complex(m(xi)))
            if not math.isfinite(val):
                raise NumericError(f"symbol not finite at |xi| = {r}")
            worst = max(worst, val)
            h = grid.step_fraction * r
            for gamma in gammas:
                dv = _partial_derivative(m, xi, gamma, h)
                mag = abs(dv) * r ** sum(gamma)
                if not math.isfinite(mag):
                    raise NumericError(f"derivative {gamma} not finite at |xi| = {r}")
                worst = max(worst, mag)
        prof[ir] = worst
    return prof


def mikhlin_constant(m: EuclideanSymbol, order: int, grid: GridSpec) -> float:
    """Grid sup of |xi|^{|gamma|} |d^gamma m| over |gamma| <= order.

    A lower estimate of the true sup: finite design, origin excluded.
    """
    return float(mikhlin_profile(m, order, grid).max())


# ---------------------------------------------------------------------------
# Transform-based Sobolev norms


def _box_axes(grid: GridSpec):
    n, half = grid.box_points, grid.box_halfwidth
    x = -half + (2.0 * half / n) * np.arange(n)
    freq = np.fft.fftfreq(n, d=2.0 * half / n)
    return x, freq


def _sample_box(m: EuclideanSymbol, grid: GridSpec) -> np.ndarray:
    x, _ = _box_axes(grid)
    axes = np.meshgrid(*([x] * m.d), indexing="ij")
    pts = np.stack(axes, axis=-1)
    return np.asarray(m(pts), dtype=complex)


def _check_leakage(samples: np.ndarray, grid: GridSpec, name: str, tol: float = 1e-8):
    n = grid.box_points
    edge = max(1, n // 10)
    total = float(np.sum(np.abs(samples) ** 2))
    if total == 0.0:
        return
    mask = np.zeros(samples.shape, dtype=bool)
    for ax in range(samples.ndim):
        sl = [slice(None)] * samples.ndim
        sl[ax] = slice(0, edge)
        mask[tuple(sl)] = True
        sl[ax] = slice(n - edge, n)
        mask[tuple(sl)] = True
    leak = float(np.sum(np.abs(samples[mask]) ** 2)) / total
    if leak > tol:
        raise AccuracyError(f"{name}: support leaks outside the box (fraction {leak:.2e})",
                            estimate=leak)


def sobolev_norm_h(m: EuclideanSymbol, alpha: float, grid: GridSpec,
                   refine_check: float | None = None) -> float:
    """Classical H^2_alpha norm ||(1+|.|^2)^{alpha/2} m^||_2 on the box grid.

    With ``refine_check`` set, the norm is recomputed on the half grid
    and must agree to that relative tolerance.
    """
    value = _transform_norm_h(m, alpha, grid)
    if refine_check is not None:
        coarse_grid = GridSpec(d=grid.d, radii=grid.radii, directions=grid.directions,
                               box_halfwidth=grid.box_halfwidth,
                               box_points=max(grid.box_points // 2, 8))
        coarse = _transform_norm_h(m, alpha, coarse_grid)
        if abs(coarse - value) > refine_check * max(value, 1e-300):
            raise AccuracyError("transform norm not refinement-stable",
                                estimate=abs(coarse - value))
    return value


def _transform_norm_h(m: EuclideanSymbol, alpha: float, grid: GridSpec) -> float:
    samples = _sample_box(m, grid)
    _check_leakage(samples, grid, "sobolev_norm_h")
    n, half = grid.box_points, grid.box_halfwidth
    cell = (2.0 * half / n) ** m.d
    fhat = np.fft.fftn(samples) * cell
    _, freq = _box_axes(grid)
    grids = np.meshgrid(*([freq] * m.d), indexing="ij")
    xi_sq = sum(f * f for f in grids)
    weight = (1.0 + xi_sq) ** alpha
    norm_sq = float(np.sum(weight * np.abs(fhat) ** 2)) / (2.0 * half) ** m.d
    return math.sqrt(norm_sq)


def sobolev_norm_w(m: EuclideanSymbol, eps: float, grid: GridSpec) -> float:
    """Dilation-invariant norm || |.|^{d/2+eps} (sqrt(psi_eps) m)^ ||_2.

    Requires m to vanish near the origin; the inner radius is taken from
    the symbol metadata or probed on a small shell.
    """
    d = m.d
    inner = m.inner_radius
    if inner is None:
        probe_r = grid.box_halfwidth * 1e-3
        probe = probe_r * _directions(d, 8)
        if np.max(np.abs(np.asarray(m(probe), dtype=complex))) > 1e-12:
            raise DomainError("symbol support touches the origin")
    elif inner <= 0:
        raise DomainError("symbol support touches the origin", measured=inner)
    c = frac_laplacian_constant(d, eps)
    samples = _sample_box(m, grid)
    _check_leakage(samples, grid, "sobolev_norm_w")
    x, freq = _box_axes(grid)
    axes = np.meshgrid(*([x] * d), indexing="ij")
    r = np.sqrt(sum(a * a for a in axes))
    gfun = math.sqrt(c) * r ** eps * samples
    n, half = grid.box_points, grid.box_halfwidth
    cell = (2.0 * half / n) ** d
    ghat = np.fft.fftn(gfun) * cell
    grids = np.meshgrid(*([freq] * d), indexing="ij")
    xi = np.sqrt(sum(f * f for f in grids))
    norm_sq = float(np.sum(xi ** (d + 2.0 * eps) * np.abs(ghat) ** 2)) / (2.0 * half) ** d
    return math.sqrt(norm_sq)


# ---------------------------------------------------------------------------
# Local inversion and the homogeneous twisted sweep


def local_inversion(a, tol: float = 1e-12) -> np.ndarray:
    """I(A) = (A + e)^{-1} - e, an involution where A + e is invertible."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError("expected a square matrix")
    shifted = a + np.eye(a.shape[0])
    cond = np.linalg.cond(shifted)
    if not math.isfinite(cond) or cond > 1.0 / tol:
        raise DomainError("A + e is numerically singular", measured=cond)
    return np.linalg.inv(shifted) - np.eye(a.shape[0])


def twisted_homogeneous_mikhlin(sigma, eps: float, order: int, grid: GridSpec) -> float:
    """sup over g in the sample of the Mikhlin constant of
    M_g(xi) = |xi|^eps / |g . xi|^eps, with xi an n x n matrix (d = n^2)
    acted on by left multiplication.
    """
    elems = list(sigma)
    if not elems:
        raise InputError("empty sample")
    n = elems[0].n
    if grid.d != n * n:
        raise InputError(f"grid dimension {grid.d} != n^2 = {n*n}")
    worst = 0.0
    for g in elems:
        gm = g.entries

        def ev(x, gm=gm):
            x = np.asarray(x, dtype=float)
            shape = x.shape[:-1]
            mats = x.reshape(shape + (n, n))
            acted = np.einsum("ij,...jk->...ik", gm, mats)
            num = np.linalg.norm(x, axis=-1)
            den = np.sqrt(np.sum(acted * acted, axis=(-2, -1)))
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(den > 0, (num / np.where(den > 0, den, 1.0)) ** eps, 0.0)
            return out

        sym = EuclideanSymbol(d=n * n, evaluator=ev, name="twist")
        worst = max(worst, mikhlin_constant(sym, order, grid))
    return worst

"""Higher chain rule machinery and the diagonal-conjugation frames.

Partial Bell polynomials drive the exact higher-derivative composition
formula and an assertable bound with fully computed constants.  The
frames describe conjugation of a planar rotation by a one-parameter
diagonal matrix: the resulting operator norm and normalized
Hilbert-Schmidt norm are explicit in the rotation parameter, and the
inverse changes of variable (from norm value back to the rotation
parameter) have closed-form derivatives with fast decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, InputError, RangeError

__all__ = [
    "DerivativeJet",
    "bell_polynomial",
    "bell_coefficient_mass",
    "faa_di_bruno",
    "composition_derivative_bound",
    "shear_operator_norm",
    "CompositionFrame",
    "opnorm_coordinate",
    "opnorm_coordinate_derivative",
    "hs_coordinate",
    "rank_choice",
    "so_n1_trace_coefficients",
    "so_n1_embedded_matrix",
    "rotation_matrix",
]


@dataclass(frozen=True)
class DerivativeJet:
    """First k derivatives of a scalar function at a point; values[i] is
    the (i+1)-th derivative."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def order(self) -> int:
        return len(self.values)


def bell_polynomial(k: int, j: int, z) -> float:
    """Partial Bell polynomial B_{k,j}(z_1, ..., z_{k-j+1})."""
    if not (1 <= j <= k):
        raise InputError("need 1 <= j <= k")
    z = [float(v) for v in z]
    if len(z) < k - j + 1:
        raise InputError(f"need at least {k - j + 1} arguments, got {len(z)}")
    table = {(0, 0): 1.0}

    def get(kk: int, jj: int) -> float:
        if jj == 0:
            return 1.0 if kk == 0 else 0.0
        if kk < jj:
            return 0.0
        key = (kk, jj)
        if key not in table:
            table[key] = sum(math.comb(kk - 1, i - 1) * z[i - 1] * get(kk - i, jj - 1)
                             for i in range(1, kk - jj + 2))
        return table[key]

    return get(k, j)


@lru_cache(maxsize=None)
def bell_coefficient_mass(k: int) -> int:
    """Exact total coefficient mass sum_j B_{k,j}(1, ..., 1)."""
    return round(sum(bell_polynomial(k, j, [1.0] * k) for j in range(1, k + 1)))


def faa_di_bruno(f_jet: DerivativeJet, phi_jet: DerivativeJet, k: int) -> float:
    """k-th derivative of a composition from the two jets.

    ``f_jet`` holds derivatives of the outer function at the inner value;
    ``phi_jet`` holds derivatives of the inner function at the point.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    if f_jet.order < k or phi_jet.order < k:
        raise InputError(f"jets must have order >= {k}")
    total = 0.0
    for j in range(1, k + 1):
        total += bell_polynomial(k, j, phi_jet.values[: k - j + 1]) * f_jet.values[j - 1]
    return total


def composition_derivative_bound(f_norm: float, phi_jet_sups, k: int) -> float:
    """Assertable bound C_k * f_norm * max_j sup|d^j phi|^{k/j}.

    C_k is the exact Bell coefficient mass of row k, so the bound can
    never be violated by the exact composition formula.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    sups = [abs(float(v)) for v in phi_jet_sups]
    if len(sups) < k:
        raise InputError(f"need sups of orders 1..{k}")
    peak = max(sups[j - 1] ** (k / j) for j in range(1, k + 1))
    return bell_coefficient_mass(k) * abs(f_norm) * peak


# ---------------------------------------------------------------------------
# Conjugated-rotation frames


def shear_operator_norm(x):
    """Operator norm of a determinant-one 2 x 2 matrix whose squared
    Hilbert-Schmidt norm is 2 + 4 x^2; equals e^u at x = sinh(u)."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    return np.sqrt(1.0 + 2.0 * x2 + 2.0 * np.sqrt(x2 + x2 * x2))


def rotation_matrix(n: int, delta: float) -> np.ndarray:
    """Rotation by arccos(delta) in the first two coordinates of R^n."""
    if not (-1.0 <= delta <= 1.0):
        raise DomainError("delta must lie in [-1, 1]", measured=delta)
    k = np.eye(n)
    s = math.sqrt(max(1.0 - delta * delta, 0.0))
    k[0, 0] = delta
    k[0, 1] = -s
    k[1, 0] = s
    k[1, 1] = delta
    return k


@dataclass(frozen=True)
class CompositionFrame:
    """Diagonal matrix D = diag(e^r, e^s x (m-1), e^t x (n-m)) in SL(n).

    ``m`` is the rank-choice target (m = n reproduces the plain frame,
    where t is vacuous).  The exponents satisfy r + (m-1)s + (n-m)t = 0.
    """

    n: int
    m: int
    r: float
    s: float
    t: float

    @classmethod
    def create(cls, n: int, r: float, m: int | None = None) -> "CompositionFrame":
        if n < 3:
            raise InputError("n must be >= 3")
        m = n if m is None else m
        if not (3 <= m <= n):
            raise InputError("need 3 <= m <= n")
        if not (r > 0):
            raise DomainError("r must be positive", measured=r)
        s = -(n - m + 2) / (n + m - 2) * r
        t = (m - 2) / (n + m - 2) * r
        return cls(n=n, m=m, r=r, s=s, t=t)

    @classmethod
    def from_opnorm_coupling(cls, n: int, x: float, m: int | None = None) -> "CompositionFrame":
        """Frame with x at the lower edge of the operator-norm window,
        where the coordinate-change derivatives are smallest."""
        m = n if m is None else m
        if not (x > 1.0):
            raise DomainError("x must exceed 1", measured=x)
        r = 0.5 * (1.0 + n / (m - 2)) * math.log(x)
        return cls.create(n, r, m)

    def d_matrix(self) -> np.ndarray:
        diag = [math.exp(self.r)] + [math.exp(self.s)] * (self.m - 1) \
            + [math.exp(self.t)] * (self.n - self.m)
        return np.diag(diag)

    def conjugated_rotation(self, delta: float) -> np.ndarray:
        d = self.d_matrix()
        return d @ rotation_matrix(self.n, delta) @ d

    # operator-norm window [x_min, x_max] swept by delta in [0, 1]
    @property
    def x_min(self) -> float:
        return math.exp(self.r + self.s)

    @property
    def x_max(self) -> float:
        return math.exp(2.0 * self.r)

    def opnorm_of_delta(self, delta) -> np.ndarray:
        return self.x_min * shear_operator_norm(np.asarray(delta) * math.sinh(self.r - self.s))

    # normalized Hilbert-Schmidt window [hs_min, hs_max]
    @property
    def hs_min(self) -> float:
        val = (2.0 * math.exp(2.0 * (self.r + self.s))
               + (self.m - 2) * math.exp(4.0 * self.s)
               + (self.n - self.m) * math.exp(4.0 * self.t)) / self.n
        return math.sqrt(val)

    @property
    def hs_max(self) -> float:
        val = (math.exp(4.0 * self.r)
               + (self.m - 1) * math.exp(4.0 * self.s)
               + (self.n - self.m) * math.exp(4.0 * self.t)) / self.n
        return math.sqrt(val)

    def hs_of_delta(self, delta) -> np.ndarray:
        delta = np.asarray(delta, dtype=float)
        a2, b2 = self.hs_min ** 2, self.hs_max ** 2
        return np.sqrt(a2 + delta * delta * (b2 - a2))


_DOMAIN_SLACK = 1e-9


def opnorm_coordinate(frame: CompositionFrame, x) -> np.ndarray:
    """Rotation parameter delta realizing operator norm x; inverse of
    ``opnorm_of_delta`` on [x_min, x_max] -> [0, 1]."""
    x = np.asarray(x, dtype=float)
    lo, hi = frame.x_min, frame.x_max
    if np.any(x < lo * (1 - _DOMAIN_SLACK)) or np.any(x > hi * (1 + _DOMAIN_SLACK)):
        raise DomainError(f"x outside [{lo:.6g}, {hi:.6g}]")
    return (x / lo - lo / x) / (2.0 * math.sinh(frame.r - frame.s))


def opnorm_coordinate_derivative(frame: CompositionFrame, j: int, x) -> np.ndarray:
    """Closed-form j-th derivative of :func:`opnorm_coordinate`."""
    if j < 1:
        raise InputError("derivative order must be >= 1")
    x = np.asarray(x, dtype=float)
    lo, hi = frame.x_min, frame.x_max
    if np.any(x < lo * (1 - _DOMAIN_SLACK)) or np.any(x > hi * (1 + _DOMAIN_SLACK)):
        raise DomainError(f"x outside [{lo:.6g}, {hi:.6g}]")
    e2r, e2s = math.exp(2.0 * frame.r), math.exp(2.0 * frame.s)
    if j == 1:
        return (1.0 + math.exp(2.0 * (frame.r + frame.s)) / (x * x)) / (e2r - e2s)
    sign = 1.0 if (j - 1) % 2 == 0 else -1.0
    return sign * math.factorial(j) / ((1.0 / e2s - 1.0 / e2r) * x ** (j + 1))


def hs_coordinate(frame: CompositionFrame, x) -> np.ndarray:
    """Rotation parameter delta realizing normalized HS norm x; inverse
    of ``hs_of_delta`` on [hs_min, hs_max] -> [0, 1]."""
    x = np.asarray(x, dtype=float)
    a, b = frame.hs_min, frame.hs_max
    if np.any(x < a * (1 - _DOMAIN_SLACK)) or np.any(x > b * (1 + _DOMAIN_SLACK)):
        raise DomainError(f"x outside [{a:.6g}, {b:.6g}]")
    num = np.maximum((x / a) ** 2 - 1.0, 0.0)
    return np.sqrt(num / ((b / a) ** 2 - 1.0))


# ---------------------------------------------------------------------------
# Rank choice and the Lorentz-group coefficients


def rank_choice(k: int, p: float, n: int) -> tuple:
    """Smallest rank m with (m-2)/2 - (m-1)/p > k, and the decay
    exponent c_k = n / (m - 2) it produces.

    The window k < beta <= k + 1/2 - 1/p keeps beta away from the
    integers, which the derivative estimates require.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    if p <= 2.0:
        raise DomainError("p must exceed 2", measured=p)
    alpha0 = (n - 2) / 2.0 - (n - 1) / p
    if k >= alpha0:
        raise RangeError(f"k = {k} is not below alpha0 = {alpha0:.6g}")
    q = math.floor((2 * k + 1) / (1.0 - 2.0 / p))
    m = q + 2
    beta = (m - 2) / 2.0 - (m - 1) / p
    if not (k < beta <= k + 0.5 - 1.0 / p + 1e-12):
        raise RangeError(f"rank choice window violated: beta = {beta}")
    if abs(beta - round(beta)) < 1e-12:
        raise RangeError(f"beta = {beta} landed on an integer")
    if m > n:
        raise RangeError(f"required rank {m} exceeds n = {n}")
    return m, n / q


def so_n1_trace_coefficients(n: int, r: float):
    """Quadratic trace law for the Lorentz-embedded conjugated rotation.

    tr((D k_delta D)^T (D k_delta D)) = a delta^2 + b delta + c with
    a = 4 sinh^4 r, b = 2 sinh^2(2r), c = n - 3 + 4 cosh^4 r; returns
    (a, b, c, g) where g inverts the quadratic on [c, a + b + c].
    """
    if not (r > 0):
        raise DomainError("r must be positive", measured=r)
    a = 4.0 * math.sinh(r) ** 4
    b = 2.0 * math.sinh(2.0 * r) ** 2
    c = n - 3.0 + 4.0 * math.cosh(r) ** 4

    def g(x):
        x = np.asarray(x, dtype=float)
        if np.any(x < c * (1 - _DOMAIN_SLACK)) or np.any(x > (a + b + c) * (1 + _DOMAIN_SLACK)):
            raise DomainError(f"x outside [{c:.6g}, {a + b + c:.6g}]")
        return -b / (2.0 * a) + np.sqrt(b * b / (4.0 * a * a) + (x - c) / a)

    return a, b, c, g


def so_n1_embedded_matrix(n: int, r: float, delta: float) -> np.ndarray:
    """(n+1) x (n+1) product D(r) diag(k_delta, 1) D(r) in the Lorentz
    group, D(r) the standard one-parameter boost."""
    d = np.eye(n + 1)
    d[0, 0] = d[n, n] = math.cosh(r)
    d[0, n] = d[n, 0] = math.sinh(r)
    k = np.eye(n + 1)
    k[:n, :n] = rotation_matrix(n, delta)
    return d @ k @ d

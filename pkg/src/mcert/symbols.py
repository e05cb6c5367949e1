"""Symbol containers and the built-in symbol families.

Three evaluator containers are used across the toolkit:

* :class:`SymbolHandle`  - symbols on the group; called with one (n, n)
  matrix or a stack of them.
* :class:`EuclideanSymbol` - symbols on R^d; called with an (..., d) array.
* :class:`RadialProfile` - scalar profiles phi on (1, infinity), the
  subject of the radial rigidity checks.

Families are deliberately closed-form (auditable); arbitrary symbols
enter through the CSV escape hatch.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .geometry import hs_norm

__all__ = [
    "SymbolHandle",
    "EuclideanSymbol",
    "RadialProfile",
    "SymbolFamily",
    "group_symbol_from_profile",
    "euclidean_symbol_from_csv",
    "euclidean_symbol_to_csv",
    "read_matrix_csv",
    "write_matrix_csv",
    "read_points_csv",
    "write_points_csv",
]


@dataclass
class SymbolHandle:
    """Evaluator on group elements with light metadata.

    ``evaluator`` receives a raw (..., n, n) float array and must return
    a matching (...) array (or scalar).  ``support_radius`` is measured
    in log L units when set.
    """

    evaluator: object
    radial: bool = False
    support_radius: float | None = None
    name: str = "symbol"

    def __call__(self, mats):
        return self.evaluator(np.asarray(mats, dtype=float))


@dataclass
class EuclideanSymbol:
    """Evaluator on R^d points, vectorized over leading axes."""

    d: int
    evaluator: object
    support_radius: float | None = None
    inner_radius: float | None = None
    name: str = "symbol"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise InputError(f"expected points in R^{self.d}, got last axis {x.shape[-1]}")
        return self.evaluator(x)


@dataclass
class RadialProfile:
    """Scalar profile on (1, infinity) with optional analytic derivatives.

    ``derivatives[k-1]``, when present, evaluates the k-th derivative.
    """

    evaluator: object
    derivatives: tuple = ()
    name: str = "profile"
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=float))

    def derivative(self, k: int, x, h_rel: float = 1e-4):
        """k-th derivative, analytic when available, else central differences."""
        x = np.asarray(x, dtype=float)
        if k == 0:
            return self(x)
        if len(self.derivatives) >= k and self.derivatives[k - 1] is not None:
            return np.asarray(self.derivatives[k - 1](x), dtype=float)
        h = np.maximum(h_rel * np.abs(x), 1e-7)
        prev = lambda t: self.derivative(k - 1, t, h_rel)
        return (prev(x + h) - prev(x - h)) / (2.0 * h)


def group_symbol_from_profile(profile: RadialProfile, mode: str = "hs",
                              support_radius: float | None = None) -> SymbolHandle:
    """Lift a radial profile to a group symbol via |g| or ||g||."""
    if mode not in ("hs", "opnorm"):
        raise InputError("mode must be 'hs' or 'opnorm'")

    def ev(mats):
        mats = np.asarray(mats, dtype=float)
        single = mats.ndim == 2
        stack = mats[None] if single else mats
        if mode == "hs":
            r = hs_norm(stack)
        else:
            r = np.linalg.svd(stack, compute_uv=False)[..., 0]
        out = profile(r)
        return out[0] if single else out

    return SymbolHandle(evaluator=ev, radial=True, support_radius=support_radius,
                        name=f"{profile.name}({mode})")


# ---------------------------------------------------------------------------
# Built-in families

_FAMILY_KINDS = ("radial-power", "radial-log-power", "hm-bump", "riesz-like", "csv-sampled")


@dataclass
class SymbolFamily:
    """Parametric symbol family; see :meth:`build_profile` / :meth:`build_euclidean`."""

    kind: str
    parameters: dict = field(default_factory=dict)
    cutoff: float | None = None

    def __post_init__(self):
        if self.kind not in _FAMILY_KINDS:
            raise InputError(f"unknown family kind {self.kind!r}; choose from {_FAMILY_KINDS}")

    @classmethod
    def parse(cls, spec: str) -> "SymbolFamily":
        """Parse 'kind:key=val,key=val' command-line specs."""
        kind, _, rest = spec.partition(":")
        params: dict = {}
        if rest:
            for item in rest.split(","):
                if not item:
                    continue
                key, _, val = item.partition("=")
                if not _:
                    raise InputError(f"malformed family parameter {item!r}")
                try:
                    params[key.strip()] = float(val)
                except ValueError:
                    params[key.strip()] = val.strip()
        cutoff = params.pop("cutoff", None)
        return cls(kind=kind.strip(), parameters=params, cutoff=cutoff)

    def build_profile(self) -> RadialProfile:
        """Radial profile phi(x) on (1, infinity) for the rigidity checks."""
        p = self.parameters
        if self.kind == "radial-power":
            a = float(p.get("exponent", 1.0))
            shift = float(p.get("shift", 1.0))
            ev = lambda x: (shift + x) ** (-a)
            ders = tuple(
                (lambda k: (lambda x: _falling(-a, k) * (shift + x) ** (-a - k)))(k)
                for k in range(1, 9)
            )
            return RadialProfile(ev, derivatives=ders, name=f"radial-power(a={a})",
                                 params={"exponent": a, "shift": shift})
        if self.kind == "radial-log-power":
            a = float(p.get("exponent", 1.0))
            b = float(p.get("log_exponent", 1.0))
            ev = lambda x: (1.0 + x) ** (-a) * np.log(math.e + x) ** (-b)
            return RadialProfile(ev, name=f"radial-log-power(a={a},b={b})",
                                 params={"exponent": a, "log_exponent": b})
        if self.kind == "hm-bump":
            center = float(p.get("center", 1.0))
            width = float(p.get("width", 0.5))
            ev = lambda x: _smooth_bump((np.asarray(x) - center) / width)
            return RadialProfile(ev, name=f"hm-bump(c={center},w={width})",
                                 params={"center": center, "width": width})
        raise InputError(f"family {self.kind!r} does not define a radial profile")

    def build_euclidean(self, d: int) -> EuclideanSymbol:
        p = self.parameters
        if self.kind == "riesz-like":
            axis = int(p.get("axis", 0))

            def ev(x):
                r = np.linalg.norm(x, axis=-1)
                with np.errstate(divide="ignore", invalid="ignore"):
                    out = np.where(r > 0, x[..., axis] / np.where(r > 0, r, 1.0), 0.0)
                return out

            return EuclideanSymbol(d=d, evaluator=ev, name=f"riesz-like(axis={axis})")
        if self.kind == "hm-bump":
            center = float(p.get("center", 1.5))
            width = float(p.get("width", 0.5))

            def ev(x):
                r = np.linalg.norm(x, axis=-1)
                return _smooth_bump((r - center) / width)

            return EuclideanSymbol(d=d, evaluator=ev,
                                   support_radius=center + width,
                                   inner_radius=max(center - width, 0.0),
                                   name=f"hm-bump(c={center},w={width})")
        if self.kind == "radial-power":
            a = float(p.get("exponent", 1.0))

            def ev(x):
                r = np.linalg.norm(x, axis=-1)
                return (1.0 + r) ** (-a)

            return EuclideanSymbol(d=d, evaluator=ev, name=f"radial-power(a={a})")
        raise InputError(f"family {self.kind!r} does not define a Euclidean symbol")


def _falling(a: float, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= a - i
    return out


def _smooth_bump(t):
    """C-infinity bump equal to 1 at t = 0, supported on |t| < 1."""
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        inside = np.abs(t) < 1.0
        val = np.zeros_like(t)
        u = np.where(inside, 1.0 - t * t, 1.0)
        val = np.where(inside, np.exp(1.0 - 1.0 / u), 0.0)
    return val


# ---------------------------------------------------------------------------
# CSV interfaces (UTF-8, header row, decimal point, no locale)


def euclidean_symbol_from_csv(path, d: int) -> EuclideanSymbol:
    """Nearest-node symbol from a grid CSV with columns x1..xd, re, im."""
    from scipy.spatial import cKDTree

    pts, re, im = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = [f"x{i+1}" for i in range(d)]
        for row in reader:
            try:
                pts.append([float(row[c]) for c in cols])
                re.append(float(row["re"]))
                im.append(float(row.get("im", 0.0) or 0.0))
            except (KeyError, ValueError) as exc:
                raise InputError(f"bad CSV row {row}: {exc}") from exc
    if not pts:
        raise InputError(f"no data rows in {path}")
    pts = np.asarray(pts)
    vals = np.asarray(re) + 1j * np.asarray(im)
    tree = cKDTree(pts)

    def ev(x):
        x = np.asarray(x, dtype=float)
        _, idx = tree.query(x.reshape(-1, d))
        return vals[idx].reshape(x.shape[:-1])

    rad = float(np.linalg.norm(pts, axis=1).max())
    return EuclideanSymbol(d=d, evaluator=ev, support_radius=rad, name=f"csv:{path}")


def euclidean_symbol_to_csv(symbol: EuclideanSymbol, points, path) -> None:
    points = np.asarray(points, dtype=float)
    vals = np.asarray(symbol(points), dtype=complex)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i+1}" for i in range(symbol.d)] + ["re", "im"])
        for pt, v in zip(points, vals):
            writer.writerow([repr(float(c)) for c in pt] + [repr(float(v.real)), repr(float(v.imag))])


def read_matrix_csv(path) -> np.ndarray:
    """Complex matrix from long-format CSV with columns i, j, re, im."""
    entries = {}
    nmax = -1
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            try:
                i, j = int(row["i"]), int(row["j"])
                entries[(i, j)] = float(row["re"]) + 1j * float(row.get("im", 0.0) or 0.0)
            except (KeyError, ValueError) as exc:
                raise InputError(f"bad CSV row {row}: {exc}") from exc
            nmax = max(nmax, i, j)
    if nmax < 0:
        raise InputError(f"no data rows in {path}")
    m = np.zeros((nmax + 1, nmax + 1), dtype=complex)
    for (i, j), v in entries.items():
        m[i, j] = v
    return m


def write_matrix_csv(m, path) -> None:
    m = np.asarray(m, dtype=complex)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "re", "im"])
        for i in range(m.shape[0]):
            for j in range(m.shape[1]):
                writer.writerow([i, j, repr(float(m[i, j].real)), repr(float(m[i, j].imag))])


def read_points_csv(path, n: int) -> list:
    """Group elements from CSV rows holding row-major n*n entries."""
    from .geometry import GroupElement

    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InputError(f"empty CSV {path}")
        for row in reader:
            if not row:
                continue
            vals = [float(v) for v in row]
            if len(vals) != n * n:
                raise InputError(f"expected {n*n} entries per row, got {len(vals)}")
            out.append(GroupElement(np.array(vals).reshape(n, n)))
    if not out:
        raise InputError(f"no data rows in {path}")
    return out


def write_points_csv(elements, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        n = elements[0].n
        writer.writerow([f"a{i}{j}" for i in range(n) for j in range(n)])
        for g in elements:
            writer.writerow([repr(float(v)) for v in g.entries.reshape(-1)])

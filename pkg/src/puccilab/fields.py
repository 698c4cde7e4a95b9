"""Domains, grids, uncertainty envelopes, and admissible covariance fields.

Geometry is deliberately small: bounded open intervals and balls (the ball
problems reduce to one radial dimension), plus half-line/line parents that
only exist to be exhausted by growing intervals.  Scalar data on a domain
lives in a single 1D coordinate: the point itself on an interval, the
radius on a ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import pucci
from .errors import DomainError, InputError

SPECTRUM_TOL = 1e-10

# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    kind = "interval"

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise InputError("interval endpoints must be finite")
        if not self.a < self.b:
            raise InputError(f"need a < b, got ({self.a}, {self.b})")

    @property
    def length(self):
        return self.b - self.a

    @property
    def center(self):
        return 0.5 * (self.a + self.b)

    @property
    def state_dim(self):
        return 1

    def contains(self, x):
        return self.a < float(x) < self.b

    def coord(self, x):
        x = float(x)
        if not self.contains(x):
            raise DomainError(f"point {x} outside interval ({self.a}, {self.b})")
        return x

    def boundary_distance(self, x):
        x = np.asarray(x, dtype=float)
        return np.minimum(x - self.a, self.b - x)

    def describe(self):
        return {"kind": "interval", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Ball:
    dim: int
    radius: float
    center: tuple = None

    kind = "ball"

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise InputError(f"ball dimension must be 2 or 3, got {self.dim}")
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise InputError("ball radius must be positive and finite")
        if self.center is None:
            object.__setattr__(self, "center", (0.0,) * self.dim)
        elif len(self.center) != self.dim:
            raise InputError("center length must match dim")

    @property
    def length(self):
        # radial coordinate extent
        return self.radius

    @property
    def state_dim(self):
        return self.dim

    def radius_of(self, x):
        x = np.asarray(x, dtype=float)
        return np.sqrt(((x - np.asarray(self.center)) ** 2).sum(axis=-1))

    def contains(self, x):
        return bool(self.radius_of(x) < self.radius)

    def coord(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape == ():
            # already a radius
            r = float(x)
        else:
            r = float(self.radius_of(x))
        if not 0.0 <= r < self.radius:
            raise DomainError(f"radius {r} outside ball of radius {self.radius}")
        return r

    def boundary_distance(self, x):
        return self.radius - self.radius_of(x)

    def describe(self):
        return {"kind": "ball", "dim": self.dim, "radius": self.radius,
                "center": list(self.center)}


@dataclass(frozen=True)
class HalfLine:
    """Unbounded parent (a, inf); only valid as an exhaustion parent."""

    a: float

    kind = "half_line"

    def describe(self):
        return {"kind": "half_line", "a": self.a}


@dataclass(frozen=True)
class FullLine:
    """Unbounded parent (-inf, inf); only valid as an exhaustion parent."""

    kind = "line"

    def describe(self):
        return {"kind": "line"}


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform interior grid in the domain's 1D coordinate.

    Intervals: n interior nodes with spacing h = length/(n+1), boundary
    nodes carried implicitly.  Balls: the center r=0 is an interior node by
    symmetry, so the n nodes are r_i = i*h with h = R/n and the boundary at
    r = R.
    """

    domain: object
    n: int
    nodes: np.ndarray
    h: float

    @property
    def coords(self):
        return self.nodes

    def nearest_index(self, s):
        return int(np.argmin(np.abs(self.nodes - float(s))))

    def same_nodes(self, other):
        return (
            self.n == other.n
            and abs(self.h - other.h) <= 1e-15 * (1.0 + abs(self.h))
            and bool(np.allclose(self.nodes, other.nodes, rtol=0.0, atol=1e-12))
        )


def make_grid(domain, n):
    n = int(n)
    if n < 16:
        raise InputError(f"grid needs at least 16 interior nodes, got {n}")
    if isinstance(domain, Interval):
        h = domain.length / (n + 1)
        nodes = domain.a + h * np.arange(1, n + 1)
    elif isinstance(domain, Ball):
        h = domain.radius / n
        nodes = h * np.arange(n)
    else:
        raise InputError(f"cannot grid parent of kind {getattr(domain, 'kind', '?')}")
    return Grid(domain, n, nodes, h)


# ---------------------------------------------------------------------------
# scalar fields


_PROFILES = {
    "affine": lambda s, p: p["offset"] + p["slope"] * s,
    "sinusoid": lambda s, p: p["offset"] + p["amplitude"] * np.sin(p["frequency"] * s + p.get("phase", 0.0)),
    "bump": lambda s, p: p["offset"] + p["amplitude"] * np.exp(-0.5 * ((s - p["location"]) / p["width"]) ** 2),
}


class ScalarField:
    """Scalar data on a domain, evaluated in the 1D coordinate (x or r)."""

    __slots__ = ("_fn", "kind", "spec", "grid")

    def __init__(self, fn, kind, spec, grid=None):
        self._fn = fn
        self.kind = kind
        self.spec = spec
        self.grid = grid

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = self._fn(s)
        return np.asarray(out, dtype=float)

    @classmethod
    def constant(cls, value):
        value = float(value)
        if not math.isfinite(value):
            raise InputError("constant field value must be finite")
        return cls(lambda s: np.full_like(s, value, dtype=float), "constant",
                   {"kind": "constant", "value": value})

    @classmethod
    def tabulated(cls, grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.nodes.shape:
            raise InputError("tabulated values must match the grid nodes")
        if not np.all(np.isfinite(values)):
            raise InputError("tabulated values must be finite")
        nodes = grid.nodes
        # np.interp clamps outside the node range, which covers the
        # half-cells next to the boundary.
        return cls(lambda s: np.interp(s, nodes, values), "tabulated",
                   {"kind": "tabulated", "n": int(grid.n)}, grid=grid)

    @classmethod
    def profile(cls, name, **params):
        if name not in _PROFILES:
            raise InputError(f"unknown profile '{name}', have {sorted(_PROFILES)}")
        fn = _PROFILES[name]
        spec = {"kind": "profile", "name": name}
        spec.update(params)
        return cls(lambda s: fn(s, params), "profile", spec)

    @classmethod
    def from_function(cls, fn, spec):
        return cls(fn, "function", spec)

    def describe(self):
        return dict(self.spec)


# ---------------------------------------------------------------------------
# uncertainty envelope


@dataclass(frozen=True, eq=False)
class BoundFields:
    """The (theta, Theta) envelope: positive fields with theta <= Theta.

    A degenerate envelope (theta == Theta somewhere or everywhere) is
    accepted; it collapses the admissible class to a single element and the
    extremal operator to a linear one.
    """

    domain: object
    theta: ScalarField
    Theta: ScalarField

    def at(self, x):
        s = self.domain.coord(x)
        lo = float(self.theta(s))
        hi = float(self.Theta(s))
        return lo, hi

    def theta_at(self, x):
        return self.at(x)[0]

    def Theta_at(self, x):
        return self.at(x)[1]

    def node_values(self, grid):
        return self.theta(grid.nodes), self.Theta(grid.nodes)

    def validate_on(self, grid, strict_gap=False):
        lo, hi = self.node_values(grid)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InputError("envelope fields must be finite on the grid")
        if lo.min() <= 0.0:
            i = int(np.argmin(lo))
            raise InputError(
                f"theta must be positive; theta({grid.nodes[i]:.6g}) = {lo[i]:.6g}"
            )
        gap = hi - lo
        if strict_gap:
            if gap.min() <= 0.0:
                i = int(np.argmin(gap))
                raise InputError(
                    "theta must be strictly below Theta for a nondegenerate class; "
                    f"violated at node {i} (coord {grid.nodes[i]:.6g})"
                )
        elif gap.min() < 0.0:
            i = int(np.argmin(gap))
            raise InputError(
                f"theta must not exceed Theta; violated at node {i} "
                f"(coord {grid.nodes[i]:.6g}: {lo[i]:.6g} > {hi[i]:.6g})"
            )
        return lo, hi

    def restricted(self, domain):
        """Same field data viewed on a subdomain (shared coordinate frame)."""
        return BoundFields(domain, self.theta, self.Theta)

    def describe(self):
        return {"domain": self.domain.describe(), "theta": self.theta.describe(),
                "Theta": self.Theta.describe()}


# ---------------------------------------------------------------------------
# covariance fields


class CovarianceField:
    """One admissible covariance structure.

    Representations: a scalar field for intervals, a radially framed pair
    (c_r, c_t) for balls, or one tabulated symmetric matrix per node.
    """

    __slots__ = ("kind", "fields", "grid", "uppers", "dim", "spec")

    def __init__(self, kind, fields=(), grid=None, uppers=None, dim=1, spec=None):
        self.kind = kind
        self.fields = fields
        self.grid = grid
        self.uppers = uppers
        self.dim = dim
        self.spec = spec or {"kind": kind}

    @classmethod
    def scalar(cls, field, spec=None):
        s = {"kind": "scalar", "c": field.describe()}
        return cls("scalar", fields=(field,), grid=field.grid, spec=spec or s)

    @classmethod
    def radial(cls, c_r, c_t, spec=None):
        s = {"kind": "radial", "c_r": c_r.describe(), "c_t": c_t.describe()}
        grid = c_r.grid or c_t.grid
        return cls("radial", fields=(c_r, c_t), grid=grid, spec=spec or s)

    @classmethod
    def matrix_tabulated(cls, grid, uppers, dim):
        uppers = np.asarray(uppers, dtype=float)
        want = dim * (dim + 1) // 2
        if uppers.shape != (grid.n, want):
            raise InputError(
                f"matrix field needs shape ({grid.n}, {want}), got {uppers.shape}"
            )
        if not np.all(np.isfinite(uppers)):
            raise InputError("matrix field entries must be finite")
        return cls("matrix", grid=grid, uppers=uppers, dim=dim,
                   spec={"kind": "matrix", "dim": dim, "n": int(grid.n)})

    def _check_grid(self, grid):
        if self.grid is not None and not self.grid.same_nodes(grid):
            raise InputError("covariance field is tabulated on a different grid")

    def coefficient_arrays(self, grid):
        """Per-node operator coefficients: (c,) on intervals, (c_r, c_t) on balls."""
        self._check_grid(grid)
        dom = grid.domain
        if self.kind == "scalar":
            if not isinstance(dom, Interval):
                raise InputError("scalar covariance fields live on intervals")
            return (self.fields[0](grid.nodes),)
        if self.kind == "radial":
            if not isinstance(dom, Ball):
                raise InputError("radial covariance fields live on balls")
            return (self.fields[0](grid.nodes), self.fields[1](grid.nodes))
        # matrix representation: usable when aligned with the grid geometry
        if self.dim == 1:
            return (self.uppers[:, 0].copy(),)
        return matrix_to_radial_field(self, grid).coefficient_arrays(grid)

    def matrices_on(self, grid):
        """Full d x d matrices per node (radial frame uses the first axis)."""
        self._check_grid(grid)
        if self.kind == "matrix":
            d = self.dim
            mats = np.zeros((grid.n, d, d))
            k = 0
            for i in range(d):
                for j in range(i, d):
                    mats[:, i, j] = self.uppers[:, k]
                    mats[:, j, i] = self.uppers[:, k]
                    k += 1
            return mats
        if self.kind == "scalar":
            return self.fields[0](grid.nodes).reshape(-1, 1, 1)
        d = grid.domain.state_dim
        cr = self.fields[0](grid.nodes)
        ct = self.fields[1](grid.nodes)
        mats = np.zeros((grid.n, d, d))
        mats[:, 0, 0] = cr
        for i in range(1, d):
            mats[:, i, i] = ct
        return mats

    def spectrum_range(self, grid):
        """(min eigenvalue, max eigenvalue) per node."""
        self._check_grid(grid)
        if self.kind == "scalar":
            v = self.fields[0](grid.nodes)
            return v, v
        if self.kind == "radial":
            cr = self.fields[0](grid.nodes)
            ct = self.fields[1](grid.nodes)
            return np.minimum(cr, ct), np.maximum(cr, ct)
        mats = self.matrices_on(grid)
        lo = np.empty(grid.n)
        hi = np.empty(grid.n)
        for i in range(grid.n):
            e = pucci.eig_sym(mats[i]).eigenvalues
            lo[i] = e[0]
            hi[i] = e[-1]
        return lo, hi

    def component(self, i):
        return self.fields[i]

    def describe(self):
        return dict(self.spec)


def radial_to_matrix_field(c, grid):
    """Tabulate a radial pair as per-node matrices (frame pinned to axis 1)."""
    if c.kind != "radial":
        raise InputError("expected a radial covariance field")
    mats = c.matrices_on(grid)
    d = mats.shape[1]
    idx = [(i, j) for i in range(d) for j in range(i, d)]
    uppers = np.stack([mats[:, i, j] for i, j in idx], axis=1)
    return CovarianceField.matrix_tabulated(grid, uppers, d)


def matrix_to_radial_field(c, grid, tol=1e-12):
    """Invert :func:`radial_to_matrix_field`; fails if the frame is not radial."""
    if c.kind != "matrix":
        raise InputError("expected a matrix covariance field")
    mats = c.matrices_on(grid)
    d = c.dim
    off = 0.0
    for i in range(d):
        for j in range(i + 1, d):
            off = max(off, float(np.abs(mats[:, i, j]).max()))
    if off > tol:
        raise InputError(f"matrix field is not radially framed (off-diagonal {off:.3g})")
    cr = mats[:, 0, 0]
    ct = mats[:, 1, 1]
    for i in range(2, d):
        if np.abs(mats[:, i, i] - ct).max() > tol:
            raise InputError("tangential entries disagree; field is not radial")
    return CovarianceField.radial(ScalarField.tabulated(grid, cr),
                                  ScalarField.tabulated(grid, ct))


# ---------------------------------------------------------------------------
# validation and sampling


@dataclass(frozen=True, eq=False)
class ValidationReport:
    passed: bool
    max_violation: float
    worst_node: int
    below: np.ndarray
    above: np.ndarray

    def describe(self):
        return {
            "passed": bool(self.passed),
            "max_violation": float(self.max_violation),
            "worst_node": int(self.worst_node),
        }


def validate_covariance(c, bounds, grid):
    """Check the pointwise spectrum of ``c`` against the envelope on ``grid``."""
    lo_e, hi_e = c.spectrum_range(grid)
    lo_b, hi_b = bounds.node_values(grid)
    below = np.maximum(lo_b - lo_e, 0.0)
    above = np.maximum(hi_e - hi_b, 0.0)
    worst = below + above
    worst_node = int(np.argmax(worst))
    max_violation = float(worst[worst_node])
    return ValidationReport(max_violation <= SPECTRUM_TOL, max_violation,
                            worst_node, below, above)


SAMPLER_FAMILIES = ("constant", "fourier", "piecewise")


def _unit_fourier(rng, span, n_modes):
    s0, length = span
    ks = np.arange(1, n_modes + 1)
    a = rng.normal(size=n_modes) / ks
    b = rng.normal(size=n_modes) / ks
    def g(s):
        tau = np.pi * (np.asarray(s, dtype=float) - s0) / length
        phases = np.multiply.outer(tau, ks)
        return 0.95 * np.tanh(np.sin(phases) @ a + np.cos(phases) @ b)
    return g, {"a": a.tolist(), "b": b.tolist()}


def _unit_piecewise(rng, grid, segments, width_frac):
    s0 = float(grid.nodes[0])
    s1 = float(grid.nodes[-1])
    breaks = np.sort(rng.uniform(s0, s1, size=segments - 1))
    levels = rng.uniform(-0.88, 0.88, size=segments)
    raw = levels[np.searchsorted(breaks, grid.nodes)]
    width = max(width_frac * (s1 - s0), grid.h)
    m = int(np.ceil(3.0 * width / grid.h))
    offs = np.arange(-m, m + 1)
    w = np.exp(-0.5 * (offs * grid.h / width) ** 2)
    w /= w.sum()
    padded = np.concatenate((raw[m:0:-1], raw, raw[-2:-m - 2:-1]))
    smooth = np.convolve(padded, w, mode="valid")
    return smooth


def sample_covariance(bounds, grid, family, seed, n_modes=6, segments=6,
                      width_frac=0.05):
    """Draw one admissible covariance field; deterministic in ``seed``.

    Families: ``constant`` (a single value inside the band everywhere),
    ``fourier`` (smooth random mixture squashed strictly inside the band),
    ``piecewise`` (mollified random step profile, tabulated on the grid).
    """
    if family not in SAMPLER_FAMILIES:
        raise InputError(f"unknown sampler family '{family}', have {SAMPLER_FAMILIES}")
    lo, hi = bounds.validate_on(grid)
    rng = np.random.default_rng(int(seed))
    dom = grid.domain
    n_components = 1 if isinstance(dom, Interval) else 2

    theta_f, Theta_f = bounds.theta, bounds.Theta

    def mid(s):
        return 0.5 * (theta_f(s) + Theta_f(s))

    def half(s):
        return 0.5 * (Theta_f(s) - theta_f(s))

    comps = []
    for k in range(n_components):
        if family == "constant":
            band_lo = float(lo.max())
            band_hi = float(hi.min())
            if band_lo > band_hi:
                raise InputError(
                    "empty admissible band: max theta exceeds min Theta on the grid"
                )
            value = band_lo + rng.uniform() * (band_hi - band_lo)
            comps.append(ScalarField.constant(value))
        elif family == "fourier":
            span = (float(grid.nodes[0]), max(float(grid.nodes[-1] - grid.nodes[0]), grid.h))
            g, coeffs = _unit_fourier(rng, span, n_modes)
            fn = (lambda gg: lambda s: mid(s) + half(s) * gg(s))(g)
            comps.append(ScalarField.from_function(
                fn, {"kind": "fourier", "seed": int(seed), "component": k}))
        else:
            g = _unit_piecewise(rng, grid, segments, width_frac)
            values = mid(grid.nodes) + half(grid.nodes) * g
            comps.append(ScalarField.tabulated(grid, values))

    spec = {"kind": "sampled", "family": family, "seed": int(seed)}
    if n_components == 1:
        return CovarianceField.scalar(comps[0], spec=spec)
    return CovarianceField.radial(comps[0], comps[1], spec=spec)


# ---------------------------------------------------------------------------
# exhaustions


@dataclass(frozen=True)
class ExhaustionFamily:
    parent: object
    members: tuple

    def __post_init__(self):
        if not self.members:
            raise InputError("exhaustion family must not be empty")
        for e1, e2 in zip(self.members, self.members[1:]):
            if isinstance(e1, Interval):
                if not (e2.a < e1.a and e1.b < e2.b):
                    raise InputError("members must nest with a positive gap")
            else:
                if not e1.radius < e2.radius:
                    raise InputError("members must nest with a positive gap")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def build_exhaustion(parent, n_max, shrink=1.0):
    """Growing family of bounded convex subdomains exhausting ``parent``.

    Bounded interval (a, b): member n is (a + delta_n, b - delta_n) with
    delta_n = shrink * (b - a) / (2 (n + 2)).  Balls shrink the radius by
    the matching rule; half-lines and the full line grow one end (or both)
    linearly while the finite gap closes.
    """
    n_max = int(n_max)
    if n_max < 1:
        raise InputError(f"n_max must be at least 1, got {n_max}")
    shrink = float(shrink)
    if not 0.0 < shrink < 3.0:
        raise InputError("shrink must lie in (0, 3) to keep members nonempty")
    members = []
    for n in range(1, n_max + 1):
        if isinstance(parent, Interval):
            delta = shrink * parent.length / (2.0 * (n + 2))
            members.append(Interval(parent.a + delta, parent.b - delta))
        elif isinstance(parent, Ball):
            members.append(Ball(parent.dim, parent.radius * (1.0 - shrink / (3.0 * (n + 2))),
                                parent.center))
        elif isinstance(parent, HalfLine):
            delta = shrink / (2.0 * (n + 2))
            members.append(Interval(parent.a + delta, parent.a + float(n + 1)))
        elif isinstance(parent, FullLine):
            members.append(Interval(-float(n + 1), float(n + 1)))
        else:
            raise InputError(f"cannot exhaust parent of kind {getattr(parent, 'kind', '?')}")
    return ExhaustionFamily(parent, tuple(members))

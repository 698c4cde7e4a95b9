"""Principal Dirichlet eigenpairs on interval and radial grids.

Both solvers run inverse power iteration: each sweep solves one Dirichlet
problem with the previous iterate as source and reads the eigenvalue off
the normalization node.  The linear generator gives a single tridiagonal
solve per sweep.  The extremal operator resolves its pointwise coefficient
supremum by Howard policy iteration: per node and per Hessian direction
the coefficient is the upper envelope bound where the directional second
difference is nonnegative and the lower bound where it is negative, and
the induced linear problem is solved until the policy stops changing.

Discretization is plain central second differences.  On a ball the Hessian
of a radial function contributes u'' in the radial direction and u'/r with
multiplicity d-1 tangentially; at the center both collapse by symmetry to
the one-sided value 2(u(h) - u(0))/h^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConvergenceError, InputError, InternalError
from .fields import Grid, Interval

TIE_UPPER = True  # zero second difference takes the upper coefficient


@dataclass(frozen=True)
class SolverConfig:
    n: int = 2000
    lam_tol: float = 1e-9
    inner_tol: float = 1e-12
    max_outer: int = 500
    max_inner: int = 60
    residual_factor: float = 1e-8
    x0: float = None

    def __post_init__(self):
        if self.n < 16:
            raise InputError(f"grid size must be at least 16, got {self.n}")
        for name in ("lam_tol", "inner_tol", "residual_factor"):
            if getattr(self, name) <= 0.0:
                raise InputError(f"{name} must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise InputError("iteration caps must be positive")


@dataclass(eq=False)
class EigenPair:
    """Eigenvalue with its positive eigenfunction tabulated on a grid.

    The eigenfunction is 1 at the normalization node, strictly positive at
    interior nodes, and implicitly 0 on the boundary.  ``policy`` is the
    per-node, per-direction upper-bound indicator for extremal solves and
    None for linear ones.
    """

    lam: float
    eta: np.ndarray
    grid: Grid
    x0: float
    x0_index: int
    residual: float
    iterations: int
    policy: np.ndarray = None

    @cached_property
    def _interp_nodes(self):
        g = self.grid
        if isinstance(g.domain, Interval):
            s = np.concatenate(([g.domain.a], g.nodes, [g.domain.b]))
            v = np.concatenate(([0.0], self.eta, [0.0]))
        else:
            s = np.concatenate((g.nodes, [g.domain.radius]))
            v = np.concatenate((self.eta, [0.0]))
        return s, v

    @cached_property
    def _grad_nodes(self):
        g = self.grid
        n, h = g.n, g.h
        grad = np.empty(n)
        if isinstance(g.domain, Interval):
            pad = np.concatenate(([0.0], self.eta, [0.0]))
            grad[:] = (pad[2:] - pad[:-2]) / (2.0 * h)
        else:
            pad = np.concatenate((self.eta, [0.0]))
            grad[0] = 0.0  # radial symmetry at the center
            grad[1:] = (pad[2:] - self.eta[:-1]) / (2.0 * h)
        return grad

    def eta_at(self, s):
        nodes, vals = self._interp_nodes
        return np.interp(np.asarray(s, dtype=float), nodes, vals)

    def grad_at(self, s):
        return np.interp(np.asarray(s, dtype=float), self.grid.nodes, self._grad_nodes)

    def policy_summary(self):
        if self.policy is None:
            return None
        upper = int(self.policy.sum())
        total = int(self.policy.size)
        return {
            "upper_nodes": upper,
            "lower_nodes": total - upper,
            "all_lower": upper == 0,
            "all_upper": upper == total,
        }

    def describe(self):
        out = {
            "lambda": float(self.lam),
            "residual": float(self.residual),
            "iterations": int(self.iterations),
            "n": int(self.grid.n),
            "x0": float(self.x0),
        }
        summary = self.policy_summary()
        if summary is not None:
            out["policy"] = summary
        return out


# ---------------------------------------------------------------------------
# discrete operators


def _direction_multiplicities(grid):
    if isinstance(grid.domain, Interval):
        return np.array([1.0])
    d = grid.domain.dim
    return np.array([1.0] + [float(d - 1)])


def discrete_hessian(eta, grid):
    """Per-node directional Hessian values: u'' alone on intervals, the
    pair (u'', u'/r) on balls with the tangential column counted d-1 times
    through :func:`_direction_multiplicities`."""
    if grid.n < 3:
        raise InputError("need at least 3 interior nodes for second differences")
    u = np.asarray(eta, dtype=float)
    if u.shape != (grid.n,):
        raise InputError(f"eta must have shape ({grid.n},)")
    h = grid.h
    if isinstance(grid.domain, Interval):
        pad = np.concatenate(([0.0], u, [0.0]))
        upp = (pad[:-2] - 2.0 * u + pad[2:]) / (h * h)
        return upp[:, None]
    n = grid.n
    r = grid.nodes
    pad = np.concatenate((u, [0.0]))
    upp = np.empty(n)
    urr = np.empty(n)
    center = 2.0 * (u[1] - u[0]) / (h * h)
    upp[0] = urr[0] = center
    upp[1:] = (u[:-1] - 2.0 * u[1:] + pad[2:]) / (h * h)
    urr[1:] = (pad[2:] - u[:-1]) / (2.0 * h * r[1:])
    return np.column_stack((upp, urr))


def _operator_rows(coefs, grid):
    """(sub, diag, sup) rows of the discrete generator u -> (1/2) Tr(c D^2 u)."""
    h2 = grid.h * grid.h
    if isinstance(grid.domain, Interval):
        (c,) = coefs
        w = 0.5 * c / h2
        return w.copy(), -2.0 * w, w.copy()
    d = grid.domain.dim
    c_r, c_t = coefs
    r = grid.nodes
    rad = 0.5 * c_r / h2
    sub = np.empty(grid.n)
    diag = np.empty(grid.n)
    sup = np.empty(grid.n)
    q0 = (c_r[0] + (d - 1) * c_t[0]) / h2
    sub[0] = 0.0
    diag[0] = -q0
    sup[0] = q0
    tan = (d - 1) * c_t[1:] / (4.0 * grid.h * r[1:])
    sub[1:] = rad[1:] - tan
    diag[1:] = -2.0 * rad[1:]
    sup[1:] = rad[1:] + tan
    return sub, diag, sup


def _apply_rows(rows, u):
    sub, diag, sup = rows
    out = diag * u
    out[1:] += sub[1:] * u[:-1]
    out[:-1] += sup[:-1] * u[1:]
    return out


def _solve_rows(rows, f):
    sub, diag, sup = rows
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = sup[:-1]
    ab[1, :] = diag
    ab[2, :-1] = sub[1:]
    try:
        return solve_banded((1, 1), ab, f)
    except Exception as exc:  # pragma: no cover - excluded by validation
        raise InternalError(f"tridiagonal solve failed: {exc}") from exc


def solve_linear_dirichlet(c, f, grid):
    """Solve (1/2) Tr(c D^2 u) = f with zero boundary values, exactly."""
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n,):
        raise InputError(f"source must have shape ({grid.n},)")
    rows = _operator_rows(c.coefficient_arrays(grid), grid)
    return _solve_rows(rows, f)


def apply_linear_operator(c, u, grid):
    """Evaluate the discrete generator on interior values ``u``."""
    rows = _operator_rows(c.coefficient_arrays(grid), grid)
    return _apply_rows(rows, np.asarray(u, dtype=float))


def _pucci_values(theta_n, Theta_n, hess, mult):
    per_dir = np.where(hess >= 0.0, Theta_n[:, None] * hess, theta_n[:, None] * hess)
    return 0.5 * (per_dir * mult).sum(axis=1)


def apply_pucci_operator(bounds, u, grid):
    """Pointwise extremal operator of the discrete Hessian of ``u``."""
    theta_n, Theta_n = bounds.node_values(grid)
    hess = discrete_hessian(u, grid)
    return _pucci_values(theta_n, Theta_n, hess, _direction_multiplicities(grid))


# ---------------------------------------------------------------------------
# eigen solvers


def _bubble(grid):
    dom = grid.domain
    if isinstance(dom, Interval):
        return np.minimum(grid.nodes - dom.a, dom.b - grid.nodes)
    return dom.radius - grid.nodes


def _normalization_index(grid, x0):
    dom = grid.domain
    if x0 is None:
        x0 = dom.center if isinstance(dom, Interval) else 0.0
    i0 = grid.nearest_index(x0)
    return i0, float(grid.nodes[i0])


def principal_eig_linear(c, grid, cfg=None, u0=None):
    """Principal eigenpair of the linear generator via inverse power iteration."""
    cfg = cfg or SolverConfig(n=grid.n)
    i0, x0 = _normalization_index(grid, cfg.x0)
    rows = _operator_rows(c.coefficient_arrays(grid), grid)
    u = _bubble(grid) if u0 is None else np.asarray(u0, dtype=float).copy()
    if u.shape != (grid.n,) or u.min() <= 0.0:
        raise InputError("initial vector must be positive at interior nodes")
    u = u / u[i0]
    lam_prev = math.inf
    lam = math.nan
    for k in range(1, cfg.max_outer + 1):
        v = _solve_rows(rows, -u)
        lam = u[i0] / v[i0]
        v = v / v[i0]
        if v.min() <= 0.0:
            raise ConvergenceError(
                "iterate lost positivity; generator is not inverse-positive here",
                last=v,
            )
        if abs(lam - lam_prev) <= cfg.lam_tol * abs(lam):
            residual = float(np.abs(_apply_rows(rows, v) + lam * v).max())
            if residual <= cfg.residual_factor * abs(lam) * np.abs(v).max():
                return EigenPair(float(lam), v, grid, x0, i0, residual, k)
        lam_prev = lam
        u = v
    raise ConvergenceError(
        f"no convergence in {cfg.max_outer} power iterations (lambda ~ {lam:.6g})",
        last=u,
    )


def _policy_coefficients(policy, theta_n, Theta_n):
    cols = np.where(policy, Theta_n[:, None], theta_n[:, None])
    return tuple(cols[:, j] for j in range(cols.shape[1]))


def _solve_extremal_dirichlet(theta_n, Theta_n, f, grid, policy, cfg):
    """Howard iteration for the Dirichlet problem F(x, D^2 u) = f."""
    u_prev = None
    for inner in range(1, cfg.max_inner + 1):
        rows = _operator_rows(_policy_coefficients(policy, theta_n, Theta_n), grid)
        u = _solve_rows(rows, f)
        new_policy = discrete_hessian(u, grid) >= 0.0
        if np.array_equal(new_policy, policy):
            return u, policy, inner
        if u_prev is not None and np.abs(u - u_prev).max() <= cfg.inner_tol * np.abs(u).max():
            # value converged; remaining flips are FP ties at zero second difference
            return u, policy, inner
        u_prev = u
        policy = new_policy
    raise ConvergenceError(
        f"policy iteration did not settle in {cfg.max_inner} sweeps",
        last=u,
    )


def principal_eig_pucci(bounds, grid, cfg=None, u0=None):
    """Principal eigenpair of the extremal operator.

    Outer inverse power iteration with an inner Howard solve per sweep; the
    converged coefficient policy ships with the eigenpair.
    """
    cfg = cfg or SolverConfig(n=grid.n)
    theta_n, Theta_n = bounds.validate_on(grid)
    i0, x0 = _normalization_index(grid, cfg.x0)
    mult = _direction_multiplicities(grid)
    u = _bubble(grid) if u0 is None else np.asarray(u0, dtype=float).copy()
    if u.shape != (grid.n,) or u.min() <= 0.0:
        raise InputError("initial vector must be positive at interior nodes")
    u = u / u[i0]
    policy = discrete_hessian(u, grid) >= 0.0
    lam_prev = math.inf
    lam = math.nan
    total_inner = 0
    for k in range(1, cfg.max_outer + 1):
        v, policy, inner = _solve_extremal_dirichlet(theta_n, Theta_n, -u, grid, policy, cfg)
        total_inner += inner
        lam = u[i0] / v[i0]
        v = v / v[i0]
        if v.min() <= 0.0:
            raise ConvergenceError("extremal iterate lost positivity", last=v)
        if abs(lam - lam_prev) <= cfg.lam_tol * abs(lam):
            hess = discrete_hessian(v, grid)
            residual = float(np.abs(_pucci_values(theta_n, Theta_n, hess, mult) + lam * v).max())
            if residual <= cfg.residual_factor * abs(lam) * np.abs(v).max():
                return EigenPair(float(lam), v, grid, x0, i0, residual, k,
                                 policy=hess >= 0.0)
        lam_prev = lam
        u = v
    raise ConvergenceError(
        f"no convergence in {cfg.max_outer} power iterations (lambda ~ {lam:.6g})",
        last=u,
    )


# ---------------------------------------------------------------------------
# interior ratio diagnostics


@dataclass(frozen=True, eq=False)
class HarnackReport:
    ratios: np.ndarray
    max_ratio: float
    k_fraction: float
    n_nodes: int

    def describe(self):
        return {
            "max_ratio": float(self.max_ratio),
            "k_fraction": float(self.k_fraction),
            "n_nodes": int(self.n_nodes),
            "ratios": [float(r) for r in self.ratios],
        }


def harnack_ratio(pairs, grid, k_fraction=1.0 / 3.0):
    """Worst interior sup/inf ratio over a family of eigenfunctions.

    K is the central fraction of the domain: |x - center| <= f * length / 2
    on intervals, r <= f * R on balls.
    """
    pairs = list(pairs)
    if not pairs:
        raise InputError("need at least one eigenpair")
    if not 0.0 < k_fraction <= 1.0:
        raise InputError("k_fraction must lie in (0, 1]")
    dom = grid.domain
    if isinstance(dom, Interval):
        mask = np.abs(grid.nodes - dom.center) <= 0.5 * k_fraction * dom.length
    else:
        mask = grid.nodes <= k_fraction * dom.radius
    if not mask.any():
        raise InputError("interior fraction contains no grid nodes")
    ratios = np.empty(len(pairs))
    for i, pair in enumerate(pairs):
        if pair.eta.shape != (grid.n,):
            raise InputError("all eigenfunctions must live on the given grid")
        vals = pair.eta[mask]
        ratios[i] = vals.max() / vals.min()
    return HarnackReport(ratios, float(ratios.max()), k_fraction, int(mask.sum()))

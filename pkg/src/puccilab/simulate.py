"""Monte Carlo validation of the robust growth-optimal strategy.

The coordinate process follows Euler-Maruyama steps under an admissible
covariance, optionally with the recurrent change-of-measure drift
c * grad(log eta_ref); the diffusion matrix is the symmetric positive
square root of the covariance (a scalar root in one dimension, a
per-eigendirection root in the radial frame).  Wealth paths integrate a
trading position against the increments of the state, and growth rates
are terminal-window averages of t^-1 log V_t.

Two stabilizations keep the discrete dynamics faithful to the recurrent
diffusion near the boundary, where the drift grows like c over the
distance.  First, the drift displacement within a substep is capped by the
exact flow of that repulsive field, which a frozen-coefficient step
overshoots wildly from small distances.  Second, the step size adapts near
the wall: a substep of length h is only taken where the distance exceeds
six noise standard deviations sqrt(c h), so the drifted dynamics are
resolved down to the guard level at O(1) expected cost per crossing.
Without this, a lumped noise increment jumps the repulsive barrier and
produces boundary hits at wildly inflated rates.  A guard still stops and
flags any path that gets within ``eps_boundary`` of the boundary, and
flagged paths are excluded from growth averages but counted.

Randomness is counter-based: every increment is a pure function of
(seed, path index, step index, draw index), so ensembles are reproducible
path by path and independent of execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from . import eigensolver as es
from .errors import (
    EvaluationError,
    InputError,
    PositivityError,
    SaddleViolation,
)
from .fields import CovarianceField, Interval
from .robust import _child_seed

_RUIN_EPS = 1e-12
_ZONE_FACTOR2 = 36.0  # substep length h satisfies noise sqrt(c h) <= dist / 6
_MAX_SUBSTEPS = 1 << 20

KIND_PI_STAR = 0
KIND_CONSTANT = 1


@dataclass(frozen=True)
class PathConfig:
    x0: object
    dt: float = 1e-3
    T: float = 1.0
    seed: int = 0
    eps_boundary: float = 1e-6
    path_index: int = 0
    store_stride: int = 1

    def __post_init__(self):
        if self.dt <= 0.0:
            raise InputError("dt must be positive")
        if self.T < 1.0:
            raise InputError("horizon must be at least 1")
        n = int(round(self.T / self.dt))
        if n < 1 or abs(n * self.dt - self.T) > 1e-9 * self.T:
            raise InputError("horizon must be an integer number of steps")
        if self.store_stride < 1 or n % self.store_stride != 0:
            raise InputError("store_stride must divide the number of steps")
        if self.eps_boundary < 0.0:
            raise InputError("boundary guard must be nonnegative")
        if self.seed < 0 or self.path_index < 0:
            raise InputError("seed and path_index must be nonnegative")

    @property
    def n_steps(self):
        return int(round(self.T / self.dt))


@dataclass(frozen=True)
class StrategySpec:
    kind: str
    kappa: float = 0.0
    position_fn: object = None
    name: str = ""

    @classmethod
    def pi_star(cls):
        return cls("pi_star", name="pi_star")

    @classmethod
    def constant_proportion(cls, kappa):
        return cls("constant_proportion", kappa=float(kappa),
                   name=f"constant_{float(kappa):g}")

    @classmethod
    def custom(cls, fn, name="custom"):
        if not callable(fn):
            raise InputError("custom strategy needs a callable position function")
        return cls("custom", position_fn=fn, name=name)

    @property
    def label(self):
        return self.name or self.kind


@dataclass(eq=False)
class PathRecord:
    times: np.ndarray
    states: np.ndarray
    dt: float
    seed: int
    path_index: int
    stopped: bool = False
    stop_time: float = None
    wealth: np.ndarray = None
    bound: np.ndarray = None
    strategy: str = None


# ---------------------------------------------------------------------------
# counter-based normals: a pure function of (seed, path, step, draw)

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_C_PATH = np.uint64(0x9E3779B97F4A7C15)
_C_STEP = np.uint64(0xD1342543DE82EF95)
_C_DRAW = np.uint64(0x2545F4914F6CDD1D)
_C_SPLIT = np.uint64(0x8BB84B93962EACC9)
_TWO53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _normal_at(seed, path, step, draw):
    u = _mix64(seed ^ (path * _C_PATH + np.uint64(1)))
    u = _mix64(u ^ (step * _C_STEP + np.uint64(2)))
    u = _mix64(u ^ (draw * _C_DRAW + np.uint64(3)))
    v = _mix64(u ^ _C_SPLIT)
    u1 = (float(u >> np.uint64(11)) + 1.0) * _TWO53
    u2 = float(v >> np.uint64(11)) * _TWO53
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@njit(cache=True, inline="always")
def _lerp(s0, inv_h, vals, x, clamp):
    pos = (x - s0) * inv_h
    idx = int(math.floor(pos))
    if idx < 0:
        idx = 0
    elif idx > vals.shape[0] - 2:
        idx = vals.shape[0] - 2
    w = pos - idx
    if clamp:
        if w < 0.0:
            w = 0.0
        elif w > 1.0:
            w = 1.0
    return vals[idx] * (1.0 - w) + vals[idx + 1] * w


# ---------------------------------------------------------------------------
# 1D kernel


@njit(cache=True, inline="always")
def _drift_ratio(x, ns0, nih, nvals, ds0, dih, dvals):
    num = _lerp(ns0, nih, nvals, x, False)
    den = _lerp(ds0, dih, dvals, x, True)
    if den < 1e-300:
        den = 1e-300
    return num / den


@njit(cache=True)
def _advance_1d(x, dt, seed, path, step, a, b_dom, eps,
                drift_on, cs0, cih, cvals,
                ns0, nih, nvals, ds0, dih, dvals):
    draw = np.uint64(0)
    remaining = dt
    h_floor = dt * 1e-9
    for _ in range(_MAX_SUBSTEPS):
        delta = x - a
        other = b_dom - x
        if other < delta:
            delta = other
        if delta <= eps:
            return x, draw, False
        if remaining <= 0.0:
            return x, draw, True
        c = _lerp(cs0, cih, cvals, x, True)
        if drift_on:
            h = delta * delta / (_ZONE_FACTOR2 * c)
            if h < h_floor:
                h = h_floor
            if h > remaining:
                h = remaining
            bq = c * _drift_ratio(x, ns0, nih, nvals, ds0, dih, dvals)
            cap = math.sqrt(delta * delta + 2.0 * c * h) - delta
            mag = abs(bq) * h
            if mag > cap:
                mag = cap
            disp = mag if bq >= 0.0 else -mag
        else:
            h = remaining
            disp = 0.0
        z = _normal_at(seed, path, step, draw)
        draw += np.uint64(1)
        x = x + disp + math.sqrt(c * h) * z
        remaining -= h
    return x, draw, False


@njit(cache=True)
def _kernel_1d(seed, path0, n_paths, n_steps, dt, x0, a, b_dom, eps,
               drift_on, cs0, cih, cvals, ns0, nih, nvals, ds0, dih, dvals,
               lam, gs0, gih, gvals,
               kinds, kappas,
               lo_step, hi_step, gstride,
               sstride, store_on, states,
               stop_step, vstate, gsum, gcnt, ruined, minw):
    n_strat = kinds.shape[0]
    useed = np.uint64(seed)
    for i in range(n_paths):
        upath = np.uint64(path0 + i)
        x = x0
        if store_on:
            states[i, 0] = x
        col = 1
        for step in range(n_steps):
            xn, draw, alive = _advance_1d(
                x, dt, useed, upath, np.uint64(step), a, b_dom, eps,
                drift_on, cs0, cih, cvals, ns0, nih, nvals, ds0, dih, dvals)
            if not alive:
                stop_step[i] = step + 1
                break
            dx = xn - x
            t = step * dt
            for s in range(n_strat):
                if kinds[s] == KIND_PI_STAR:
                    pos = math.exp(lam * t) * _lerp(gs0, gih, gvals, x, False)
                    vstate[s, i] += pos * dx
                    if vstate[s, i] < minw[s, i]:
                        minw[s, i] = vstate[s, i]
                else:
                    ratio = kappas[s] * dx / x
                    if not ruined[s, i]:
                        if ratio <= -1.0 + _RUIN_EPS:
                            ruined[s, i] = True
                        else:
                            vstate[s, i] += math.log1p(ratio)
            x = xn
            step1 = step + 1
            if store_on and step1 % sstride == 0:
                states[i, col] = x
                col += 1
            if gstride > 0 and step1 % gstride == 0 and lo_step <= step1 <= hi_step:
                tn = step1 * dt
                for s in range(n_strat):
                    if kinds[s] == KIND_PI_STAR:
                        v = vstate[s, i]
                        if v > 0.0:
                            gsum[s, i] += math.log(v) / tn
                            gcnt[s, i] += 1
                    elif not ruined[s, i]:
                        gsum[s, i] += vstate[s, i] / tn
                        gcnt[s, i] += 1


# ---------------------------------------------------------------------------
# radial (ball) kernel


@njit(cache=True)
def _advance_ball(x, dt, seed, path, step, radius, eps, dim,
                  drift_on, rs0, rih, rvals, ts0, tih, tvals,
                  ns0, nih, nvals, ds0, dih, dvals):
    draw = np.uint64(0)
    remaining = dt
    h_floor = dt * 1e-9
    z = np.empty(dim)
    for _ in range(_MAX_SUBSTEPS):
        r = 0.0
        for k in range(dim):
            r += x[k] * x[k]
        r = math.sqrt(r)
        delta = radius - r
        if delta <= eps:
            return draw, False
        if remaining <= 0.0:
            return draw, True
        cr = _lerp(rs0, rih, rvals, r, True)
        ct = _lerp(ts0, tih, tvals, r, True)
        inv_r = 1.0 / r if r > 1e-300 else 0.0
        if drift_on:
            h = delta * delta / (_ZONE_FACTOR2 * cr)
            if h < h_floor:
                h = h_floor
            if h > remaining:
                h = remaining
            if r > 1e-300:
                bq = cr * _drift_ratio(r, ns0, nih, nvals, ds0, dih, dvals)
                cap = math.sqrt(delta * delta + 2.0 * cr * h) - delta
                mag = abs(bq) * h
                if mag > cap:
                    mag = cap
                disp = mag if bq >= 0.0 else -mag
            else:
                disp = 0.0
        else:
            h = remaining
            disp = 0.0
        zr = 0.0
        for k in range(dim):
            z[k] = _normal_at(seed, path, step, draw)
            draw += np.uint64(1)
            zr += z[k] * x[k] * inv_r
        sr = math.sqrt(cr * h)
        st = math.sqrt(ct * h)
        for k in range(dim):
            e_k = x[k] * inv_r
            x[k] = x[k] + disp * e_k + sr * zr * e_k + st * (z[k] - zr * e_k)
        remaining -= h
    return draw, False


@njit(cache=True)
def _kernel_ball(seed, path0, n_paths, n_steps, dt, x0, radius, eps, dim,
                 drift_on, rs0, rih, rvals, ts0, tih, tvals,
                 ns0, nih, nvals, ds0, dih, dvals,
                 lam, gs0, gih, gvals,
                 kinds, kappas,
                 lo_step, hi_step, gstride,
                 sstride, store_on, states,
                 stop_step, vstate, gsum, gcnt, ruined, minw):
    n_strat = kinds.shape[0]
    useed = np.uint64(seed)
    x = np.empty(dim)
    xp = np.empty(dim)
    for i in range(n_paths):
        upath = np.uint64(path0 + i)
        for k in range(dim):
            x[k] = x0[k]
        if store_on:
            for k in range(dim):
                states[i, 0, k] = x[k]
        col = 1
        for step in range(n_steps):
            for k in range(dim):
                xp[k] = x[k]
            draw, alive = _advance_ball(
                x, dt, useed, upath, np.uint64(step), radius, eps, dim,
                drift_on, rs0, rih, rvals, ts0, tih, tvals,
                ns0, nih, nvals, ds0, dih, dvals)
            if not alive:
                stop_step[i] = step + 1
                for k in range(dim):
                    x[k] = xp[k]
                break
            t = step * dt
            rp = 0.0
            dot_e_dx = 0.0
            dot_x_dx = 0.0
            xx = 0.0
            for k in range(dim):
                rp += xp[k] * xp[k]
                dot_x_dx += xp[k] * (x[k] - xp[k])
                xx += xp[k] * xp[k]
            rp = math.sqrt(rp)
            if rp > 1e-300:
                dot_e_dx = dot_x_dx / rp
            for s in range(n_strat):
                if kinds[s] == KIND_PI_STAR:
                    pos = math.exp(lam * t) * _lerp(gs0, gih, gvals, rp, False)
                    vstate[s, i] += pos * dot_e_dx
                    if vstate[s, i] < minw[s, i]:
                        minw[s, i] = vstate[s, i]
                else:
                    ratio = kappas[s] * dot_x_dx / xx
                    if not ruined[s, i]:
                        if ratio <= -1.0 + _RUIN_EPS:
                            ruined[s, i] = True
                        else:
                            vstate[s, i] += math.log1p(ratio)
            step1 = step + 1
            if store_on and step1 % sstride == 0:
                for k in range(dim):
                    states[i, col, k] = x[k]
                col += 1
            if gstride > 0 and step1 % gstride == 0 and lo_step <= step1 <= hi_step:
                tn = step1 * dt
                for s in range(n_strat):
                    if kinds[s] == KIND_PI_STAR:
                        v = vstate[s, i]
                        if v > 0.0:
                            gsum[s, i] += math.log(v) / tn
                            gcnt[s, i] += 1
                    elif not ruined[s, i]:
                        gsum[s, i] += vstate[s, i] / tn
                        gcnt[s, i] += 1


# ---------------------------------------------------------------------------
# evaluation helpers (python side)


class _UniformInterp:
    """Linear interpolation on an equispaced abscissa; optional end extrapolation."""

    __slots__ = ("s0", "inv_h", "vals", "n", "extrapolate")

    def __init__(self, s0, h, vals, extrapolate=False):
        self.s0 = float(s0)
        self.inv_h = 1.0 / float(h)
        self.vals = np.asarray(vals, dtype=float)
        self.n = self.vals.shape[0]
        self.extrapolate = extrapolate

    def __call__(self, q):
        pos = (np.asarray(q, dtype=float) - self.s0) * self.inv_h
        idx = np.clip(np.floor(pos).astype(np.int64), 0, self.n - 2)
        w = pos - idx
        if not self.extrapolate:
            w = np.clip(w, 0.0, 1.0)
        v = self.vals
        return v[idx] * (1.0 - w) + v[idx + 1] * w


def _eta_interp(eigenpair):
    grid = eigenpair.grid
    if isinstance(grid.domain, Interval):
        vals = np.concatenate(([0.0], eigenpair.eta, [0.0]))
        value = _UniformInterp(grid.domain.a, grid.h, vals)
    else:
        vals = np.concatenate((eigenpair.eta, [0.0]))
        value = _UniformInterp(0.0, grid.h, vals)
    grad = _UniformInterp(grid.nodes[0], grid.h, eigenpair._grad_nodes,
                          extrapolate=True)
    return value, grad


def _field_table(sf, grid):
    """(s0, inv_h, values) triple for kernel-side interpolation of a field."""
    vals = sf(grid.nodes)
    return float(grid.nodes[0]), 1.0 / grid.h, np.asarray(vals, dtype=float)


def _require_inside(domain, states):
    if isinstance(domain, Interval):
        lo = float(np.min(states))
        hi = float(np.max(states))
        if lo < domain.a or hi > domain.b:
            raise EvaluationError(
                f"states leave the interpolation range [{domain.a}, {domain.b}]"
            )
    else:
        r = domain.radius_of(states)
        if float(np.max(r)) > domain.radius:
            raise EvaluationError("states leave the ball of the eigenfunction")


# ---------------------------------------------------------------------------
# engine wrapper


@dataclass(eq=False)
class _EngineOut:
    n_steps: int
    dt: float
    stop_step: np.ndarray
    stored_steps: np.ndarray = None
    states: np.ndarray = None
    growth: dict = field(default_factory=dict)
    growth_count: dict = field(default_factory=dict)
    ruined: dict = field(default_factory=dict)
    min_wealth: dict = field(default_factory=dict)


_EMPTY = np.empty(0)


def _run_engine(c, drift, domain, cfg, n_paths, strategies=(), lam_star=None,
                eig_star=None, store=False, window=None, growth_stride=1):
    """Advance an ensemble; optionally store strided states, accumulate
    per-strategy wealth, and average log-growth over a terminal window."""
    dim = domain.state_dim
    dt = cfg.dt
    n_steps = cfg.n_steps
    eps = cfg.eps_boundary
    grid = None

    if strategies:
        if lam_star is None or eig_star is None:
            raise InputError("strategies need lam_star and the eigenfunction")
        for spec in strategies:
            if spec.kind == "custom":
                raise InputError(
                    "custom strategies run through wealth_path on recorded paths"
                )
        grid = eig_star.grid
        gs0 = float(grid.nodes[0])
        gih = 1.0 / grid.h
        gvals = eig_star._grad_nodes
        lam = float(lam_star)
    else:
        gs0, gih, gvals, lam = 0.0, 1.0, _EMPTY, 0.0

    if drift is not None:
        if drift.eta.min() <= 0.0:
            raise InputError("drift reference eigenfunction must be positive")
        qgrid = drift.grid
        ns0 = float(qgrid.nodes[0])
        nih = 1.0 / qgrid.h
        nvals = drift._grad_nodes
        if isinstance(qgrid.domain, Interval):
            ds0 = float(qgrid.domain.a)
            dvals = np.concatenate(([0.0], drift.eta, [0.0]))
        else:
            ds0 = 0.0
            dvals = np.concatenate((drift.eta, [0.0]))
        dih = 1.0 / qgrid.h
        grid = grid or qgrid
        drift_on = True
    else:
        ns0, nih, nvals = 0.0, 1.0, _EMPTY
        ds0, dih, dvals = 0.0, 1.0, _EMPTY
        drift_on = False

    if grid is None:
        from .fields import make_grid

        grid = make_grid(domain, max(256, 16))

    kinds = np.array(
        [KIND_PI_STAR if s.kind == "pi_star" else KIND_CONSTANT for s in strategies],
        dtype=np.int64,
    )
    kappas = np.array([s.kappa for s in strategies], dtype=float)
    n_strat = len(strategies)
    vstate = np.zeros((n_strat, n_paths))
    minw = np.ones((n_strat, n_paths))
    for s, spec in enumerate(strategies):
        if spec.kind != "constant_proportion":
            vstate[s] = 1.0  # additive wealth starts at one; log wealth at zero
    gsum = np.zeros((n_strat, n_paths))
    gcnt = np.zeros((n_strat, n_paths), dtype=np.int64)
    ruined = np.zeros((n_strat, n_paths), dtype=bool)
    stop_step = np.full(n_paths, -1, dtype=np.int64)

    if window is not None and growth_stride > 0:
        lo_step = int(math.ceil(window[0] / dt - 1e-9))
        hi_step = int(math.floor(window[1] / dt + 1e-9))
        gstride = int(growth_stride)
    else:
        lo_step, hi_step, gstride = 0, -1, 0

    if store:
        stride = cfg.store_stride
        n_stored = n_steps // stride + 1
        stored_steps = stride * np.arange(n_stored, dtype=np.int64)
    else:
        stride = n_steps
        n_stored = 1
        stored_steps = None

    if dim == 1:
        x0 = float(cfg.x0)
        if not domain.contains(x0):
            raise InputError(f"start point {x0} is not interior")
        states = np.zeros((n_paths, n_stored)) if store else np.zeros((1, 1))
        cs0, cih, cvals = _field_table(c.component(0), grid)
        _kernel_1d(cfg.seed, cfg.path_index, n_paths, n_steps, dt, x0,
                   domain.a, domain.b, eps, drift_on,
                   cs0, cih, cvals, ns0, nih, nvals, ds0, dih, dvals,
                   lam, gs0, gih, gvals, kinds, kappas,
                   lo_step, hi_step, gstride,
                   stride, store, states,
                   stop_step, vstate, gsum, gcnt, ruined, minw)
    else:
        x0 = np.asarray(cfg.x0, dtype=float)
        if x0.shape != (dim,) or not domain.contains(x0):
            raise InputError("start point must be an interior point of the ball")
        states = np.zeros((n_paths, n_stored, dim)) if store else np.zeros((1, 1, dim))
        rs0, rih, rvals = _field_table(c.component(0), grid)
        ts0, tih, tvals = _field_table(c.component(1), grid)
        _kernel_ball(cfg.seed, cfg.path_index, n_paths, n_steps, dt, x0,
                     domain.radius, eps, dim, drift_on,
                     rs0, rih, rvals, ts0, tih, tvals,
                     ns0, nih, nvals, ds0, dih, dvals,
                     lam, gs0, gih, gvals, kinds, kappas,
                     lo_step, hi_step, gstride,
                     stride, store, states,
                     stop_step, vstate, gsum, gcnt, ruined, minw)

    out = _EngineOut(n_steps, dt, stop_step,
                     stored_steps, states if store else None)
    for s, spec in enumerate(strategies):
        lab = spec.label
        out.ruined[lab] = ruined[s]
        out.min_wealth[lab] = minw[s]
        if gstride > 0:
            with np.errstate(invalid="ignore"):
                out.growth[lab] = np.where(gcnt[s] > 0, gsum[s] / np.maximum(gcnt[s], 1),
                                           np.nan)
            out.growth_count[lab] = gcnt[s]
    return out


# ---------------------------------------------------------------------------
# public path API


def _extract_record(out, cfg, path_row, path_index):
    steps = out.stored_steps
    times = steps * out.dt
    stop = int(out.stop_step[path_row])
    stopped = stop >= 0
    if stopped:
        keep = steps <= stop - 1
        times = times[keep]
        path_states = out.states[path_row][keep]
        stop_time = stop * out.dt
    else:
        path_states = out.states[path_row]
        stop_time = None
    return PathRecord(times, path_states.copy(), cfg.dt, cfg.seed, path_index,
                      stopped=stopped, stop_time=stop_time)


def simulate_paths(c, drift, cfg, domain, n_paths):
    """Ensemble of state paths; path i draws from the (seed, path_index + i) stream."""
    if n_paths < 1:
        raise InputError("need at least one path")
    out = _run_engine(c, drift, domain, cfg, n_paths, store=True)
    return [_extract_record(out, cfg, i, cfg.path_index + i) for i in range(n_paths)]


def simulate_X(c, drift, cfg, domain):
    """One state path under covariance ``c``; drift None or an eigenpair."""
    return simulate_paths(c, drift, cfg, domain, 1)[0]


def wealth_path(path, lambda_star, eigenpair, strategy):
    """Fill the wealth and comparison series for a recorded path.

    Trading happens on the record's time grid: V_{k+1} = V_k + pi_k (X_{k+1}
    - X_k) with V_0 = 1.
    """
    domain = eigenpair.grid.domain
    _require_inside(domain, path.states)
    value_fn, grad_fn = _eta_interp(eigenpair)
    one_d = isinstance(domain, Interval)
    states = path.states
    times = path.times
    coords = states if one_d else domain.radius_of(states)
    dx = np.diff(states, axis=0)

    if strategy.kind == "pi_star":
        start = float(value_fn(coords[:1])[0])
        if abs(start - 1.0) > 1e-6:
            raise InputError(
                f"pi_star paths must start at the normalization point; eta(x0) = {start:.6g}"
            )
        pos = np.exp(lambda_star * times[:-1]) * grad_fn(coords[:-1])
        if one_d:
            inc = pos * dx
        else:
            e_r = states[:-1] / np.maximum(coords[:-1], 1e-300)[:, None]
            inc = pos * (e_r * dx).sum(axis=1)
        wealth = np.concatenate(([1.0], 1.0 + np.cumsum(inc)))
    elif strategy.kind == "constant_proportion":
        if one_d:
            ratio = strategy.kappa * dx / states[:-1]
        else:
            ratio = strategy.kappa * (states[:-1] * dx).sum(axis=1) \
                / (states[:-1] * states[:-1]).sum(axis=1)
        wealth = np.concatenate(([1.0], np.cumprod(1.0 + ratio)))
    elif strategy.kind == "custom":
        pos = strategy.position_fn(states[:-1], times[:-1])
        inc = pos * dx if one_d else (np.asarray(pos) * dx).sum(axis=1)
        wealth = np.concatenate(([1.0], 1.0 + np.cumsum(inc)))
    else:
        raise InputError(f"unknown strategy kind '{strategy.kind}'")

    bound = np.exp(lambda_star * times) * value_fn(coords)
    return replace(path, wealth=wealth, bound=bound, strategy=strategy.label)


def growth_rate(path, window=None):
    """Terminal-window average of t^-1 log V_t along one path."""
    if path.wealth is None:
        raise InputError("path has no wealth series; run wealth_path first")
    t = path.times
    v = path.wealth
    nonpos = v <= 0.0
    if nonpos.any():
        first = int(np.argmax(nonpos))
        raise PositivityError(
            f"wealth non-positive at t = {t[first]:.6g}", time=float(t[first])
        )
    t_end = float(t[-1])
    if window is None:
        window = (0.5 * t_end, t_end)
    lo, hi = float(window[0]), float(window[1])
    mask = (t >= lo) & (t <= hi) & (t > 0.0)
    if not mask.any():
        raise InputError("growth window contains no sampling times")
    return float(np.mean(np.log(v[mask]) / t[mask]))


# ---------------------------------------------------------------------------
# saddle experiment


@dataclass(frozen=True)
class SaddleConfig:
    dt: float = 1e-3
    T: float = 500.0
    n_paths: int = 200
    seed: int = 2024
    eps_boundary: float = 1e-6
    kappas: tuple = (0.5, 1.0)
    tol: float = 0.05
    n_sampled: int = 3
    window_frac: tuple = (0.5, 1.0)
    growth_stride: int = 0
    solver: es.SolverConfig = None

    def __post_init__(self):
        if self.n_paths < 1:
            raise InputError("need at least one path")
        if self.tol <= 0.0:
            raise InputError("tolerance must be positive")


@dataclass(eq=False)
class SaddleCell:
    scenario: str
    strategy: str
    n_paths: int
    n_stopped: int
    n_ruined: int
    mean_rate: float
    sd_rate: float

    def describe(self):
        return {
            "scenario": self.scenario,
            "strategy": self.strategy,
            "n_paths": int(self.n_paths),
            "n_stopped": int(self.n_stopped),
            "n_ruined": int(self.n_ruined),
            "mean_rate": float(self.mean_rate),
            "sd_rate": float(self.sd_rate),
        }


@dataclass(eq=False)
class SaddleReport:
    lambda_star: float
    tol: float
    cells: list
    verdicts: dict

    def describe(self):
        return {
            "lambda_star": float(self.lambda_star),
            "tol": float(self.tol),
            "cells": [c.describe() for c in self.cells],
            "verdicts": {k: bool(v) for k, v in self.verdicts.items()},
        }


def _envelope_field(bounds, which, grid):
    f = bounds.theta if which == "theta" else bounds.Theta
    if isinstance(grid.domain, Interval):
        return CovarianceField.scalar(f, spec={"kind": which})
    return CovarianceField.radial(f, f, spec={"kind": which})


def minmax_experiment(bounds, domain, grid, cfg):
    """Growth-rate matrix over strategies and covariance scenarios.

    Every scenario runs under the recurrent dynamics tied to its own linear
    eigenfunction.  The robust strategy must reach the extremal rate, less
    a tolerance, in every scenario; under the worst case (covariance pinned
    at the lower envelope) no tested strategy may beat that rate plus the
    tolerance.
    """
    from .fields import sample_covariance

    solver = cfg.solver or es.SolverConfig(n=grid.n)
    star = es.principal_eig_pucci(bounds, grid, solver)
    lam_star = star.lam
    if lam_star * cfg.T > 600.0:
        raise InputError("horizon too long: wealth would overflow double range")

    scenarios = [("c=theta", _envelope_field(bounds, "theta", grid)),
                 ("c=Theta", _envelope_field(bounds, "Theta", grid))]
    for i in range(cfg.n_sampled):
        child = _child_seed(cfg.seed, 1000 + i)
        scenarios.append((f"sampled_{i}", sample_covariance(bounds, grid, "fourier", child)))

    strategies = [StrategySpec.pi_star()] + [
        StrategySpec.constant_proportion(k) for k in cfg.kappas
    ]

    one_d = isinstance(domain, Interval)
    x0 = star.x0 if one_d else tuple(
        c0 + (star.x0 if j == 0 else 0.0) for j, c0 in enumerate(domain.center)
    )
    n_steps = int(round(cfg.T / cfg.dt))
    stride = cfg.growth_stride or max(1, n_steps // 1000)
    window = (cfg.window_frac[0] * cfg.T, cfg.window_frac[1] * cfg.T)

    cells = []
    for s_idx, (name, c) in enumerate(scenarios):
        eta_c = es.principal_eig_linear(c, grid, solver)
        path_cfg = PathConfig(x0=x0, dt=cfg.dt, T=cfg.T,
                              seed=_child_seed(cfg.seed, s_idx),
                              eps_boundary=cfg.eps_boundary, store_stride=n_steps)
        out = _run_engine(c, eta_c, domain, path_cfg, cfg.n_paths,
                          strategies=strategies, lam_star=lam_star,
                          eig_star=star, window=window, growth_stride=stride)
        stopped = out.stop_step >= 0
        for spec in strategies:
            lab = spec.label
            ok = ~stopped & ~out.ruined[lab] & (out.growth_count[lab] > 0)
            rates = out.growth[lab][ok]
            cells.append(SaddleCell(
                scenario=name,
                strategy=lab,
                n_paths=cfg.n_paths,
                n_stopped=int(stopped.sum()),
                n_ruined=int(out.ruined[lab].sum()),
                mean_rate=float(rates.mean()) if rates.size else float("nan"),
                sd_rate=float(rates.std()) if rates.size else float("nan"),
            ))

    lower_ok = True
    upper_ok = True
    offender = None
    for cell in cells:
        if cell.strategy == "pi_star" and not cell.mean_rate >= lam_star - cfg.tol:
            lower_ok = False
            offender = offender or cell
        if cell.scenario == "c=theta" and not cell.mean_rate <= lam_star + cfg.tol:
            upper_ok = False
            offender = offender or cell
    report = SaddleReport(lam_star, cfg.tol, cells,
                          {"pi_star_lower_bound": lower_ok,
                           "worst_case_upper_bound": upper_ok})
    if not (lower_ok and upper_ok):
        raise SaddleViolation(
            f"saddle cell ({offender.scenario}, {offender.strategy}) broke its bound "
            f"with mean rate {offender.mean_rate:.4g} vs lambda* = {lam_star:.4g}",
            report=report,
        )
    return report

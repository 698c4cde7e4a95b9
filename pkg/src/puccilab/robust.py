"""Numerical certificates for the extremal min-max identities.

Three checks live here.  Dominance: every sampled admissible covariance
has a principal eigenvalue at least the extremal one, up to a measured
grid budget.  Selection: an explicit near-optimal covariance built from
the extremal eigenfunction brings the linear eigenvalue within 3/m of the
extremal one, certified by direct evaluation of the operator defect.
Exhaustion: eigenvalues along a growing family of subdomains decrease to
the parent value.

The inf over the admissible class is witnessed, never enumerated: sampling
bounds it from below and the constructed selection from above.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import eigensolver as es
from .errors import IdentityViolation, InputError, ResolutionError
from .fields import (
    CovarianceField,
    Interval,
    ScalarField,
    build_exhaustion,
    make_grid,
    sample_covariance,
    validate_covariance,
)

SELECTION_MARGIN = 1.0 - 1e-9  # keep measured moduli strictly below target
MONOTONE_TOL = 1e-6


def _child_seed(seed, index):
    # stable integer derivation for per-sample generators
    return int(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
               .generate_state(1)[0])


# ---------------------------------------------------------------------------
# near-optimal selection


@dataclass(eq=False)
class SelectionField:
    m: int
    kappa: float
    xi: float
    beta: float
    gamma: np.ndarray
    Gamma: np.ndarray
    c_raw: CovarianceField
    c_smooth: CovarianceField
    sup_defect: float
    allowance: float
    mollify_width: float

    def describe(self):
        return {
            "m": int(self.m),
            "kappa": float(self.kappa),
            "xi": float(self.xi),
            "beta": float(self.beta),
            "sup_defect": float(self.sup_defect),
            "allowance": float(self.allowance),
            "mollify_width": float(self.mollify_width),
        }


def _bisect_threshold(measure, target, hi_cap):
    """Largest argument with measure(arg) < target, measured directly."""
    if measure(hi_cap) < target:
        return hi_cap
    lo, hi = 0.0, hi_cap
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if measure(mid) < target:
            lo = mid
        else:
            hi = mid
    return lo * SELECTION_MARGIN


def _mollify_tabulated(values, h, span, target):
    """Gaussian moving average with boundary reflection; the width halves
    until every entry moves by less than ``target``."""
    width = max(span / 8.0, h)
    while True:
        m = max(int(np.ceil(3.0 * width / h)), 1)
        offs = np.arange(-m, m + 1)
        w = np.exp(-0.5 * (offs * h / width) ** 2)
        w /= w.sum()
        padded = np.concatenate((values[m:0:-1], values, values[-2:-m - 2:-1]))
        smooth = np.convolve(padded, w, mode="valid")
        if np.abs(smooth - values).max() < target:
            return smooth, width
        width *= 0.5


def construct_selection(eigenpair, bounds, grid, m):
    """Build the explicit near-optimal covariance for a given accuracy level.

    Steps: measure the modulus of the half plus operator against bound
    perturbations and bisect for the largest kappa keeping the change below
    2/m; shrink the envelope to (gamma, Gamma) by (kappa ^ xi)/4; take the
    pointwise maximizing coefficient of the shrunken operator along the
    eigenfunction's discrete Hessian; mollify just enough to stay smooth
    while the certified defect of the extremal equation stays below 3/m.
    """
    m = int(m)
    if m < 1:
        raise InputError(f"m must be at least 1, got {m}")
    if eigenpair.eta.shape != (grid.n,):
        raise InputError("eigenpair must live on the given grid")
    theta_n, Theta_n = bounds.validate_on(grid)
    hess = es.discrete_hessian(eigenpair.eta, grid)
    mult = es._direction_multiplicities(grid)

    def half_plus(lo, hi):
        return es._pucci_values(lo, hi, hess, mult)

    base = half_plus(theta_n, Theta_n)

    def modulus(kappa):
        worst = 0.0
        for dlo in (-kappa, kappa):
            for dhi in (-kappa, kappa):
                worst = max(worst, float(np.abs(
                    half_plus(theta_n + dlo, Theta_n + dhi) - base).max()))
        return worst

    target = 2.0 / m
    kappa = _bisect_threshold(modulus, target, hi_cap=float(Theta_n.max()) + 1.0)
    xi = float((Theta_n - theta_n).min())
    s = 0.25 * min(kappa, xi)
    gamma = theta_n + s
    Gamma = Theta_n - s

    # beta: tolerated coefficient perturbation for a < 1/m drift of the
    # linear operator along the same Hessian field
    def l_modulus(b):
        return 0.5 * b * float((np.abs(hess) * mult).sum(axis=1).max())

    beta = _bisect_threshold(l_modulus, 1.0 / m, hi_cap=float(Theta_n.max()) + 1.0)

    d = grid.domain.state_dim
    per_dir = np.where(hess >= 0.0, Gamma[:, None], gamma[:, None])
    entry_target = min(beta, s) / d if s > 0.0 else beta / d
    span = float(grid.nodes[-1] - grid.nodes[0]) or grid.h

    smooth_cols = []
    width = 0.0
    for j in range(per_dir.shape[1]):
        col, width = _mollify_tabulated(per_dir[:, j], grid.h, span, entry_target)
        smooth_cols.append(col)

    if isinstance(grid.domain, Interval):
        c_raw = CovarianceField.scalar(ScalarField.tabulated(grid, per_dir[:, 0]),
                                       spec={"kind": "selection_raw", "m": m})
        c_smooth = CovarianceField.scalar(ScalarField.tabulated(grid, smooth_cols[0]),
                                          spec={"kind": "selection", "m": m})
    else:
        c_raw = CovarianceField.radial(
            ScalarField.tabulated(grid, per_dir[:, 0]),
            ScalarField.tabulated(grid, per_dir[:, 1]),
            spec={"kind": "selection_raw", "m": m})
        c_smooth = CovarianceField.radial(
            ScalarField.tabulated(grid, smooth_cols[0]),
            ScalarField.tabulated(grid, smooth_cols[1]),
            spec={"kind": "selection", "m": m})

    report = validate_covariance(c_smooth, bounds, grid)
    if not report.passed:
        raise ResolutionError(
            f"mollified selection left the envelope by {report.max_violation:.3g}; "
            "use a finer grid"
        )

    smooth_arr = np.column_stack(smooth_cols)
    linear_vals = 0.5 * (smooth_arr * hess * mult).sum(axis=1)
    sup_defect = float((base - linear_vals).max())
    allowance = float(eigenpair.residual)
    bound = 3.0 / m
    if allowance > bound:
        raise ResolutionError(
            f"eigenpair residual {allowance:.3g} exceeds the certificate level "
            f"{bound:.3g}; use a finer grid"
        )
    if sup_defect > bound + allowance:
        raise ResolutionError(
            f"measured defect {sup_defect:.3g} not certified below 3/m = {bound:.3g}; "
            "use a finer grid"
        )
    return SelectionField(m, float(kappa), xi, float(beta), gamma, Gamma,
                          c_raw, c_smooth, sup_defect, allowance, float(width))


# ---------------------------------------------------------------------------
# min-max verification


@dataclass(eq=False)
class MinMaxReport:
    lambda_star: float
    grid_increment: float
    budget: float
    samples: list = field(default_factory=list)
    lambda_min_sampled: float = float("nan")
    selections: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    n: int = 0
    seed: int = 0

    def describe(self):
        return {
            "lambda_star": float(self.lambda_star),
            "grid_increment": float(self.grid_increment),
            "budget": float(self.budget),
            "lambda_min_sampled": float(self.lambda_min_sampled),
            "n": int(self.n),
            "seed": int(self.seed),
            "samples": self.samples,
            "selections": self.selections,
            "verdicts": {k: bool(v) for k, v in self.verdicts.items()},
        }


def grid_convergence_increment(bounds, grid, cfg=None):
    """|lambda(n) - lambda(2n)| for the extremal problem; the grid budget."""
    cfg = cfg or es.SolverConfig(n=grid.n)
    lam_here = es.principal_eig_pucci(bounds, grid, cfg).lam
    fine = make_grid(grid.domain, 2 * grid.n)
    lam_fine = es.principal_eig_pucci(bounds, fine, cfg).lam
    return abs(lam_here - lam_fine), lam_here


def verify_minmax(bounds, grid, n_samples, m_list, seed, cfg=None,
                  families=("constant", "fourier", "piecewise"), n_workers=1):
    """Two-sided certificate for the extremal eigenvalue as an infimum.

    Sampled eigenvalues must dominate the extremal one up to the measured
    budget; the constructed selections must approach it from above with
    gaps below 3/m plus the grid increment.
    """
    cfg = cfg or es.SolverConfig(n=grid.n)
    n_samples = int(n_samples)
    if n_samples < 1:
        raise InputError("need at least one sample")
    increment, lam_star = grid_convergence_increment(bounds, grid, cfg)
    budget = 2.0 * increment + cfg.lam_tol
    star = es.principal_eig_pucci(bounds, grid, cfg)

    report = MinMaxReport(lam_star, increment, budget, n=grid.n, seed=int(seed))

    def solve_sample(i):
        family = families[i % len(families)]
        child = _child_seed(seed, i)
        c = sample_covariance(bounds, grid, family, child)
        check = validate_covariance(c, bounds, grid)
        if not check.passed:
            raise InputError(
                f"sampled field {i} failed admissibility by {check.max_violation:.3g}"
            )
        lam = es.principal_eig_linear(c, grid, cfg).lam
        return {"index": i, "family": family, "seed": child, "lambda": float(lam)}

    if n_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=int(n_workers)) as pool:
            report.samples = list(pool.map(solve_sample, range(n_samples)))
    else:
        report.samples = [solve_sample(i) for i in range(n_samples)]

    lam_values = np.array([s["lambda"] for s in report.samples])
    report.lambda_min_sampled = float(lam_values.min())
    dominance = bool(lam_values.min() >= lam_star - budget)
    report.verdicts["dominance"] = dominance
    if not dominance:
        worst = int(np.argmin(lam_values))
        raise IdentityViolation(
            f"sample {worst} gave lambda {lam_values[worst]:.9g} below "
            f"lambda* - budget = {lam_star - budget:.9g}",
            report=report,
        )

    prev_gap = np.inf
    within = True
    monotone = True
    for m in sorted(int(m) for m in m_list):
        sel = construct_selection(star, bounds, grid, m)
        lam_m = es.principal_eig_linear(sel.c_smooth, grid, cfg).lam
        gap = lam_m - lam_star
        report.selections.append({
            "m": m,
            "lambda": float(lam_m),
            "gap": float(gap),
            "defect": float(sel.sup_defect),
            "kappa": float(sel.kappa),
        })
        if gap > 3.0 / m + budget or gap < -budget:
            within = False
        if gap > prev_gap + 1e-3:
            monotone = False
        prev_gap = gap
    report.verdicts["selection_within_bound"] = within
    report.verdicts["selection_monotone"] = monotone
    if not (within and monotone):
        raise IdentityViolation("selection sequence violated its bound", report=report)
    return report


# ---------------------------------------------------------------------------
# exhaustion limit


@dataclass(eq=False)
class ExhaustionReport:
    lambdas: list
    members: list
    monotone: bool
    known_limit: float = None
    limit_gap: float = None

    def describe(self):
        out = {
            "lambdas": [float(v) for v in self.lambdas],
            "members": self.members,
            "monotone": bool(self.monotone),
        }
        if self.known_limit is not None:
            out["known_limit"] = float(self.known_limit)
            out["limit_gap"] = float(self.limit_gap)
        return out


def exhaustion_limit(parent, bounds, n_max, grid_n=1000, shrink=1.0, cfg=None,
                     known_limit=None):
    """Extremal eigenvalues along a growing exhaustion of ``parent``.

    The sequence must be nonincreasing (within a strict tolerance); when
    the limiting value is supplied the terminal gap is reported as well.
    """
    family = build_exhaustion(parent, n_max, shrink)
    lambdas = []
    members = []
    for member in family:
        grid = make_grid(member, grid_n)
        pair = es.principal_eig_pucci(bounds.restricted(member), grid,
                                      cfg or es.SolverConfig(n=grid_n))
        lambdas.append(pair.lam)
        members.append(member.describe())
    arr = np.array(lambdas)
    steps = np.diff(arr)
    monotone = bool((steps <= MONOTONE_TOL).all())
    report = ExhaustionReport(lambdas, members, monotone)
    if known_limit is not None:
        report.known_limit = float(known_limit)
        report.limit_gap = float(arr[-1] - known_limit)
    if not monotone:
        worst = int(np.argmax(steps))
        raise IdentityViolation(
            f"sequence increased by {steps[worst]:.3g} from member {worst + 1} "
            f"to {worst + 2}",
            report=report,
        )
    return report

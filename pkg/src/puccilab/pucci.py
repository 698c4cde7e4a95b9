"""Extremal (Pucci-type) operators on small dense symmetric matrices.

The extremal operators act through the eigenvalues of a symmetric matrix:
the plus operator pays the upper ellipticity bound on the positive part of
the spectrum and the lower bound on the negative part; the minus operator
swaps the roles.  ``eval_F`` is half the plus operator with pointwise
bounds read off an uncertainty envelope, and ``extremal_coefficient``
returns the coefficient matrix attaining the supremum, built on the same
eigenframe.

Dimensions are capped at 3 and the eigendecomposition is an in-house
cyclic Jacobi sweep, so everything here is pure, deterministic, and exact
to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

MAX_DIM = 3
_MAX_SWEEPS = 40


@dataclass(frozen=True)
class SymmetricMatrix:
    """Symmetric d x d matrix, d <= 3, stored as the upper triangle row-major."""

    dim: int
    entries: tuple

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise InputError(f"dim must be 1, 2 or 3, got {self.dim}")
        want = self.dim * (self.dim + 1) // 2
        if len(self.entries) != want:
            raise InputError(
                f"dim {self.dim} needs {want} upper-triangle entries, got {len(self.entries)}"
            )
        if not all(math.isfinite(v) for v in self.entries):
            raise InputError("matrix entries must be finite")

    @classmethod
    def from_array(cls, arr):
        a = np.asarray(arr, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError(f"expected a square matrix, got shape {a.shape}")
        d = a.shape[0]
        if d > MAX_DIM:
            raise InputError(f"dim must be <= {MAX_DIM}, got {d}")
        if not np.all(np.isfinite(a)):
            raise InputError("matrix entries must be finite")
        scale = 1.0 + np.abs(a).max()
        if np.abs(a - a.T).max() > 1e-9 * scale:
            raise InputError("matrix is not symmetric")
        a = 0.5 * (a + a.T)
        ent = tuple(float(a[i, j]) for i in range(d) for j in range(i, d))
        return cls(d, ent)

    def to_array(self):
        d = self.dim
        a = np.zeros((d, d))
        k = 0
        for i in range(d):
            for j in range(i, d):
                a[i, j] = a[j, i] = self.entries[k]
                k += 1
        return a


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted ascending, eigenvectors as orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class EllipticityPair:
    """Lower and upper ellipticity bounds, 0 < lo <= hi."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise InputError("ellipticity bounds must be finite")
        if not (0.0 < self.lo <= self.hi):
            raise InputError(f"need 0 < lo <= hi, got ({self.lo}, {self.hi})")


def _as_pair(bounds):
    if isinstance(bounds, EllipticityPair):
        return bounds.lo, bounds.hi
    lo, hi = float(bounds[0]), float(bounds[1])
    EllipticityPair(lo, hi)
    return lo, hi


def _as_array(M):
    if isinstance(M, SymmetricMatrix):
        return M.to_array()
    return SymmetricMatrix.from_array(M).to_array()


def _jacobi(a, d):
    # Cyclic Jacobi on nested lists; a is destroyed.  Returns (diag, columns).
    v = [[1.0 if i == j else 0.0 for j in range(d)] for i in range(d)]
    if d == 1:
        return [a[0][0]], v
    anorm = max(abs(a[i][j]) for i in range(d) for j in range(d))
    stop = (1e-14 * (1.0 + anorm)) ** 2
    for _ in range(_MAX_SWEEPS):
        off = 0.0
        for i in range(d - 1):
            row = a[i]
            for j in range(i + 1, d):
                off += row[j] * row[j]
        if off <= stop:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                tau = 0.5 * (a[q][q] - a[p][p]) / apq
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                a[p][p] -= t * apq
                a[q][q] += t * apq
                a[p][q] = a[q][p] = 0.0
                for k in range(d):
                    if k != p and k != q:
                        akp, akq = a[k][p], a[k][q]
                        a[k][p] = a[p][k] = c * akp - s * akq
                        a[k][q] = a[q][k] = s * akp + c * akq
                for k in range(d):
                    vkp, vkq = v[k][p], v[k][q]
                    v[k][p] = c * vkp - s * vkq
                    v[k][q] = s * vkp + c * vkq
    return [a[i][i] for i in range(d)], v


def eig_sym(M):
    """Full spectral decomposition of a small symmetric matrix.

    Deterministic for fixed input; eigenvalues come back ascending with the
    matching orthonormal eigenvector columns.
    """
    if isinstance(M, Spectrum):
        return M
    arr = _as_array(M)
    d = arr.shape[0]
    diag, v = _jacobi([list(map(float, row)) for row in arr], d)
    order = sorted(range(d), key=lambda i: diag[i])
    eigenvalues = np.array([diag[i] for i in order])
    eigenvectors = np.array([[v[r][i] for i in order] for r in range(d)])
    return Spectrum(eigenvalues, eigenvectors)


def pucci_plus(M, bounds):
    """hi * (sum of positive eigenvalues) + lo * (sum of negative ones)."""
    lo, hi = _as_pair(bounds)
    e = eig_sym(M).eigenvalues
    pos = neg = 0.0
    for x in e:
        if x > 0.0:
            pos += x
        elif x < 0.0:
            neg += x
    return hi * pos + lo * neg


def pucci_minus(M, bounds):
    """lo * (sum of positive eigenvalues) + hi * (sum of negative ones)."""
    lo, hi = _as_pair(bounds)
    e = eig_sym(M).eigenvalues
    pos = neg = 0.0
    for x in e:
        if x > 0.0:
            pos += x
        elif x < 0.0:
            neg += x
    return lo * pos + hi * neg


def eval_F(x, M, bounds):
    """Half the plus operator with the envelope's bounds frozen at ``x``.

    ``bounds`` supplies the pointwise pair via ``bounds.at(x)`` and raises a
    domain error when ``x`` is outside.
    """
    lo, hi = bounds.at(x)
    return 0.5 * pucci_plus(M, (lo, hi))


def extremal_coefficient(M, bounds):
    """Coefficient matrix attaining the supremum behind the plus operator.

    Diagonalizes along M's eigenframe and pays the upper bound on each
    nonnegative eigendirection, the lower bound on each negative one.
    Zero eigenvalues take the upper bound; the trace against M is
    unaffected either way.
    """
    lo, hi = _as_pair(bounds)
    spec = eig_sym(M)
    coeff = np.where(spec.eigenvalues >= 0.0, hi, lo)
    arr = (spec.eigenvectors * coeff) @ spec.eigenvectors.T
    arr = 0.5 * (arr + arr.T)
    return SymmetricMatrix.from_array(arr)


def optimal_coefficient(x, M, bounds):
    """Pointwise maximizer of the coefficient supremum at ``x``."""
    lo, hi = bounds.at(x)
    return extremal_coefficient(M, (lo, hi))

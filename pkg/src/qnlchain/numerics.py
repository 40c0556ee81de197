"""Dense symmetric linear algebra, root finding, and rate fitting.

Thin, validated wrappers around LAPACK (via scipy) and Brent's method. The
generalized symmetric eigenproblem is reduced with a Cholesky factor of the
metric, so Cholesky failure surfaces as `NotPositiveDefiniteError` before any
eigenwork starts.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from .errors import ArgumentError, BracketError, NotPositiveDefiniteError

__all__ = [
    "as_symmetric",
    "cholesky_spd",
    "solve_spd",
    "eig_smallest",
    "find_root",
    "fit_rate",
]

_SYM_TOL = 1e-12


def as_symmetric(a: np.ndarray, tol: float = _SYM_TOL) -> np.ndarray:
    """Validate near-symmetry (relative to scale) and return (A + A.T)/2."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ArgumentError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max()))
    asym = float(np.abs(a - a.T).max())
    if asym > tol * scale:
        raise ArgumentError(f"matrix asymmetry {asym:.3e} exceeds {tol:.1e} * scale")
    return 0.5 * (a + a.T)


def cholesky_spd(g: np.ndarray):
    """Cholesky factorization of an SPD matrix, as a scipy cho_factor pair."""
    try:
        return sla.cho_factor(as_symmetric(g), lower=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - scipy raises its own
        raise NotPositiveDefiniteError(str(exc)) from exc
    except sla.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc


def solve_spd(g: np.ndarray, b: np.ndarray, factor=None) -> np.ndarray:
    """Solve G x = b for SPD G (optionally reusing a cached factorization)."""
    if factor is None:
        factor = cholesky_spd(g)
    return sla.cho_solve(factor, np.asarray(b, dtype=float))


def eig_smallest(h: np.ndarray, g: np.ndarray | None = None):
    """Smallest eigenpair of H (or of the SPD pencil (H, G) when G is given).

    Returns (lam, v) with v G-normalized; ties return one vector of the
    eigenspace. G must admit a Cholesky factorization.
    """
    h = as_symmetric(h)
    if g is None:
        vals, vecs = sla.eigh(h, subset_by_index=(0, 0))
        return float(vals[0]), vecs[:, 0]
    g = as_symmetric(g)
    cholesky_spd(g)  # reject indefinite metrics up front
    vals, vecs = sla.eigh(h, g, subset_by_index=(0, 0))
    return float(vals[0]), vecs[:, 0]


def find_root(f: Callable[[float], float], a: float, b: float) -> float:
    """Root of a continuous scalar f on a bracketing interval [a, b].

    Endpoints that are exact roots are returned directly; otherwise f(a) and
    f(b) must have opposite signs.
    """
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise BracketError(f"no sign change on [{a}, {b}]: f(a) = {fa:.3e}, f(b) = {fb:.3e}")
    return float(brentq(f, a, b, xtol=1e-15, rtol=8.9e-16, maxiter=200))


def fit_rate(pairs: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log(e) against log(eps) for (eps, e) pairs."""
    if len(pairs) < 3:
        raise ArgumentError(f"need at least 3 pairs to fit a rate, got {len(pairs)}")
    eps = np.array([p[0] for p in pairs], dtype=float)
    err = np.array([p[1] for p in pairs], dtype=float)
    if np.any(eps <= 0.0) or np.any(err <= 0.0):
        raise ArgumentError("rate fitting needs strictly positive data")
    slope, _ = np.polyfit(np.log(eps), np.log(err), 1)
    return float(slope)

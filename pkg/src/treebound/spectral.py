"""Comparison matrices and the contraction-rate bound.

The bound for a depth-``T`` system with reduced parameters
``(alpha_star, beta_star)`` is the spectral radius of the ``T x T`` matrix

    zeta_T = (1 - a - b) * ones e_T^T + b * I_T + a * J_T

(``J_T`` has ones on the sub-diagonal).  Throughout, ``1 - a - b`` is
evaluated as ``1 - (a + b)`` so that it vanishes exactly whenever the
rounded sum reaches 1.  It is computed as the largest real
root of the characteristic polynomial by bisection; power iteration is kept
as an independent cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .params import ParameterError, StarParams

BISECTION_TOL = 1e-12
BISECTION_MAX_ITER = 200
POWER_TOL = 1e-10
POWER_MAX_ITER = 100_000
THRESHOLD_EPS = 1e-12
ROUNDING_FLOOR = 1e-14


class BisectionError(ArithmeticError):
    """The root bracket of the characteristic polynomial is inconsistent."""


class PowerIterationError(ArithmeticError):
    """Power iteration did not settle within its iteration budget."""


@dataclass(frozen=True)
class BoundReport:
    depth: int
    star: StarParams
    rho: float
    method: str
    iterations: int
    residual: float


def _check_depth(T):
    if isinstance(T, bool) or int(T) != T or T < 1:
        raise ParameterError(f"depth T>=1 required, got {T!r}")
    return int(T)


def build_zeta(T: int, sp: StarParams) -> np.ndarray:
    T = _check_depth(T)
    a, b = sp.alpha_star, sp.beta_star
    Z = b * np.eye(T)
    Z[np.arange(1, T), np.arange(T - 1)] = a
    Z[:, T - 1] += 1.0 - (a + b)
    return Z


def build_comparison_matrix(T: int, sp: StarParams) -> np.ndarray:
    """``(T+1) x (T+1)`` matrix bounding one step of the diameter vector."""
    T = _check_depth(T)
    C = np.zeros((T + 1, T + 1))
    C[0, 0] = 1.0
    C[1, 0] = sp.alpha_star
    C[1:, 1:] = build_zeta(T, sp)
    return C


def char_poly_eval(T: int, sp: StarParams, s: float) -> float:
    """Evaluate ``det(s I - zeta_T)``.

    Away from ``s = alpha_star + beta_star`` the geometric closed form

        ((s - 1)(s - b)^T + (1 - a - b) a^T) / (s - a - b)

    is used; it keeps full relative accuracy near ``s = 1`` where the
    polynomial is of size ``a^T``.  Close to the removable singularity the
    first-column expansion recursion takes over.
    """
    T = _check_depth(T)
    return kernels.charpoly_eval(T, float(sp.alpha_star), float(sp.beta_star),
                                 float(s))


def char_poly_recursive(T: int, sp: StarParams, s: float) -> float:
    """``chi_T`` by the recursion ``chi_T = (s-b) chi_{T-1} - a^{T-1}(1-a-b)``."""
    T = _check_depth(T)
    return kernels.charpoly_recursive(T, float(sp.alpha_star),
                                      float(sp.beta_star), float(s))


def rho_bound(T: int, sp: StarParams, tol: float = BISECTION_TOL,
              max_iter: int = BISECTION_MAX_ITER) -> BoundReport:
    """Spectral radius of ``zeta_T``, the contraction-rate bound.

    The root is bracketed in ``[max(1 - a, b), 1]``: the polynomial is
    non-positive at the lower end and equals ``a^T`` at 1.  Signs are taken
    from a rescaled polynomial, so depths in the tens of thousands work
    even though ``chi`` itself underflows there.  The bracket is
    refined until its width is below ``tol * min(1, 1 - lo)`` so that the
    spectral gap ``1 - rho`` keeps relative accuracy when it is tiny.
    """
    T = _check_depth(T)
    a, b = float(sp.alpha_star), float(sp.beta_star)
    if a == 0.0:
        return BoundReport(T, sp, 1.0, "analytic", 0, 0.0)
    if a + b >= 1.0:
        # chi_T(s) = (s - b)^T, a single root of multiplicity T
        return BoundReport(T, sp, b, "analytic", 0, 0.0)
    if T == 1:
        return BoundReport(T, sp, 1.0 - a, "analytic", 0, 0.0)
    lo = max(1.0 - a, b)
    hi = 1.0
    # chi(1) = a^T > 0 needs no evaluation; the scaled form keeps the sign
    # at lo meaningful when chi itself underflows (large T)
    f_lo = kernels.charpoly_scaled(T, a, b, lo)
    if 0.0 <= f_lo <= ROUNDING_FLOOR:
        # root sits on the lower bracket end up to rounding
        return BoundReport(T, sp, lo, "charpoly-bisection", 0,
                           abs(kernels.charpoly_eval(T, a, b, lo)))
    if not f_lo < 0.0:
        raise BisectionError(
            f"no sign change on [{lo!r}, {hi!r}] for T={T}, alpha_star={a!r}, "
            f"beta_star={b!r}: scaled chi(lo)={f_lo!r}")
    lo, hi, it = kernels.bisect_root(T, a, b, lo, hi, tol, max_iter)
    if hi - lo > tol:
        raise BisectionError(
            f"bracket [{lo!r}, {hi!r}] still wider than {tol!r} after {it} "
            f"iterations (T={T}, alpha_star={a!r}, beta_star={b!r})")
    rho = 0.5 * (lo + hi)
    if rho >= 1.0:
        rho = lo
    residual = abs(kernels.charpoly_eval(T, a, b, rho))
    return BoundReport(T, sp, rho, "charpoly-bisection", it, residual)


def spectral_radius_power(M, tol: float = POWER_TOL,
                          max_iter: int = POWER_MAX_ITER) -> float:
    """Perron root of a nonnegative square matrix by power iteration.

    Starts from the all-ones vector.  A vanishing iterate (nilpotent
    matrix) returns 0.  Raises :class:`PowerIterationError` when the
    estimate has not settled after ``max_iter`` steps, which is the
    expected outcome for defective or periodic spectra.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"square matrix required, got shape {M.shape}")
    if not np.all(np.isfinite(M)) or np.any(M < 0.0):
        raise ValueError("entrywise nonnegative finite matrix required")
    lam, it, converged, residual = kernels.power_iteration(M, tol, max_iter)
    if not converged:
        raise PowerIterationError(
            f"no convergence after {it} iterations "
            f"(last estimate {lam!r}, residual {residual!r})")
    return lam


def classical_bound(T: int, a: float) -> float:
    """``(1 - a^T)^(1/T)``, the bound from a uniform entry floor ``a``."""
    T = _check_depth(T)
    if not (0.0 <= a <= 1.0):
        raise ParameterError(f"0<=a<=1 violated: a={a!r}")
    return (1.0 - a ** T) ** (1.0 / T)


def classical_gap(T: int, a: float) -> float:
    """``1 - classical_bound(T, a)`` without cancellation for small ``a``."""
    T = _check_depth(T)
    if not (0.0 <= a <= 1.0):
        raise ParameterError(f"0<=a<=1 violated: a={a!r}")
    if a == 1.0:
        return 1.0
    return -math.expm1(math.log1p(-(a ** T)) / T)


def spectral_gap_ratio(T: int, sp: StarParams, a_classical: float) -> float:
    gap = classical_gap(T, a_classical)
    if gap == 0.0:
        raise ZeroDivisionError(
            f"classical bound equals 1 for T={T}, a={a_classical!r}")
    return (1.0 - rho_bound(T, sp).rho) / gap


def rho_threshold_depth(sp: StarParams):
    """Largest depth with ``rho_T <= alpha_star + beta_star``.

    Returns ``math.inf`` when ``alpha_star + beta_star = 1``.
    """
    c = 1.0 - (sp.alpha_star + sp.beta_star)
    if c <= 0.0:
        return math.inf
    return math.floor(sp.alpha_star / c + THRESHOLD_EPS)


def rho_asymptotic(T: int, sp: StarParams) -> float:
    """Leading large-``T`` expansion ``1 - (1-a-b) (a/(1-b))^T``."""
    T = _check_depth(T)
    a, b = sp.alpha_star, sp.beta_star
    if a <= 0.0 or b >= 1.0 or a + b >= 1.0:
        raise ParameterError(
            "rho_asymptotic needs alpha_star>0 and alpha_star+beta_star<1, "
            f"got ({a!r}, {b!r})")
    return 1.0 - (1.0 - (a + b)) * (a / (1.0 - b)) ** T

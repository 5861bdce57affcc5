"""Parameter domain for tree-structured consensus systems.

A :class:`TreeParams` triple holds the lower bounds (alpha, beta, gamma) on
the root self-weight, the same-layer weight and the upstream weight of a
time-varying stochastic matrix.  :func:`star_params` reduces it to the pair
(alpha_star, beta_star) that parameterises the comparison system.
"""
from __future__ import annotations

from dataclasses import dataclass


class ParameterError(ValueError):
    """Raised when a parameter set leaves its admissible domain."""


@dataclass(frozen=True)
class TreeParams:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        validate_tree_params(self)


@dataclass(frozen=True)
class StarParams:
    alpha_star: float
    beta_star: float

    def __post_init__(self):
        a, b = self.alpha_star, self.beta_star
        if not (a >= 0.0):
            raise ParameterError(f"alpha_star >= 0 violated: alpha_star={a!r}")
        if not (b >= 0.0):
            raise ParameterError(f"beta_star >= 0 violated: beta_star={b!r}")
        if not (a + b <= 1.0):
            raise ParameterError(
                f"alpha_star+beta_star <= 1 violated: {a!r}+{b!r}={a + b!r}")

    @property
    def slack(self) -> float:
        """Weight ``1 - alpha_star - beta_star`` carried by the last column."""
        return 1.0 - self.alpha_star - self.beta_star


def validate_tree_params(p) -> None:
    """Check ``0 <= alpha <= 1``, ``beta, gamma >= 0`` and ``beta + gamma <= 1``.

    Raises :class:`ParameterError` naming the first violated inequality.  NaN
    fails every comparison and is therefore rejected as well.
    """
    a, b, g = p.alpha, p.beta, p.gamma
    if not (a >= 0.0):
        raise ParameterError(f"alpha>=0 violated: alpha={a!r}")
    if not (a <= 1.0):
        raise ParameterError(f"alpha<=1 violated: alpha={a!r}")
    if not (b >= 0.0):
        raise ParameterError(f"beta>=0 violated: beta={b!r}")
    if not (g >= 0.0):
        raise ParameterError(f"gamma>=0 violated: gamma={g!r}")
    if not (b + g <= 1.0):
        raise ParameterError(f"beta+gamma>1: beta+gamma={b + g!r}")


def star_params(p: TreeParams) -> StarParams:
    """Reduced pair ``(min(alpha, gamma), min(beta + gamma, alpha) - alpha_star)``."""
    a_star = min(p.alpha, p.gamma)
    # min(beta + gamma, alpha) - a_star without cancellation; the branch
    # uses the rounded sum, like the domain check does
    if p.gamma > p.alpha:
        b_star = 0.0
    elif p.beta + p.gamma <= p.alpha:
        b_star = p.beta
    else:
        b_star = p.alpha - p.gamma
    return StarParams(a_star, b_star)


def star_params_lambda(p: TreeParams, lam: float) -> StarParams:
    """Convex family of admissible reductions, indexed by ``lam`` in [0, 1].

    ``lam = 1`` is :func:`star_params`; ``lam = 0`` is the alternative
    reduction that favours the diagonal weight.  Every member has the same
    sum ``min(beta + gamma, alpha)`` and yields a valid comparison system,
    but ``lam = 1`` gives the smallest spectral radius.
    """
    if not (0.0 <= lam <= 1.0):
        raise ParameterError(f"0<=lam<=1 violated: lam={lam!r}")
    if lam == 1.0:
        return star_params(p)
    a, b, g = p.alpha, p.beta, p.gamma
    a_star = lam * min(a, g) + (1.0 - lam) * min(g, max(a - b, 0.0))
    b_star = lam * min(b, max(a - g, 0.0)) + (1.0 - lam) * min(a, b)
    # rounding can push the sum one ulp above 1
    if a_star + b_star > 1.0:
        b_star = 1.0 - a_star
    return StarParams(a_star, b_star)

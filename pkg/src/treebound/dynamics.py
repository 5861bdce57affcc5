"""Simulation of consensus dynamics ``x(t+1) = A(t) x(t)``.

Random system matrices are drawn from a SplitMix64 stream so that a seed
fixes the whole trajectory, whichever kernel backend is active.  The
generation scheme, row by row in agent order:

* root row: self-weight ``alpha`` (slack mode: ``alpha + u (1 - alpha)``);
* other rows at level ``k``: ``gamma`` on a uniformly drawn member of
  ``N_{k-1}`` and ``beta`` on the agent itself.  In slack mode both masses
  are first raised by uniform shares of the free room ``1 - beta - gamma``,
  the upstream mass is split between two drawn members of ``N_{k-1}`` and
  the same-level mass between the agent and a drawn peer of its level;
* any remaining row mass is split, with uniform weights, over
  ``1 + randint(min(n, 4))`` uniformly drawn columns.

``u`` is ``(next >> 11) * 2**-53`` and ``randint(m)`` is ``floor(u * m)``.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._backend import kernels
from ._pykernels import splitmix64
from .params import TreeParams
from .topology import NestedSets

UNDERFLOW = 1e-300
COMPARISON_TOL = 1e-10
MODES = ("tight", "slack")
INITIALS = ("random-uniform", "worst-case-split")
EXTREMAL_KINDS = ("cycle", "identity", "leader-chain")


class FiniteTimeConsensus(ArithmeticError):
    """The diameter vanished before the rate window started."""


@dataclass(frozen=True)
class SimulationConfig:
    nested: NestedSets
    params: TreeParams
    horizon: int
    seed: int = 0
    mode: str = "tight"
    initial: str | Sequence[float] = "worst-case-split"

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError(f"horizon must be a positive integer, got {self.horizon!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if isinstance(self.initial, str):
            if self.initial not in INITIALS:
                raise ValueError(f"initial must be one of {INITIALS} or a vector")
        else:
            x0 = tuple(float(v) for v in self.initial)
            if len(x0) != self.nested.n:
                raise ValueError(
                    f"initial vector has {len(x0)} entries, expected {self.nested.n}")
            object.__setattr__(self, "initial", x0)


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray
    """``(horizon + 1, n)`` raw agent states."""
    diameters: np.ndarray
    """``(horizon + 1, T_d + 1)``; column ``k`` is the diameter of ``N_k``."""

    @property
    def horizon(self) -> int:
        return self.states.shape[0] - 1


def _stream_state(seed: int) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def random_system_matrix(ns: NestedSets, p: TreeParams, rng_state: int,
                         mode: str = "tight"):
    """Draw one compliant stochastic matrix.

    Returns ``(A, new_state)``; feed ``new_state`` back in for the next draw.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    depth, order, starts = ns.index_arrays()
    A = np.zeros((ns.n, ns.n))
    state = kernels.fill_system_matrix(A, depth, order, starts, p.alpha, p.beta,
                                       p.gamma, mode == "slack",
                                       _stream_state(rng_state))
    return A, state


def step(A, x) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or x.shape != (A.shape[1],):
        raise ValueError(f"dimension mismatch: A {A.shape}, x {x.shape}")
    return A @ x


def diameter_vector(x, ns: NestedSets) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    _, order, starts = ns.index_arrays()
    out = np.empty(ns.depth + 1)
    for k in range(ns.depth + 1):
        vals = x[order[:starts[k + 1]]]
        out[k] = vals.max() - vals.min()
    return out


def initial_state(cfg: SimulationConfig) -> np.ndarray:
    n = cfg.nested.n
    if not isinstance(cfg.initial, str):
        return np.array(cfg.initial, dtype=np.float64)
    if cfg.initial == "worst-case-split":
        x0 = np.ones(n)
        x0[cfg.nested.root - 1] = 0.0
        return x0
    # drawn from a stream decorrelated from the matrix stream
    state = _stream_state(cfg.seed ^ 0xD1B54A32D192ED03)
    x0 = np.empty(n)
    for i in range(n):
        state, z = splitmix64(state)
        x0[i] = (z >> 11) * 2.0 ** -53
    return x0


def run_simulation(cfg: SimulationConfig) -> Trajectory:
    """Simulate ``cfg.horizon`` steps with a fresh random matrix per step.

    Identical configurations give bit-identical trajectories.  The diameter
    record is computed on a renormalised copy of the state, so it stays
    accurate after the raw states have hit their rounding floor.
    """
    depth, order, starts = cfg.nested.index_arrays()
    p = cfg.params
    states, diams, _ = kernels.simulate(
        depth, order, starts, p.alpha, p.beta, p.gamma, cfg.mode == "slack",
        _stream_state(cfg.seed), initial_state(cfg), int(cfg.horizon))
    return Trajectory(states, diams)


def run_stationary(A, x0, ns: NestedSets, horizon: int) -> Trajectory:
    """Iterate a fixed matrix, tracking diameters like :func:`run_simulation`."""
    A = np.asarray(A, dtype=np.float64)
    x = np.array(x0, dtype=np.float64)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    states = np.empty((horizon + 1, x.size))
    diams = np.empty((horizon + 1, ns.depth + 1))
    states[0] = x
    diams[0] = diameter_vector(x, ns)
    scale = diams[0, -1]
    y = (x - x.min()) / scale if scale > 0 else np.zeros_like(x)
    for t in range(horizon):
        x = A @ x
        states[t + 1] = x
        if scale > 0:
            z = A @ y
            dz = diameter_vector(z, ns)
            diams[t + 1] = scale * dz
            if dz[-1] > 0:
                y = (z - z.min()) / dz[-1]
                scale *= dz[-1]
            else:
                scale = 0.0
        else:
            diams[t + 1] = 0.0
    return Trajectory(states, diams)


def empirical_rate(traj: Trajectory, burn_in: int | None = None,
                   log_time_term: bool = True) -> float:
    """Asymptotic per-step contraction factor of the full diameter.

    Fits ``ln D(t) = c0 + t ln(rate) + c1 ln(t)`` by least squares over
    ``t`` in ``[burn_in, horizon]``, where ``D`` is the last diameter
    component.  The ``ln t`` column absorbs the polynomial prefactor that
    defective (Jordan-block) dynamics put in front of the geometric decay;
    pass ``log_time_term=False`` for a plain log-linear fit.

    Returns 1.0 for a constant diameter and 0.0 when the diameter drops
    below ``UNDERFLOW`` before the window holds two usable points.
    """
    D = np.asarray(traj.diameters)[:, -1]
    horizon = D.size - 1
    if burn_in is None:
        burn_in = horizon // 10
    if not D[0] > 0.0:
        raise ValueError("initial diameter must be positive")
    if horizon <= burn_in + 10:
        raise ValueError(
            f"horizon {horizon} too short for burn_in {burn_in}; need > burn_in + 10")
    window = D[burn_in:]
    if np.all(window == window[0]) and window[0] > UNDERFLOW:
        return 1.0
    t = np.arange(burn_in, horizon + 1, dtype=np.float64)
    usable = window > UNDERFLOW
    if not usable.all():
        # finite-time consensus: keep the prefix before the collapse
        cut = int(np.argmin(usable))
        t, window = t[:cut], window[:cut]
    if window.size < (4 if log_time_term else 2):
        return 0.0
    cols = [np.ones_like(t), t]
    if log_time_term:
        cols.append(np.log(np.maximum(t, 1.0)))
    X = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(X, np.log(window), rcond=None)
    return float(math.exp(coef[1]))


def verify_comparison_step(delta_prev, delta_next, C,
                           tol: float = COMPARISON_TOL) -> bool:
    """``delta_next <= C @ delta_prev`` componentwise, up to slack.

    The slack is ``tol`` times the largest entry of ``delta_prev`` (or
    ``tol`` itself when that entry is at least 1), keeping the check
    meaningful for diameters far below unit scale.
    """
    dp = np.asarray(delta_prev, dtype=np.float64)
    dn = np.asarray(delta_next, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    if dp.shape != dn.shape or C.shape != (dp.size, dp.size):
        raise ValueError("inconsistent dimensions")
    slack = tol * min(1.0, float(np.max(dp, initial=0.0)))
    return bool(np.all(dn <= C @ dp + slack))


def verify_trajectory(traj: Trajectory, C, tol: float = COMPARISON_TOL):
    """Indices ``t`` at which the step ``t -> t+1`` breaks the comparison."""
    D = traj.diameters
    return [t for t in range(D.shape[0] - 1)
            if not verify_comparison_step(D[t], D[t + 1], C, tol)]


def extremal_system(kind: str, n: int, beta: float = 0.5) -> np.ndarray:
    """Stationary matrices on which the bound is attained.

    ``cycle`` is ``J_n + e_1 e_n^T``, ``identity`` is ``I_n`` and
    ``leader-chain`` is ``beta I_n + (1 - beta)(J_n + e_1 e_1^T)``.
    """
    if n < 2:
        raise ValueError("n >= 2 required")
    if kind not in EXTREMAL_KINDS:
        raise ValueError(f"kind must be one of {EXTREMAL_KINDS}, got {kind!r}")
    J = np.eye(n, k=-1)
    if kind == "identity":
        return np.eye(n)
    if kind == "cycle":
        A = J.copy()
        A[0, n - 1] = 1.0
        return A
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta!r}")
    E = J.copy()
    E[0, 0] = 1.0
    return beta * np.eye(n) + (1.0 - beta) * E


def running_rate(traj: Trajectory) -> np.ndarray:
    """``(D(t) / D(0))^(1/t)`` per step; NaN at ``t = 0``."""
    D = traj.diameters[:, -1]
    out = np.full(D.size, math.nan)
    if D[0] > 0:
        t = np.arange(1, D.size)
        with np.errstate(divide="ignore"):
            out[1:] = np.exp(np.log(D[1:] / D[0]) / t)
    return out


def write_trajectory_csv(path: str | os.PathLike, traj: Trajectory) -> None:
    """Write ``t,delta_1..delta_{T+1},rate_estimate`` with 17 significant digits."""
    D = traj.diameters
    rates = running_rate(traj)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"delta_{k + 1}" for k in range(D.shape[1])]
                   + ["rate_estimate"])
        for t in range(D.shape[0]):
            w.writerow([t] + [f"{v:.17g}" for v in D[t]] + [f"{rates[t]:.17g}"])


def read_trajectory_csv(path: str | os.PathLike):
    """Return ``(diameters, rate_estimates)`` from a trajectory CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    body = rows[1:]
    D = np.array([[float(v) for v in r[1:-1]] for r in body])
    rates = np.array([float(r[-1]) for r in body])
    return D, rates

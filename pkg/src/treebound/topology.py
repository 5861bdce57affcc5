"""Tree matrices, depth profiles and nested agent sets.

Agents are numbered ``1..n`` in the public API with agent 1 as the root;
arrays indexed by agent use position ``i - 1``.  A :class:`TreeShape` lists
the father of every non-root agent, and a sequence of tree matrices is
represented by the finite set of shapes that recur in it.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .params import TreeParams

STOCHASTIC_TOL = 1e-12
SLACK_TOL = 1e-12


class ShapeFormatError(ValueError):
    """Malformed shapes file or shape specification."""


class NotStochasticError(ValueError):
    """Matrix is not row-stochastic within tolerance."""


@dataclass(frozen=True)
class TreeShape:
    """Father map of a spanning tree rooted at agent 1.

    ``fathers[i - 2]`` is the father of agent ``i`` for ``i = 2..n`` and
    must be smaller than ``i``.
    """

    fathers: tuple[int, ...]

    def __post_init__(self):
        fathers = tuple(int(f) for f in self.fathers)
        object.__setattr__(self, "fathers", fathers)
        for i, f in enumerate(fathers, start=2):
            if not 1 <= f < i:
                raise ShapeFormatError(
                    f"father of agent {i} must lie in 1..{i - 1}, got {f}")

    @property
    def n(self) -> int:
        return len(self.fathers) + 1

    def father(self, i: int) -> int:
        return self.fathers[i - 2]

    @classmethod
    def chain(cls, n: int) -> "TreeShape":
        return cls(tuple(range(1, n)))

    @classmethod
    def star(cls, n: int) -> "TreeShape":
        return cls((1,) * (n - 1))


@dataclass(frozen=True)
class TreeMatrix:
    shape: TreeShape
    params: TreeParams


@dataclass(frozen=True)
class DepthProfile:
    depths: tuple[int, ...]

    def __post_init__(self):
        depths = tuple(int(r) for r in self.depths)
        object.__setattr__(self, "depths", depths)
        if not depths or depths[0] != 0:
            raise ValueError("root depth r_1 must be 0")
        for i, r in enumerate(depths[1:], start=2):
            if not 1 <= r <= i - 1:
                raise ValueError(f"depth of agent {i} must lie in 1..{i - 1}, got {r}")

    @property
    def n(self) -> int:
        return len(self.depths)

    @property
    def depth(self) -> int:
        return max(self.depths)


@dataclass(frozen=True)
class NestedSets:
    """Nested agent sets ``N_0 ⊂ N_1 ⊂ ... ⊂ N_T`` (1-based agent ids)."""

    members: tuple[frozenset, ...]
    _depth_of: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        members = tuple(frozenset(int(i) for i in m) for m in self.members)
        object.__setattr__(self, "members", members)
        if not members or len(members[0]) != 1:
            raise ValueError("N_0 must be a singleton")
        for k in range(1, len(members)):
            if not members[k - 1] < members[k]:
                raise ValueError(f"N_{k - 1} must be a strict subset of N_{k}")
        n = len(members[-1])
        if members[-1] != frozenset(range(1, n + 1)):
            raise ValueError("last nested set must be {1..n}")
        depth_of = [0] * n
        for k in range(len(members) - 1, -1, -1):
            for i in members[k]:
                depth_of[i - 1] = k
        object.__setattr__(self, "_depth_of", tuple(depth_of))

    @property
    def depth(self) -> int:
        return len(self.members) - 1

    @property
    def n(self) -> int:
        return len(self.members[-1])

    @property
    def root(self) -> int:
        return next(iter(self.members[0]))

    def layer(self, k: int) -> frozenset:
        """Agents entering at level ``k``: ``N_k \\ N_{k-1}``."""
        if k == 0:
            return self.members[0]
        return self.members[k] - self.members[k - 1]

    def depth_of(self, i: int) -> int:
        return self._depth_of[i - 1]

    def index_arrays(self):
        """0-based ``(depth, order, layer_start)`` arrays used by the kernels.

        ``order`` lists agents sorted by level, so ``N_k`` is the prefix
        ``order[:layer_start[k + 1]]``.
        """
        depth = np.array(self._depth_of, dtype=np.int_)
        order = np.array(
            [i - 1 for k in range(self.depth + 1) for i in sorted(self.layer(k))],
            dtype=np.int_)
        starts = np.array([0] + [len(m) for m in self.members], dtype=np.int_)
        return depth, order, starts


def materialize_tree_matrix(t: TreeMatrix) -> np.ndarray:
    n = t.shape.n
    p = t.params
    M = np.zeros((n, n))
    M[0, 0] = p.alpha
    for i in range(2, n + 1):
        M[i - 1, i - 1] = p.beta
        M[i - 1, t.shape.father(i) - 1] = p.gamma
    return M


def stochastic_completion(M: np.ndarray) -> np.ndarray:
    """Put each row's missing mass ``1 - sum`` on the diagonal."""
    A = np.array(M, dtype=np.float64)
    A[np.diag_indices_from(A)] += 1.0 - A.sum(axis=1)
    return A


def shape_depth(shape: TreeShape) -> int:
    """Longest root-to-leaf path length, by breadth-first traversal."""
    children: dict[int, list[int]] = {}
    for i in range(2, shape.n + 1):
        children.setdefault(shape.father(i), []).append(i)
    level, frontier = 0, [1]
    while True:
        nxt = [c for v in frontier for c in children.get(v, ())]
        if not nxt:
            return level
        level += 1
        frontier = nxt


def sequence_depths(shapes: Sequence[TreeShape]) -> DepthProfile:
    """Depths ``r_i`` of a recurring family of tree shapes.

    ``r_1 = 0`` and ``r_i = 1 + max(r_f)`` over the fathers ``f`` that agent
    ``i`` takes in any of the shapes.
    """
    shapes = list(shapes)
    if not shapes:
        raise ValueError("at least one shape is required")
    n = shapes[0].n
    if any(s.n != n for s in shapes):
        raise ValueError("all shapes must have the same number of agents")
    r = [0] * n
    for i in range(2, n + 1):
        r[i - 1] = 1 + max(r[s.father(i) - 1] for s in shapes)
    return DepthProfile(tuple(r))


def nested_sets(dp: DepthProfile) -> NestedSets:
    members = tuple(
        frozenset(i for i, r in enumerate(dp.depths, start=1) if r <= k)
        for k in range(dp.depth + 1))
    return NestedSets(members)


def nested_sets_from_depths(depths: Iterable[int]) -> NestedSets:
    """Nested sets for an arbitrary level assignment with root at level 0.

    Unlike :class:`DepthProfile`, levels need not be bounded by the agent
    index; every level between 0 and the maximum must be occupied.
    """
    depths = [int(r) for r in depths]
    if depths.count(0) != 1:
        raise ValueError("exactly one agent must sit at level 0")
    T = max(depths)
    if set(depths) != set(range(T + 1)):
        raise ValueError("levels must cover 0..max without gaps")
    return NestedSets(tuple(
        frozenset(i for i, r in enumerate(depths, start=1) if r <= k)
        for k in range(T + 1)))


@dataclass(frozen=True)
class AssumptionReport:
    violations: tuple[tuple[int, str, float], ...]
    """Each entry is ``(row, inequality, shortfall)`` with 1-based row."""

    @property
    def ok(self) -> bool:
        return not self.violations


def check_assumption(A, ns: NestedSets, p: TreeParams,
                     slack: float = SLACK_TOL) -> AssumptionReport:
    """Verify the three lower-bound families against a stochastic matrix.

    ``1a``: root self-weight at least alpha; ``1b``: mass on the agent's own
    level at least beta; ``1c``: mass on strictly lower levels at least
    gamma.  An inequality fails only when it is violated by more than
    ``slack``.
    """
    A = np.asarray(A, dtype=np.float64)
    n = ns.n
    if A.shape != (n, n):
        raise ValueError(f"matrix shape {A.shape} does not match {n} agents")
    if np.any(A < 0.0) or not np.all(np.isfinite(A)):
        raise NotStochasticError("entries must be finite and nonnegative")
    row_err = np.abs(A.sum(axis=1) - 1.0)
    if row_err.max() > STOCHASTIC_TOL:
        bad = int(row_err.argmax()) + 1
        raise NotStochasticError(
            f"row {bad} sums to {A[bad - 1].sum()!r}, not 1")
    depth, order, starts = ns.index_arrays()
    violations = []
    for i in range(1, n + 1):
        k = ns.depth_of(i)
        row = A[i - 1]
        if k == 0:
            short = p.alpha - row[i - 1]
            if short > slack:
                violations.append((i, "1a", float(short)))
            continue
        same = row[order[starts[k]:starts[k + 1]]].sum()
        lower = row[order[:starts[k]]].sum()
        if p.beta - same > slack:
            violations.append((i, "1b", float(p.beta - same)))
        if p.gamma - lower > slack:
            violations.append((i, "1c", float(p.gamma - lower)))
    return AssumptionReport(tuple(violations))


def parse_shapes(text: str) -> list[TreeShape]:
    """Parse the shapes text format.

    One shape per non-empty line: the space-separated fathers of agents
    ``2..n``.  Lines starting with ``#`` are comments.  A single-agent shape
    is written as ``-``.
    """
    shapes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "-":
            shapes.append(TreeShape(()))
            continue
        try:
            fathers = tuple(int(tok) for tok in line.split())
        except ValueError as exc:
            raise ShapeFormatError(f"line {lineno}: {exc}") from None
        try:
            shapes.append(TreeShape(fathers))
        except ShapeFormatError as exc:
            raise ShapeFormatError(f"line {lineno}: {exc}") from None
    if not shapes:
        raise ShapeFormatError("no shapes found")
    n = shapes[0].n
    if any(s.n != n for s in shapes):
        raise ShapeFormatError("all shapes must have the same number of agents")
    return shapes


def format_shapes(shapes: Iterable[TreeShape]) -> str:
    lines = [" ".join(map(str, s.fathers)) if s.fathers else "-" for s in shapes]
    return "\n".join(lines) + "\n"


def read_shapes(path: str | os.PathLike) -> list[TreeShape]:
    with open(path, encoding="utf-8") as fh:
        return parse_shapes(fh.read())


def write_shapes(path: str | os.PathLike, shapes: Iterable[TreeShape]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_shapes(shapes))

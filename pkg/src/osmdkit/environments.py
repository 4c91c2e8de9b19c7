"""Problem instances: action sets, signal functions and loss generators."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .graphs import GraphSpec


@dataclass(frozen=True)
class KArmedBandit:
    k: int

    @property
    def dim(self) -> int:
        return self.k

    def signal(self, a: int, loss) -> float:
        loss = _check_unit_loss(loss, self.k)
        return float(loss[a])


@dataclass(frozen=True)
class GraphBandit:
    graph: GraphSpec

    @property
    def dim(self) -> int:
        return self.graph.k

    def signal(self, a: int, loss) -> dict:
        loss = _check_unit_loss(loss, self.graph.k)
        return {j: float(loss[j]) for j in self.graph.observes[a]}


@dataclass(frozen=True)
class LpFullInfo:
    p: float
    d: int

    @property
    def dim(self) -> int:
        return self.d

    @property
    def q(self) -> float:
        return np.inf if self.p == 1.0 else self.p / (self.p - 1.0)

    def signal(self, a, loss) -> np.ndarray:
        loss = np.asarray(loss, dtype=float)
        if loss.shape != (self.d,):
            raise ValueError("loss dimension mismatch")
        return loss.copy()


def _check_unit_loss(loss, k: int) -> np.ndarray:
    loss = np.asarray(loss, dtype=float)
    if loss.shape != (k,):
        raise ValueError("loss dimension mismatch")
    if np.any(loss < 0.0) or np.any(loss > 1.0):
        raise ValueError("losses must lie in [0, 1]")
    return loss


# ---------------------------------------------------------------------------
# loss sources


@dataclass(frozen=True)
class FixedSequence:
    rows: tuple  # of loss tuples

    def draw(self, t: int, rng) -> np.ndarray:
        if t > len(self.rows):
            raise IndexError(f"fixed sequence exhausted at round {t}")
        return np.asarray(self.rows[t - 1], dtype=float)

    def matrix(self, n: int, rng) -> np.ndarray:
        if n > len(self.rows):
            raise IndexError("fixed sequence shorter than the horizon")
        return np.asarray(self.rows[:n], dtype=float)


@dataclass(frozen=True)
class Bernoulli:
    means: tuple

    def draw(self, t: int, rng) -> np.ndarray:
        return (rng.random(len(self.means)) < np.asarray(self.means)).astype(float)

    def matrix(self, n: int, rng) -> np.ndarray:
        m = np.asarray(self.means, dtype=float)
        return (rng.random((n, len(m))) < m).astype(float)


@dataclass(frozen=True)
class Rademacher:
    """Coordinatewise +-d^(-1/q) signs; every draw lies in the q-ball."""

    d: int
    q: float

    @property
    def scale(self) -> float:
        return 1.0 if np.isinf(self.q) else self.d ** (-1.0 / self.q)

    def draw(self, t: int, rng) -> np.ndarray:
        return self.scale * np.where(rng.random(self.d) < 0.5, -1.0, 1.0)

    def matrix(self, n: int, rng) -> np.ndarray:
        return self.scale * np.where(rng.random((n, self.d)) < 0.5, -1.0, 1.0)


def load_fixed_csv(path) -> FixedSequence:
    """One row per round, one column per arm; a non-numeric first row is
    treated as a header."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                rows.append(tuple(float(v) for v in row))
            except ValueError:
                if rows:
                    raise
    return FixedSequence(rows=tuple(rows))


# ---------------------------------------------------------------------------
# regret


def dual_norm(v: np.ndarray, q: float) -> float:
    v = np.asarray(v, dtype=float)
    if np.isinf(q):
        return float(np.max(np.abs(v)))
    return float(np.sum(np.abs(v) ** q) ** (1.0 / q))


def best_comparator_loss(instance, total_loss: np.ndarray) -> float:
    """min over the action set of the inner product with the summed losses."""
    total_loss = np.asarray(total_loss, dtype=float)
    if isinstance(instance, LpFullInfo):
        return -dual_norm(total_loss, instance.q)
    return float(np.min(total_loss))


def realized_regret(instance, actions, losses) -> float:
    """Played cumulative loss minus the best fixed action in hindsight.

    `actions` holds arm indices for simplex instances and points of the ball
    for LpFullInfo.
    """
    if len(actions) != len(losses):
        raise ValueError("actions and losses must have equal length")
    losses = np.asarray(losses, dtype=float)
    if isinstance(instance, LpFullInfo):
        played = float(
            sum(np.dot(np.asarray(a, dtype=float), l) for a, l in zip(actions, losses))
        )
    else:
        played = float(sum(l[a] for a, l in zip(actions, losses)))
    return played - best_comparator_loss(instance, losses.sum(axis=0))

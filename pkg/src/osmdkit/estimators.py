"""Loss estimators: importance weighting, its shifted variant, the graph
hybrid, and the full-information identity.  All are unbiased under the
sampling scheme P_x(e_i) = x_i, which `check_unbiased` verifies by exact
enumeration.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import GraphSpec


class SignalMismatch(ValueError):
    """Observation does not match what the estimator expects."""


@dataclass(frozen=True)
class ImportanceWeighted:
    k: int

    def estimate(self, x, a: int, signal: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        est = np.zeros(self.k)
        est[a] = float(signal) / x[a]
        return est

    def estimate_batch(self, x: np.ndarray, a: np.ndarray, signal: np.ndarray) -> np.ndarray:
        """Row-wise estimates for a batch of (iterate, action, observation)."""
        est = np.zeros_like(x)
        rows = np.arange(x.shape[0])
        est[rows, a] = signal / x[rows, a]
        return est


@dataclass(frozen=True)
class ShiftedImportanceWeighted:
    """Importance weighting of losses recentred by c_i = 1/2 whenever the
    played probability is at least eta^2 (c_i = 0 below that threshold)."""

    k: int
    eta: float

    def shifts(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 0.5 * (x >= self.eta**2)

    def estimate(self, x, a: int, signal: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        c = self.shifts(x)
        est = c.copy()
        est[a] = (float(signal) - c[a]) / x[a] + c[a]
        return est

    def estimate_batch(self, x: np.ndarray, a: np.ndarray, signal: np.ndarray) -> np.ndarray:
        est = self.shifts(x)
        rows = np.arange(x.shape[0])
        est[rows, a] = (signal - est[rows, a]) / x[rows, a] + est[rows, a]
        return est


@dataclass(frozen=True)
class GraphHybrid:
    """Neighbourhood importance weighting, with the complementary estimator
    on the (at most one) unrevealed coordinate carrying more than half the
    probability mass."""

    graph: GraphSpec

    def hidden_heavy(self, x) -> int | None:
        """Coordinate without a self-loop holding mass > 1/2, if any."""
        x = np.asarray(x, dtype=float)
        for i in range(self.graph.k):
            if not self.graph.has_self_loop(i) and x[i] > 0.5:
                return i
        return None

    def estimate(self, x, a: int, signal: dict) -> np.ndarray:
        g = self.graph
        x = np.asarray(x, dtype=float)
        heavy = self.hidden_heavy(x)
        est = np.zeros(g.k)
        for i in range(g.k):
            if i == heavy:
                if a != i:
                    if i not in signal:
                        raise SignalMismatch(f"loss of arm {i} not observed")
                    est[i] = (signal[i] - 1.0) / (1.0 - x[i]) + 1.0
                else:
                    est[i] = 1.0
            elif a in g.revealers[i]:
                if i not in signal:
                    raise SignalMismatch(f"loss of arm {i} not observed")
                est[i] = signal[i] / sum(x[b] for b in g.revealers[i])
        return est


@dataclass(frozen=True)
class FullInformation:
    d: int

    def estimate(self, x, a, signal) -> np.ndarray:
        return np.asarray(signal, dtype=float).copy()


def signal_for(spec, a: int, loss: np.ndarray):
    """The observation the matching problem instance would produce."""
    loss = np.asarray(loss, dtype=float)
    if isinstance(spec, (ImportanceWeighted, ShiftedImportanceWeighted)):
        return float(loss[a])
    if isinstance(spec, GraphHybrid):
        return {j: float(loss[j]) for j in spec.graph.observes[a]}
    if isinstance(spec, FullInformation):
        return loss
    raise TypeError(f"unknown estimator {spec!r}")


def estimate_for_loss(spec, x, a: int, loss) -> np.ndarray:
    return spec.estimate(x, a, signal_for(spec, a, loss))


def check_unbiased(spec, x, loss) -> float:
    """Max absolute bias of the estimator under exact action enumeration."""
    x = np.asarray(x, dtype=float)
    mean = np.zeros(len(x))
    for a in range(len(x)):
        if x[a] == 0.0:
            continue
        mean += x[a] * estimate_for_loss(spec, x, a, loss)
    return float(np.max(np.abs(mean - np.asarray(loss, dtype=float))))

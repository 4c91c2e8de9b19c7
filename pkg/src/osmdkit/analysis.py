"""Executable versions of the regret-analysis quantities.

The stability function of the mirror descent bound, its chord upper bounds,
learning-rate tuning, and the information ratio of the enumerated Thompson
process.  Everything here is a measurement on supplied state; the suites at
the bottom turn the inequalities into batch checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimators import (
    FullInformation,
    GraphHybrid,
    ImportanceWeighted,
    ShiftedImportanceWeighted,
    estimate_for_loss,
)
from .graphs import (
    GraphSpec,
    erdos_renyi_graph,
    independence_number,
    is_strongly_observable,
    revealer_ratio_bound,
    revealer_ratio_sum,
)
from .mirror import MirrorStepRequest, ball_step, simplex_step
from .potentials import ClippedLp, LpBall, Potential, Simplex

CHORD_SAMPLES = 1000
INTERIOR_FLOOR = 1e-12


def _interior(x: np.ndarray) -> np.ndarray:
    x = np.maximum(np.asarray(x, dtype=float), INTERIOR_FLOOR)
    return x / x.sum()


def stability_exact(
    potential: Potential, estimator, x, loss, eta: float
) -> float:
    """The definition value: (2/eta) E_A[<x - f(x,A), E(x,A)> - D(f, x)/eta]."""
    x = np.asarray(x, dtype=float)
    if isinstance(estimator, FullInformation):
        v = np.asarray(loss, dtype=float)
        req = MirrorStepRequest(
            potential=potential,
            geometry=LpBall(potential.p, potential.d),
            x=x,
            loss_estimate=v,
            eta=eta,
        )
        f = ball_step(req)
        term = float(np.dot(x - f, v)) - potential.bregman(f, x) / eta
        return 2.0 / eta * term
    total = 0.0
    for a in range(len(x)):
        if x[a] == 0.0:
            continue
        v = estimate_for_loss(estimator, x, a, loss)
        f, _ = simplex_step(potential, x, v, eta)
        term = float(np.dot(x - f, v)) - potential.bregman(f, x) / eta
        total += x[a] * term
    return 2.0 / eta * total


def _chord_sup(potential: Potential, x, g, v) -> float:
    """sup over the chord [x, g] of the squared dual-local norm of v."""
    s = np.linspace(0.0, 1.0, CHORD_SAMPLES)[:, None]
    z = x[None, :] + s * (np.asarray(g) - x)[None, :]
    with np.errstate(divide="ignore"):
        vals = (v[None, :] ** 2 / potential.h_double(z)).sum(axis=1)
    return float(np.max(vals))


def stability_chord_bound(
    potential: Potential, estimator, x, loss, eta: float, shift: float = 0.0
) -> float | None:
    """Expected chord supremum of the shifted estimate's dual-norm square.

    Returns None when the unconstrained dual point does not exist for some
    action in the support.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(estimator, FullInformation):
        v = np.asarray(loss, dtype=float) + shift
        theta = potential.h_prime(x) - eta * v
        if not np.all(potential.in_grad_range(theta)):
            return None
        return _chord_sup(potential, x, potential.dual_inv(theta), v)
    total = 0.0
    for a in range(len(x)):
        if x[a] == 0.0:
            continue
        v = estimate_for_loss(estimator, x, a, loss) + shift
        theta = potential.h_prime(x) - eta * v
        if not np.all(potential.in_grad_range(theta)):
            return None
        total += x[a] * _chord_sup(potential, x, potential.dual_inv(theta), v)
    return total


def ball_constrained_chord_bound(
    pot: ClippedLp, x, loss, eta: float
) -> float:
    """Chord bound using the constrained step, so the chord stays in the
    ball (the form that keeps the identity-estimator stability below 2)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(loss, dtype=float)
    req = MirrorStepRequest(
        potential=pot, geometry=LpBall(pot.p, pot.d), x=x, loss_estimate=v, eta=eta
    )
    return _chord_sup(pot, x, ball_step(req), v)


def tune_eta(diam: float, stab_constants: tuple[float, float], n: int):
    """Learning rate sqrt(2 diam / (n a)) for stability a + b eta, together
    with the implied regret bound sqrt(2 a diam n) + b diam / a."""
    a, b = stab_constants
    if diam <= 0.0 or a <= 0.0 or b < 0.0 or n <= 0:
        raise ValueError("tune_eta requires diam > 0, a > 0, b >= 0, n > 0")
    eta = math.sqrt(2.0 * diam / (n * a))
    bound = math.sqrt(2.0 * a * diam * n) + b * diam / a
    return eta, bound


# ---------------------------------------------------------------------------
# diagnostics on the enumerated Thompson process


def simplex_bregman(potential: Potential, x, y) -> float:
    """Bregman divergence tolerating matching zero coordinates."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    live = y > 0.0
    if np.any(x[~live] > 0.0):
        return float("inf")
    xs, ys = x[live], y[live]
    return float(
        np.sum(
            potential.h(xs) - potential.h(ys) - potential.h_prime(ys) * (xs - ys)
        )
    )


@dataclass
class RatioRecord:
    t: int
    prob: float
    numerator: float
    denominator: float
    ratio: float | None  # None flags a degenerate (0-denominator) node


def information_ratios(nodes, potential: Potential, horizon: int) -> list[RatioRecord]:
    """Per-history squared conditional regret over conditional divergence."""
    out = []
    for node in nodes:
        if node.t > horizon or not node.children:
            continue
        den = sum(
            trans * simplex_bregman(potential, child.x, node.x)
            for _, trans, child in node.children
        )
        num = node.expected_round_regret ** 2
        ratio = num / den if den > 0.0 else (0.0 if num == 0.0 else None)
        out.append(RatioRecord(node.t, node.prob, num, den, ratio))
    return out


def martingale_deviation(nodes, horizon: int) -> float:
    """Max gap between a node's play distribution and the transition-weighted
    average of its children's."""
    worst = 0.0
    for node in nodes:
        if node.t > horizon or not node.children:
            continue
        avg = sum(trans * child.x for _, trans, child in node.children)
        worst = max(worst, float(np.max(np.abs(avg - node.x))))
    return worst


def expected_total_divergence(nodes, potential: Potential, horizon: int) -> float:
    return float(
        sum(
            node.prob * trans * simplex_bregman(potential, child.x, node.x)
            for node in nodes
            if node.t <= horizon
            for _, trans, child in node.children
        )
    )


def stability_path_expectation(
    nodes, prior, potential: Potential, estimator, eta: float, horizon: int
) -> float:
    """E[sum_t stab_t(X_t; eta)] under the enumerated process."""
    seqs = prior.loss_arrays()
    total = 0.0
    for node in nodes:
        if node.t > horizon:
            continue
        x = _interior(node.x)
        for m, w in enumerate(node.weights):
            if w == 0.0:
                continue
            total += node.prob * w * stability_exact(
                potential, estimator, x, seqs[m][node.t - 1], eta
            )
    return total


def ess_sup_stability(
    nodes, prior, potential: Potential, estimator, eta_grid, horizon: int
) -> float:
    """Max exact stability over reachable (X_t, loss) contexts and the
    learning-rate grid."""
    seqs = prior.loss_arrays()
    worst = 0.0
    for node in nodes:
        if node.t > horizon:
            continue
        x = _interior(node.x)
        for m, w in enumerate(node.weights):
            if w == 0.0:
                continue
            for eta in eta_grid:
                worst = max(
                    worst,
                    stability_exact(potential, estimator, x, seqs[m][node.t - 1], eta),
                )
    return worst


# ---------------------------------------------------------------------------
# inequality suites


@dataclass
class CheckResult:
    name: str
    margin: float  # >= 0 means the inequality holds

    @property
    def passed(self) -> bool:
        return self.margin >= 0.0

    def report(self) -> dict:
        return {"name": self.name, "margin": self.margin, "passed": self.passed}


def _random_simplex(rng, k: int, floor: float = 1e-6) -> np.ndarray:
    x = rng.dirichlet(np.ones(k))
    x = np.maximum(x, floor)
    return x / x.sum()


def suite_unbiased(rng, contexts: int = 1000) -> list[CheckResult]:
    from .estimators import check_unbiased
    from .graphs import cycle_graph

    results = []
    worst = {"importance_weighted": 0.0, "shifted": 0.0, "graph_hybrid": 0.0, "full_information": 0.0}
    graph = cycle_graph(5, self_loops=True)
    for _ in range(contexts):
        k = int(rng.integers(2, 7))
        x = _random_simplex(rng, k)
        loss = rng.random(k)
        worst["importance_weighted"] = max(
            worst["importance_weighted"], check_unbiased(ImportanceWeighted(k), x, loss)
        )
        eta = float(rng.uniform(0.01, 0.5))
        worst["shifted"] = max(
            worst["shifted"], check_unbiased(ShiftedImportanceWeighted(k, eta), x, loss)
        )
        xg = _random_simplex(rng, graph.k)
        lg = rng.random(graph.k)
        worst["graph_hybrid"] = max(
            worst["graph_hybrid"], check_unbiased(GraphHybrid(graph), xg, lg)
        )
        worst["full_information"] = max(
            worst["full_information"], check_unbiased(FullInformation(k), x, loss)
        )
    for name, bias in worst.items():
        results.append(CheckResult(f"unbiased/{name}", 1e-12 - bias))
    return results


def suite_shifted_stability(
    rng, contexts: int = 1000, ks=(2, 5, 10), etas=(0.01, 0.1, 0.4)
) -> list[CheckResult]:
    """Exact stability of the shifted estimator against sqrt(k)/2 + 12 k eta,
    and of plain importance weighting against k."""
    from .potentials import Negentropy, TsallisHalf

    results = []
    half = TsallisHalf()
    negent = Negentropy()
    for k in ks:
        for eta in etas:
            worst_shift = -math.inf
            worst_plain = -math.inf
            per_cell = max(1, contexts // (len(ks) * len(etas)))
            for _ in range(per_cell):
                x = _random_simplex(rng, k)
                loss = rng.random(k)
                worst_shift = max(
                    worst_shift,
                    stability_exact(half, ShiftedImportanceWeighted(k, eta), x, loss, eta),
                )
                worst_plain = max(
                    worst_plain,
                    stability_exact(negent, ImportanceWeighted(k), x, loss, eta),
                )
            results.append(
                CheckResult(
                    f"shifted-stability/k={k},eta={eta}",
                    math.sqrt(k) / 2.0 + 12.0 * k * eta - worst_shift,
                )
            )
            results.append(
                CheckResult(f"plain-stability/k={k},eta={eta}", k - worst_plain)
            )
    return results


def graph_stability_bound(k: int, alpha_ind: int) -> float:
    return 8.0 * alpha_ind * (math.log(4.0 * k / alpha_ind) + math.log(k) ** 2) + 9.0


def _random_observable_graph(rng, k: int) -> GraphSpec:
    g = erdos_renyi_graph(k, float(rng.uniform(0.1, 0.9)), rng, self_loops=True)
    return g


def suite_graph(rng, ratio_pairs: int = 1000, stab_graphs: int = 200) -> list[CheckResult]:
    from .potentials import graph_tsallis_alpha

    results = []
    worst_gap = math.inf
    for _ in range(ratio_pairs):
        k = int(rng.integers(2, 11))
        g = _random_observable_graph(rng, k)
        p = _random_simplex(rng, k)
        worst_gap = min(worst_gap, revealer_ratio_bound(g, p) - revealer_ratio_sum(g, p))
    results.append(CheckResult("graph/revealer-ratio", worst_gap))

    worst_gap = math.inf
    k = 10
    pot = graph_tsallis_alpha(k)
    for _ in range(stab_graphs):
        g = _random_observable_graph(rng, k)
        if not is_strongly_observable(g):
            continue
        a = independence_number(g).value
        x = _random_simplex(rng, k)
        loss = rng.random(k)
        eta = float(rng.uniform(0.01, 0.3))
        stab = stability_exact(pot, GraphHybrid(g), x, loss, eta)
        worst_gap = min(worst_gap, graph_stability_bound(k, a) - stab)
    results.append(CheckResult("graph/stability", worst_gap))
    return results


def suite_lp(rng, contexts: int = 1000) -> list[CheckResult]:
    results = []
    # knot smoothness and the curvature clip identity
    worst = math.inf
    for p in (1.0, 1.01, 1.1, 1.5, 1.9, 2.0):
        for d in (2, 10, 100):
            pot = ClippedLp(p, d)
            gap = knot_continuity_gap(pot)
            worst = min(worst, 1e-9 - gap)
    results.append(CheckResult("lp/knot-continuity", worst))

    # stability of the identity estimator
    worst = math.inf
    for _ in range(contexts):
        d = int(rng.integers(2, 51))
        p = float(rng.uniform(1.01, 2.0))
        pot = ClippedLp(p, d)
        q = p / (p - 1.0)
        loss = _random_q_ball(rng, d, q)
        x = _random_p_ball(rng, d, p)
        bound = ball_constrained_chord_bound(pot, x, loss, float(rng.uniform(0.01, 0.3)))
        worst = min(worst, 2.0 - bound)
    results.append(CheckResult("lp/stability", worst))
    return results


def knot_continuity_gap(pot: ClippedLp) -> float:
    """Largest branch mismatch of h, h', h'' at the knot, plus the worst
    deviation of h'' from the clipped-curvature closed form."""
    if pot.p == 2.0 or pot.knot == 0.0:
        tau_checks = 0.0
    else:
        tau = pot.knot
        tau_checks = max(
            abs(float(pot._h_quad(tau)) - float(pot._h_outer(tau))),
            abs(float(pot._hp_quad(tau)) - float(pot._hp_outer(tau))),
            abs(float(pot.d) - tau ** (pot.p - 2.0)),
        )
    xs = np.concatenate([np.linspace(1e-6, 2.0, 200), [pot.knot or 1e-12]])
    with np.errstate(divide="ignore"):
        target = np.minimum(xs ** (pot.p - 2.0), pot.d)
    ident = float(np.max(np.abs(pot.h_double(xs) - target)))
    return max(tau_checks, ident)


def _random_q_ball(rng, d: int, q: float) -> np.ndarray:
    v = rng.standard_normal(d)
    if np.isinf(q):
        return v / np.max(np.abs(v)) * rng.random()
    norm = np.sum(np.abs(v) ** q) ** (1.0 / q)
    return v / norm * rng.random()


def _random_p_ball(rng, d: int, p: float) -> np.ndarray:
    v = rng.standard_normal(d)
    norm = np.sum(np.abs(v) ** p) ** (1.0 / p)
    return v / norm * rng.random()


SUITES = {
    "unbiased": suite_unbiased,
    "shifted-stability": suite_shifted_stability,
    "graph": suite_graph,
    "lp": suite_lp,
}


def run_suite(name: str, seed: int = 0) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; available: {sorted(SUITES)}")
    rng = np.random.default_rng(seed)
    return SUITES[name](rng)

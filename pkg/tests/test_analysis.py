"""Stability measurements and their upper bounds: an independent optimizer
oracle for the exact value, chord-bound orderings, learning-rate tuning, and
the batch check suites."""
import math

import numpy as np
import pytest
from scipy.optimize import minimize

from osmdkit import analysis
from osmdkit.estimators import (
    FullInformation,
    ImportanceWeighted,
    ShiftedImportanceWeighted,
    estimate_for_loss,
)
from osmdkit.potentials import ClippedLp, LpBall, Negentropy, Simplex, TsallisHalf


def _simplex(rng, k, floor=1e-4):
    x = np.maximum(rng.dirichlet(np.ones(k)), floor)
    return x / x.sum()


def _slsqp_stability(potential, estimator, x, loss, eta):
    """Recompute the exact stability with a generic constrained optimizer
    in place of the production mirror step."""
    k = len(x)
    total = 0.0
    for a in range(k):
        v = estimate_for_loss(estimator, x, a, loss)

        def objective(y):
            return eta * float(np.dot(v, y)) + potential.bregman(y, x)

        res = minimize(
            objective,
            x,
            method="SLSQP",
            bounds=[(1e-12, 1.0)] * k,
            constraints=[{"type": "eq", "fun": lambda y: y.sum() - 1.0}],
            options={"ftol": 1e-14, "maxiter": 500},
        )
        f = res.x
        total += x[a] * (float(np.dot(x - f, v)) - potential.bregman(f, x) / eta)
    return 2.0 / eta * total


# ---------------------------------------------------------------------------
# exact stability


def test_stability_zero_at_zero_loss():
    x = np.array([0.3, 0.7])
    for pot in (Negentropy(), TsallisHalf()):
        val = analysis.stability_exact(pot, ImportanceWeighted(2), x, np.zeros(2), 0.1)
        assert val == pytest.approx(0.0, abs=1e-12)


def test_stability_nonnegative_and_below_k_for_negentropy():
    rng = np.random.default_rng(0)
    pot = Negentropy()
    for _ in range(300):
        k = int(rng.integers(2, 8))
        x = _simplex(rng, k)
        loss = rng.random(k)
        eta = float(rng.uniform(0.01, 0.5))
        stab = analysis.stability_exact(pot, ImportanceWeighted(k), x, loss, eta)
        assert -1e-12 <= stab <= k + 1e-9


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_stability_matches_independent_optimizer():
    rng = np.random.default_rng(1)
    for pot in (Negentropy(), TsallisHalf()):
        for _ in range(10):
            k = int(rng.integers(2, 5))
            x = _simplex(rng, k, floor=1e-2)
            loss = rng.random(k)
            eta = float(rng.uniform(0.05, 0.3))
            mine = analysis.stability_exact(pot, ImportanceWeighted(k), x, loss, eta)
            ref = _slsqp_stability(pot, ImportanceWeighted(k), x, loss, eta)
            assert mine == pytest.approx(ref, abs=1e-4)


# ---------------------------------------------------------------------------
# chord bounds


def test_exact_below_chord_below_k_for_negentropy():
    rng = np.random.default_rng(2)
    pot = Negentropy()
    for _ in range(200):
        k = int(rng.integers(2, 8))
        x = _simplex(rng, k)
        loss = rng.random(k)
        eta = float(rng.uniform(0.01, 0.3))
        exact = analysis.stability_exact(pot, ImportanceWeighted(k), x, loss, eta)
        chord = analysis.stability_chord_bound(pot, ImportanceWeighted(k), x, loss, eta)
        assert chord is not None
        assert exact <= chord + 1e-9
        assert chord <= k + 1e-9


def test_chord_bound_zero_shift_is_default():
    rng = np.random.default_rng(3)
    pot = Negentropy()
    x = _simplex(rng, 4)
    loss = rng.random(4)
    a = analysis.stability_chord_bound(pot, ImportanceWeighted(4), x, loss, 0.1)
    b = analysis.stability_chord_bound(pot, ImportanceWeighted(4), x, loss, 0.1, shift=0.0)
    assert a == b


def test_shifted_stability_below_tuned_constants():
    rng = np.random.default_rng(4)
    pot = TsallisHalf()
    for _ in range(200):
        k = int(rng.integers(2, 11))
        eta = float(rng.uniform(0.01, 0.4))
        x = _simplex(rng, k)
        loss = rng.random(k)
        stab = analysis.stability_exact(
            pot, ShiftedImportanceWeighted(k, eta), x, loss, eta
        )
        assert stab <= math.sqrt(k) / 2.0 + 12.0 * k * eta + 1e-9


def test_chord_bound_none_when_dual_point_missing():
    # negentropy's gradient range is all of R, so force the Tsallis case:
    # a large negative estimate pushes theta above the upper gradient limit
    pot = TsallisHalf()
    x = np.array([0.5, 0.5])
    out = analysis.stability_chord_bound(
        pot, FullInformation(2), x, np.array([-100.0, 0.0]), 1.0
    )
    assert out is None


def test_ball_constrained_chord_bound_below_two():
    rng = np.random.default_rng(5)
    for _ in range(100):
        d = int(rng.integers(2, 20))
        p = float(rng.uniform(1.05, 2.0))
        pot = ClippedLp(p, d)
        q = p / (p - 1.0)
        v = rng.standard_normal(d)
        loss = v / np.sum(np.abs(v) ** q) ** (1 / q) * float(rng.random())
        w = rng.standard_normal(d)
        x = w / np.sum(np.abs(w) ** p) ** (1 / p) * float(rng.random())
        eta = float(rng.uniform(0.01, 0.3))
        assert analysis.ball_constrained_chord_bound(pot, x, loss, eta) <= 2.0 + 1e-9


# ---------------------------------------------------------------------------
# tuning


def test_tune_eta_unit_case():
    eta, bound = analysis.tune_eta(1.0, (1.0, 0.0), 1)
    assert eta == pytest.approx(math.sqrt(2.0))
    assert bound == pytest.approx(math.sqrt(2.0))


def test_tune_eta_negentropy_bandit_values():
    k, n = 5, 100_000
    eta, bound = analysis.tune_eta(math.log(k), (float(k), 0.0), n)
    assert eta == pytest.approx(math.sqrt(2.0 * math.log(5) / 5e5), rel=1e-12)
    assert eta == pytest.approx(2.5373e-3, rel=1e-4)
    assert bound == pytest.approx(1268.64, rel=1e-4)


def test_tune_eta_shifted_recovers_acceptance_constant():
    k, n = 5, 100_000
    _, bound = analysis.tune_eta(2.0 * math.sqrt(k), (math.sqrt(k) / 2.0, 12.0 * k), n)
    assert bound == pytest.approx(math.sqrt(2.0 * k * n) + 48.0 * k, rel=1e-12)


def test_tune_eta_rejects_bad_inputs():
    with pytest.raises(ValueError):
        analysis.tune_eta(0.0, (1.0, 0.0), 10)
    with pytest.raises(ValueError):
        analysis.tune_eta(1.0, (1.0, -1.0), 10)


def test_graph_stability_bound_frozen():
    assert analysis.graph_stability_bound(10, 1) == pytest.approx(80.92624, abs=1e-4)
    # grows with the independence number on a fixed vertex count
    assert analysis.graph_stability_bound(10, 5) > analysis.graph_stability_bound(10, 1)


# ---------------------------------------------------------------------------
# divergences


def test_simplex_bregman_handles_matching_zeros():
    pot = Negentropy()
    x = np.array([0.5, 0.5, 0.0])
    y = np.array([0.25, 0.75, 0.0])
    want = sum(
        x[i] * math.log(x[i] / y[i]) for i in range(2)
    )
    assert analysis.simplex_bregman(pot, x, y) == pytest.approx(want, abs=1e-12)
    assert analysis.simplex_bregman(pot, np.array([0.5, 0.0, 0.5]), y) == math.inf


# ---------------------------------------------------------------------------
# suites


def test_check_result_sign_convention():
    assert analysis.CheckResult("x", 0.0).passed
    assert not analysis.CheckResult("x", -1e-9).passed
    rep = analysis.CheckResult("x", 1.0).report()
    assert rep == {"name": "x", "margin": 1.0, "passed": True}


def test_run_suite_unknown_name():
    with pytest.raises(KeyError):
        analysis.run_suite("no-such-suite")


def test_small_suites_pass():
    rng = np.random.default_rng(0)
    for res in analysis.suite_unbiased(rng, contexts=50):
        assert res.passed, res.name
    for res in analysis.suite_shifted_stability(rng, contexts=90, ks=(2, 5), etas=(0.1,)):
        assert res.passed, res.name
    for res in analysis.suite_graph(rng, ratio_pairs=50, stab_graphs=10):
        assert res.passed, res.name
    for res in analysis.suite_lp(rng, contexts=30):
        assert res.passed, res.name

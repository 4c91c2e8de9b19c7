"""Problem instances: signal functions, loss generators, CSV loading and
realized-regret accounting."""
import numpy as np
import pytest
from scipy.optimize import minimize

from osmdkit.environments import (
    Bernoulli,
    FixedSequence,
    GraphBandit,
    KArmedBandit,
    LpFullInfo,
    Rademacher,
    best_comparator_loss,
    dual_norm,
    load_fixed_csv,
    realized_regret,
)
from osmdkit.graphs import make_graph


# ---------------------------------------------------------------------------
# signals


def test_bandit_signal_is_own_loss():
    assert KArmedBandit(2).signal(1, [0.1, 0.9]) == 0.9


def test_graph_signal_reveals_observed_vertices():
    g = make_graph(3, [(0, 0), (0, 1), (1, 1), (2, 2), (2, 0)])
    inst = GraphBandit(g)
    assert inst.signal(0, [0.3, 0.4, 0.5]) == {0: 0.3, 1: 0.4}
    assert inst.signal(2, [0.3, 0.4, 0.5]) == {2: 0.5, 0: 0.3}


def test_full_info_signal_is_whole_vector():
    loss = np.array([0.2, -0.1, 0.4])
    np.testing.assert_array_equal(LpFullInfo(1.5, 3).signal(None, loss), loss)


def test_unit_losses_enforced():
    with pytest.raises(ValueError):
        KArmedBandit(2).signal(0, [0.5, 1.2])
    with pytest.raises(ValueError):
        KArmedBandit(2).signal(0, [-0.1, 0.2])
    with pytest.raises(ValueError):
        KArmedBandit(3).signal(0, [0.1, 0.2])  # dimension mismatch


# ---------------------------------------------------------------------------
# loss sources


def test_fixed_sequence_draw_and_exhaustion():
    src = FixedSequence(rows=((0.0, 1.0), (1.0, 0.0)))
    np.testing.assert_array_equal(src.draw(2, None), [1.0, 0.0])
    with pytest.raises(IndexError):
        src.draw(3, None)
    with pytest.raises(IndexError):
        src.matrix(3, None)


def test_bernoulli_empirical_means():
    means = (0.45, 0.55, 0.55, 0.55, 0.55)
    src = Bernoulli(means=means)
    rng = np.random.default_rng(0)
    m = src.matrix(100_000, rng)
    assert set(np.unique(m)) <= {0.0, 1.0}
    emp = m.mean(axis=0)
    sigma = np.sqrt(np.array(means) * (1 - np.array(means)) / 100_000)
    assert np.all(np.abs(emp - means) <= 3 * sigma)


def test_rademacher_draws_stay_in_dual_ball():
    src = Rademacher(d=4, q=3.0)
    rng = np.random.default_rng(1)
    m = src.matrix(1000, rng)
    norms = np.sum(np.abs(m) ** 3.0, axis=1) ** (1 / 3.0)
    assert np.all(norms <= 1.0 + 1e-12)
    assert set(np.unique(np.abs(m))) == {4.0 ** (-1 / 3.0)}


def test_rademacher_infinity_dual_scale_is_one():
    src = Rademacher(d=3, q=np.inf)
    assert src.scale == 1.0


def test_csv_round_trip(tmp_path):
    path = tmp_path / "losses.csv"
    path.write_text("a,b\n0.1,0.9\n0.5,0.5\n")
    src = load_fixed_csv(path)
    np.testing.assert_array_equal(src.matrix(2, None), [[0.1, 0.9], [0.5, 0.5]])
    # headerless variant loads identically
    path.write_text("0.1,0.9\n0.5,0.5\n")
    np.testing.assert_array_equal(load_fixed_csv(path).matrix(2, None), [[0.1, 0.9], [0.5, 0.5]])


# ---------------------------------------------------------------------------
# regret


def test_zero_regret_when_playing_best_action():
    inst = KArmedBandit(2)
    assert realized_regret(inst, [0], [np.array([0.1, 0.9])]) == pytest.approx(0.0)


def test_two_round_constant_loss_regret():
    inst = KArmedBandit(2)
    losses = [np.array([1.0, 0.0]), np.array([1.0, 0.0])]
    assert realized_regret(inst, [0, 0], losses) == pytest.approx(2.0)


def test_regret_rejects_length_mismatch():
    with pytest.raises(ValueError):
        realized_regret(KArmedBandit(2), [0], [])


def test_ball_comparator_attains_minus_dual_norm():
    rng = np.random.default_rng(2)
    for p in (1.0, 1.3, 2.0):
        inst = LpFullInfo(p, 3)
        total = rng.standard_normal(3) * 5.0
        want = -dual_norm(total, inst.q)
        assert best_comparator_loss(inst, total) == pytest.approx(want, abs=1e-12)


def test_ball_comparator_against_independent_optimizer():
    # minimize <a, L> over the p-ball with a generic constrained solver
    rng = np.random.default_rng(3)
    for p in (1.3, 1.7, 2.0):
        inst = LpFullInfo(p, 3)
        total = rng.standard_normal(3) * 4.0
        res = minimize(
            lambda a: float(np.dot(a, total)),
            np.zeros(3),
            method="SLSQP",
            constraints=[
                {"type": "ineq", "fun": lambda a: 1.0 - np.sum(np.abs(a) ** p)}
            ],
            options={"ftol": 1e-12, "maxiter": 500},
        )
        assert best_comparator_loss(inst, total) == pytest.approx(res.fun, abs=1e-6)


def test_dual_norm_infinity():
    assert dual_norm(np.array([0.5, -2.0, 1.0]), np.inf) == 2.0


def test_q_conjugacy():
    assert LpFullInfo(1.0, 2).q == np.inf
    assert LpFullInfo(2.0, 2).q == pytest.approx(2.0)
    assert LpFullInfo(1.5, 2).q == pytest.approx(3.0)

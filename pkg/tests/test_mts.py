"""Posterior-mean play over atomic priors: hand-checked posteriors, an
independent recursive oracle for the exact Bayesian regret, Monte Carlo
cross-checks and the martingale/telescoping structure."""
import json
import math

import numpy as np
import pytest

from osmdkit import analysis
from osmdkit.environments import KArmedBandit
from osmdkit.estimators import ImportanceWeighted
from osmdkit.mts import (
    AtomicPrior,
    enumerate_process,
    exhaustive_bayes_regret,
    load_prior,
    monte_carlo_bayes_regret,
    mts_run,
    optimal_action,
    play_distribution,
    posterior_update,
)
from osmdkit.potentials import Negentropy, Simplex, TsallisHalf


def two_atom_prior():
    return AtomicPrior(
        weights=(0.6, 0.4),
        sequences=(
            ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)),
            ((1.0, 0.0), (1.0, 0.0), (1.0, 0.0)),
        ),
    )


def overlapping_prior():
    # atoms share observations on arm 0 in round 1, so learning is gradual
    return AtomicPrior(
        weights=(0.25, 0.25, 0.5),
        sequences=(
            ((0.0, 1.0), (0.0, 1.0), (1.0, 1.0)),
            ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)),
            ((1.0, 0.0), (0.0, 0.0), (0.0, 0.0)),
        ),
    )


def three_arm_prior():
    return AtomicPrior(
        weights=(0.2, 0.3, 0.5),
        sequences=(
            ((0.0, 1.0, 1.0), (0.0, 1.0, 0.0), (1.0, 0.0, 1.0), (0.0, 1.0, 1.0)),
            ((1.0, 0.0, 1.0), (1.0, 0.0, 1.0), (0.0, 0.0, 1.0), (1.0, 0.0, 0.0)),
            ((1.0, 1.0, 0.0), (0.0, 1.0, 0.0), (1.0, 1.0, 0.0), (1.0, 0.0, 0.0)),
        ),
    )


def _oracle_regret(prior, instance):
    """Independent recursive evaluation of the expected regret."""
    seqs = prior.loss_arrays()
    best = [optimal_action(s) for s in seqs]
    n, k = prior.horizon, prior.dim

    def rec(weights, t):
        if t > n:
            return 0.0
        x = play_distribution(np.asarray(weights), np.asarray(best), k)
        round_regret = sum(
            w * (float(np.dot(x, seqs[m][t - 1])) - seqs[m][t - 1][best[m]])
            for m, w in enumerate(weights)
            if w > 0.0
        )
        future = 0.0
        for a in range(k):
            if x[a] == 0.0:
                continue
            groups = {}
            for m, w in enumerate(weights):
                if w > 0.0:
                    groups.setdefault(instance.signal(a, seqs[m][t - 1]), []).append(m)
            for members in groups.values():
                mass = sum(weights[m] for m in members)
                post = [0.0] * len(weights)
                for m in members:
                    post[m] = weights[m] / mass
                future += x[a] * mass * rec(post, t + 1)
        return round_regret + future

    return rec(list(prior.weights), 1)


# ---------------------------------------------------------------------------
# basics


def test_optimal_action_picks_min_total():
    assert optimal_action(((0.0, 1.0), (0.0, 1.0))) == 0
    assert optimal_action(((1.0, 0.2), (0.0, 0.1))) == 1


def test_optimal_action_ties_break_low():
    assert optimal_action(((0.5, 0.5), (0.5, 0.5))) == 0


def test_optimal_action_matches_exhaustive_scan():
    rng = np.random.default_rng(0)
    for _ in range(100):
        seq = rng.random((4, 3))
        totals = [sum(seq[t][a] for t in range(4)) for a in range(3)]
        assert optimal_action(seq) == int(np.argmin(totals))


def test_prior_validation():
    with pytest.raises(ValueError):
        AtomicPrior(weights=(0.5, 0.4), sequences=(((0.0,),), ((1.0,),)))
    with pytest.raises(ValueError):
        AtomicPrior(weights=(0.5, 0.5), sequences=(((0.0,),), ((1.0, 0.0),)))


def test_load_prior_round_trip(tmp_path):
    doc = {
        "horizon": 2,
        "atoms": [
            {"weight": 0.3, "losses": [[0.0, 1.0], [0.5, 0.5]]},
            {"weight": 0.7, "losses": [[1.0, 0.0], [0.0, 1.0]]},
        ],
    }
    path = tmp_path / "prior.json"
    path.write_text(json.dumps(doc))
    prior = load_prior(path)
    assert prior.weights == (0.3, 0.7)
    assert prior.horizon == 2 and prior.dim == 2


def test_load_prior_rejects_horizon_mismatch(tmp_path):
    doc = {"horizon": 3, "atoms": [{"weight": 1.0, "losses": [[0.0, 1.0]]}]}
    path = tmp_path / "prior.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        load_prior(path)


# ---------------------------------------------------------------------------
# posterior


def test_posterior_unchanged_when_all_atoms_consistent():
    prior = AtomicPrior(
        weights=(0.5, 0.5),
        sequences=(((0.0, 1.0),), ((0.0, 0.0),)),
    )
    w = np.array([0.5, 0.5])
    out = posterior_update(w, prior, KArmedBandit(2), 0, 0.0, 1)
    np.testing.assert_array_equal(out, w)


def test_posterior_kills_inconsistent_atom():
    prior = two_atom_prior()
    w = np.array([0.6, 0.4])
    out = posterior_update(w, prior, KArmedBandit(2), 0, 0.0, 1)
    np.testing.assert_array_equal(out, [1.0, 0.0])


def test_posterior_hand_enumeration_four_atoms():
    prior = AtomicPrior(
        weights=(0.1, 0.2, 0.3, 0.4),
        sequences=(
            ((0.0, 0.0), (0.0, 0.0)),
            ((0.0, 1.0), (0.0, 0.0)),
            ((1.0, 1.0), (0.0, 0.0)),
            ((1.0, 0.0), (0.0, 0.0)),
        ),
    )
    w = np.asarray(prior.weights)
    out = posterior_update(w, prior, KArmedBandit(2), 1, 1.0, 1)
    np.testing.assert_allclose(out, [0.0, 0.4, 0.6, 0.0], atol=1e-15)


def test_posterior_impossible_observation_fails_hard():
    prior = two_atom_prior()
    with pytest.raises(RuntimeError):
        posterior_update(np.array([1.0, 0.0]), prior, KArmedBandit(2), 0, 0.5, 1)


# ---------------------------------------------------------------------------
# play process


def test_single_atom_prior_has_zero_regret():
    prior = AtomicPrior(weights=(1.0,), sequences=(((0.2, 0.8), (0.1, 0.9)),))
    trace = mts_run(prior, KArmedBandit(2), master_seed=1)
    assert trace.checkpoints[-1][1] == 0.0


def test_symmetric_prior_starts_uniform():
    prior = AtomicPrior(
        weights=(0.5, 0.5),
        sequences=(((0.0, 1.0),), ((1.0, 0.0),)),
    )
    best = np.array([optimal_action(s) for s in prior.loss_arrays()])
    x1 = play_distribution(np.asarray(prior.weights), best, 2)
    np.testing.assert_array_equal(x1, [0.5, 0.5])


def test_enumeration_matches_independent_oracle():
    for prior in (two_atom_prior(), overlapping_prior(), three_arm_prior()):
        inst = KArmedBandit(prior.dim)
        assert exhaustive_bayes_regret(prior, inst) == pytest.approx(
            _oracle_regret(prior, inst), abs=1e-10
        )


def test_node_probabilities_sum_to_one_each_round():
    prior = overlapping_prior()
    nodes = enumerate_process(prior, KArmedBandit(2))
    for t in range(1, prior.horizon + 1):
        mass = sum(n.prob for n in nodes if n.t == t)
        assert mass == pytest.approx(1.0, abs=1e-12)


def test_sampled_runs_agree_with_enumeration():
    prior = overlapping_prior()
    inst = KArmedBandit(2)
    exact = exhaustive_bayes_regret(prior, inst)
    finals = [mts_run(prior, inst, master_seed=9, run_id=r).checkpoints[-1][1]
              for r in range(4000)]
    mean = float(np.mean(finals))
    stderr = float(np.std(finals, ddof=1) / math.sqrt(len(finals)))
    assert abs(mean - exact) <= 3 * stderr


def test_monte_carlo_agrees_with_enumeration():
    prior = three_arm_prior()
    inst = KArmedBandit(3)
    exact = exhaustive_bayes_regret(prior, inst)
    mean, stderr = monte_carlo_bayes_regret(prior, inst, runs=200_000, master_seed=3)
    assert abs(mean - exact) <= 3 * stderr


def test_enumeration_guard():
    big = AtomicPrior(
        weights=(1.0,),
        sequences=(tuple(tuple([0.0] * 4) for _ in range(2)),),
    )
    with pytest.raises(ValueError):
        enumerate_process(big, KArmedBandit(4))


# ---------------------------------------------------------------------------
# structural inequalities on the enumerated process


@pytest.fixture(scope="module")
def enumerated():
    prior = overlapping_prior()
    inst = KArmedBandit(2)
    return prior, inst, enumerate_process(prior, inst)


def test_martingale_property(enumerated):
    prior, _, nodes = enumerated
    assert analysis.martingale_deviation(nodes, prior.horizon) <= 1e-10


def test_telescoping_divergence_bound(enumerated):
    prior, _, nodes = enumerated
    for pot in (Negentropy(), TsallisHalf()):
        total = analysis.expected_total_divergence(nodes, pot, prior.horizon)
        assert total <= pot.diameter_upper_bound(Simplex(prior.dim)) + 1e-12


def test_regret_decomposition_bound(enumerated):
    # total regret <= diam/eta + (eta/2) E[sum of per-round stabilities]
    prior, inst, nodes = enumerated
    regret = exhaustive_bayes_regret(prior, inst)
    est = ImportanceWeighted(prior.dim)
    for pot in (Negentropy(), TsallisHalf()):
        diam = pot.diameter_upper_bound(Simplex(prior.dim))
        for eta in (0.1, 0.5, 1.0):
            stab_sum = analysis.stability_path_expectation(
                nodes, prior, pot, est, eta, prior.horizon
            )
            assert regret <= diam / eta + 0.5 * eta * stab_sum + 1e-9


def test_information_ratio_bounded(enumerated):
    prior, _, nodes = enumerated
    est = ImportanceWeighted(prior.dim)
    grid = (0.1, 0.5, 1.0)
    for pot in (Negentropy(), TsallisHalf()):
        cap = 2.0 * analysis.ess_sup_stability(
            nodes, prior, pot, est, grid, prior.horizon
        )
        for rec in analysis.information_ratios(nodes, pot, prior.horizon):
            assert rec.ratio is None or rec.ratio <= cap + 1e-9
            assert rec.ratio is not None or rec.numerator == 0.0


def test_bayes_regret_within_tuned_bound(enumerated):
    prior, inst, nodes = enumerated
    regret = exhaustive_bayes_regret(prior, inst)
    pot = TsallisHalf()
    est = ImportanceWeighted(prior.dim)
    diam = pot.diameter_upper_bound(Simplex(prior.dim))
    stab = analysis.ess_sup_stability(nodes, prior, pot, est, (0.1, 0.5, 1.0), prior.horizon)
    assert regret <= math.sqrt(2.0 * diam * stab * prior.horizon) + 1e-9

"""Thompson-style play over finite atomic priors.

The prior is a weighted finite set of complete loss sequences.  Signals are
deterministic functions of (action, loss), so the posterior is a consistency
filter over atoms.  The play distribution is the posterior mean of the
optimal action, and everything about the induced process can be enumerated
exactly at desk scale.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .engine import RegretTrace, checkpoint_schedule, run_streams
from .environments import KArmedBandit

ENUM_MAX_ARMS = 3
ENUM_MAX_HORIZON = 5
ENUM_MAX_ATOMS = 16


@dataclass(frozen=True)
class AtomicPrior:
    weights: tuple  # nonnegative, sum to 1
    sequences: tuple  # of (n, k) loss tuples

    def __post_init__(self):
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("prior weights must sum to 1")
        shapes = {np.asarray(s, dtype=float).shape for s in self.sequences}
        if len(shapes) != 1:
            raise ValueError("all atoms must share horizon and dimension")

    @property
    def horizon(self) -> int:
        return np.asarray(self.sequences[0]).shape[0]

    @property
    def dim(self) -> int:
        return np.asarray(self.sequences[0]).shape[1]

    def loss_arrays(self) -> list[np.ndarray]:
        return [np.asarray(s, dtype=float) for s in self.sequences]


def load_prior(path) -> AtomicPrior:
    """JSON document {"horizon": n, "atoms": [{"weight": w, "losses": [[..]]}]}."""
    with open(path) as fh:
        doc = json.load(fh)
    weights, seqs = [], []
    for atom in doc["atoms"]:
        weights.append(float(atom["weight"]))
        losses = atom["losses"]
        if len(losses) != doc["horizon"]:
            raise ValueError("atom horizon differs from the declared horizon")
        seqs.append(tuple(tuple(float(v) for v in row) for row in losses))
    return AtomicPrior(weights=tuple(weights), sequences=tuple(seqs))


def optimal_action(sequence) -> int:
    """Arm with minimal total loss; ties break to the lowest index."""
    totals = np.asarray(sequence, dtype=float).sum(axis=0)
    return int(np.argmin(totals))


def play_distribution(weights: np.ndarray, best_arms: np.ndarray, k: int) -> np.ndarray:
    """Posterior-weighted average of the per-atom optimal actions."""
    x = np.zeros(k)
    np.add.at(x, best_arms, weights)
    return x


def posterior_update(
    weights: np.ndarray, prior: AtomicPrior, instance, a: int, obs, t: int
) -> np.ndarray:
    """Zero out atoms inconsistent with the observation and renormalise."""
    new = weights.copy()
    for m, seq in enumerate(prior.loss_arrays()):
        if new[m] == 0.0:
            continue
        if instance.signal(a, seq[t - 1]) != obs:
            new[m] = 0.0
    total = new.sum()
    if total <= 0.0:
        raise RuntimeError("impossible observation: posterior weight vanished")
    return new / total


def mts_run(prior: AtomicPrior, instance, master_seed: int, run_id: int = 0) -> RegretTrace:
    """One sampled trajectory: draw an atom from the prior, then interact."""
    n, k = prior.horizon, prior.dim
    loss_rng, act_rng = run_streams(master_seed, run_id)
    atom = int(loss_rng.choice(len(prior.weights), p=np.asarray(prior.weights)))
    losses = prior.loss_arrays()[atom]
    best = optimal_action(losses)
    best_arms = np.array([optimal_action(s) for s in prior.loss_arrays()])

    weights = np.asarray(prior.weights, dtype=float)
    cp_set = set(checkpoint_schedule(n))
    trace = RegretTrace(run_id=run_id)
    cum = 0.0
    for t in range(1, n + 1):
        x = play_distribution(weights, best_arms, k)
        u = act_rng.random()
        a = int(np.searchsorted(np.cumsum(x), u * x.sum()))
        a = min(a, k - 1)
        obs = instance.signal(a, losses[t - 1])
        weights = posterior_update(weights, prior, instance, a, obs, t)
        cum += float(losses[t - 1][a] - losses[t - 1][best])
        if t in cp_set:
            trace.checkpoints.append((t, cum))
    trace.final_iterate = play_distribution(weights, best_arms, k)
    return trace


# ---------------------------------------------------------------------------
# exact enumeration of the induced process


@dataclass
class HistoryNode:
    """A reachable history prefix at the start of round t."""

    t: int
    prob: float  # marginal probability of this history
    weights: np.ndarray  # posterior over atoms
    x: np.ndarray  # play distribution this round
    children: list = field(default_factory=list)  # (action, group_prob, node)
    expected_round_regret: float = 0.0  # E_{t-1}[Delta_t], conditional


def _guard(prior: AtomicPrior):
    if prior.dim > ENUM_MAX_ARMS or prior.horizon > ENUM_MAX_HORIZON or len(
        prior.weights
    ) > ENUM_MAX_ATOMS:
        raise ValueError(
            "enumeration budget exceeded: requires "
            f"k <= {ENUM_MAX_ARMS}, n <= {ENUM_MAX_HORIZON}, "
            f"atoms <= {ENUM_MAX_ATOMS}"
        )


def enumerate_process(prior: AtomicPrior, instance) -> list[HistoryNode]:
    """All reachable history nodes of the play process, with transition
    structure.  Probabilities are exact (atom weight times play weights)."""
    _guard(prior)
    n, k = prior.horizon, prior.dim
    seqs = prior.loss_arrays()
    best_arms = np.array([optimal_action(s) for s in seqs])

    root = HistoryNode(
        t=1,
        prob=1.0,
        weights=np.asarray(prior.weights, dtype=float),
        x=play_distribution(np.asarray(prior.weights, dtype=float), best_arms, k),
    )
    nodes = [root]
    frontier = [root]
    for t in range(1, n + 1):
        next_frontier = []
        for node in frontier:
            delta = 0.0
            for m, w in enumerate(node.weights):
                if w == 0.0:
                    continue
                loss = seqs[m][t - 1]
                delta += w * float(
                    np.dot(node.x, loss) - loss[best_arms[m]]
                )
            node.expected_round_regret = delta
            for a in range(k):
                if node.x[a] == 0.0:
                    continue
                # group atoms by the observation they would produce
                groups: dict = {}
                for m, w in enumerate(node.weights):
                    if w == 0.0:
                        continue
                    obs = instance.signal(a, seqs[m][t - 1])
                    key = obs if not isinstance(obs, dict) else tuple(sorted(obs.items()))
                    groups.setdefault(key, []).append(m)
                for key, members in groups.items():
                    mass = float(sum(node.weights[m] for m in members))
                    new_w = np.zeros_like(node.weights)
                    for m in members:
                        new_w[m] = node.weights[m] / mass
                    child = HistoryNode(
                        t=t + 1,
                        prob=node.prob * node.x[a] * mass,
                        weights=new_w,
                        x=play_distribution(new_w, best_arms, k),
                    )
                    node.children.append((a, node.x[a] * mass, child))
                    if t < n:
                        next_frontier.append(child)
                    nodes.append(child)
        frontier = next_frontier
    return nodes


def exhaustive_bayes_regret(prior: AtomicPrior, instance) -> float:
    """Exact expected regret of the play process against the per-atom
    optimal action, summed over the whole horizon."""
    nodes = enumerate_process(prior, instance)
    return float(
        sum(n.prob * n.expected_round_regret for n in nodes if n.t <= prior.horizon)
    )


def monte_carlo_bayes_regret(
    prior: AtomicPrior, instance, runs: int, master_seed: int
) -> tuple[float, float]:
    """Sampled estimate of the Bayesian regret; returns (mean, std error).

    Vectorised over runs for k-armed bandit instances.
    """
    if not isinstance(instance, KArmedBandit):
        raise ValueError("Monte Carlo cross-check supports k-armed instances only")
    n, k = prior.horizon, prior.dim
    seqs = np.stack(prior.loss_arrays())  # (atoms, n, k)
    best_arms = np.array([optimal_action(s) for s in prior.loss_arrays()])
    rng = np.random.default_rng(np.random.SeedSequence([master_seed, 99]))

    atoms = rng.choice(len(prior.weights), size=runs, p=np.asarray(prior.weights))
    weights = np.tile(np.asarray(prior.weights, dtype=float), (runs, 1))
    totals = np.zeros(runs)
    for t in range(1, n + 1):
        x = np.zeros((runs, k))
        for m in range(len(prior.weights)):
            x[:, best_arms[m]] += weights[:, m]
        u = rng.random(runs) * x.sum(axis=1)
        a = np.minimum((np.cumsum(x, axis=1) < u[:, None]).sum(axis=1), k - 1)
        loss_t = seqs[atoms, t - 1]  # (runs, k)
        obs = loss_t[np.arange(runs), a]
        # row r: keep atoms whose loss at (t, a_r) equals the observation
        atom_losses = seqs[:, t - 1, :][:, a].T  # (runs, atoms)
        consistent = atom_losses == obs[:, None]
        weights = np.where(consistent, weights, 0.0)
        weights = weights / weights.sum(axis=1, keepdims=True)
        totals += obs - loss_t[np.arange(runs), best_arms[atoms]]
    return float(totals.mean()), float(totals.std(ddof=1) / np.sqrt(runs))

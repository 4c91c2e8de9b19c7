"""The online mirror descent loop: sample, observe, estimate, update."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .environments import (
    GraphBandit,
    KArmedBandit,
    LpFullInfo,
    dual_norm,
)
from .estimators import (
    FullInformation,
    GraphHybrid,
    ImportanceWeighted,
    ShiftedImportanceWeighted,
)
from .mirror import (
    MirrorStepRequest,
    SolverError,
    ball_step,
    simplex_step,
    simplex_step_batch,
)
from .potentials import ClippedLp, LpBall, Potential, Simplex


@dataclass(frozen=True)
class OsmdConfig:
    potential: Potential
    estimator: object
    instance: object
    loss_source: object
    eta: float
    horizon: int
    master_seed: int


@dataclass
class RegretTrace:
    run_id: int
    checkpoints: list = field(default_factory=list)  # (round, cumulative regret)
    final_iterate: np.ndarray | None = None
    eta: float = 0.0


def checkpoint_schedule(n: int) -> list[int]:
    """Powers of two up to the horizon, plus the final round."""
    points = []
    t = 1
    while t < n:
        points.append(t)
        t *= 2
    points.append(n)
    return points


def sampling_scheme(x: np.ndarray, geometry):
    """Distribution over actions with mean x: coordinates on the simplex,
    a point mass on the ball."""
    if isinstance(geometry, Simplex):
        return np.asarray(x, dtype=float)
    if isinstance(geometry, LpBall):
        return np.asarray(x, dtype=float)  # point mass at x
    raise ValueError(f"unsupported geometry {geometry!r}")


def initial_iterate(potential: Potential, geometry) -> np.ndarray:
    """Minimiser of the potential over the feasible set."""
    if isinstance(geometry, Simplex):
        return np.full(geometry.k, 1.0 / geometry.k)
    if isinstance(geometry, ClippedLp) or isinstance(geometry, LpBall):
        return np.zeros(geometry.d)
    raise ValueError(f"unsupported geometry {geometry!r}")


def geometry_of(instance):
    if isinstance(instance, KArmedBandit):
        return Simplex(instance.k)
    if isinstance(instance, GraphBandit):
        return Simplex(instance.graph.k)
    if isinstance(instance, LpFullInfo):
        return LpBall(instance.p, instance.d)
    raise ValueError(f"unsupported instance {instance!r}")


def run_streams(master_seed: int, run_id: int):
    """Independent per-run generators for losses and action sampling."""
    loss_rng = np.random.default_rng(np.random.SeedSequence([master_seed, run_id, 0]))
    act_rng = np.random.default_rng(np.random.SeedSequence([master_seed, run_id, 1]))
    return loss_rng, act_rng


def run(config: OsmdConfig, run_id: int = 0) -> RegretTrace:
    geometry = geometry_of(config.instance)
    if isinstance(geometry, Simplex):
        return _run_simplex(config, geometry, run_id)
    return _run_ball(config, geometry, run_id)


def run_batch(config: OsmdConfig, run_ids) -> list[RegretTrace]:
    """Run several repeats at once, vectorised across runs where possible.

    Every arithmetic operation is elementwise per run, so each trace is
    identical to what `run(config, run_id)` produces on its own — batching
    (and therefore the worker count) never changes results.
    """
    run_ids = list(run_ids)
    geometry = geometry_of(config.instance)
    if not isinstance(geometry, Simplex) or not hasattr(
        config.estimator, "estimate_batch"
    ):
        return [run(config, r) for r in run_ids]

    n, k, eta = config.horizon, geometry.k, config.eta
    losses = []
    uniforms = []
    for r in run_ids:
        loss_rng, act_rng = run_streams(config.master_seed, r)
        losses.append(config.loss_source.matrix(n, loss_rng))
        uniforms.append(act_rng.random(n))
    losses = np.stack(losses)  # (runs, n, k)
    uniforms = np.stack(uniforms)

    best_arm = np.argmin(losses.sum(axis=1), axis=1)
    checkpoints = checkpoint_schedule(n)
    cp_set = set(checkpoints)
    rows = np.arange(len(run_ids))

    x = np.tile(initial_iterate(config.potential, geometry), (len(run_ids), 1))
    lam = None
    played_cum = np.zeros(len(run_ids))
    best_cum = np.zeros(len(run_ids))
    traces = [RegretTrace(run_id=r, eta=eta) for r in run_ids]
    for t in range(1, n + 1):
        loss = losses[:, t - 1]
        val = uniforms[:, t - 1] * np.sum(x, axis=1)
        a = np.minimum(np.sum(np.cumsum(x, axis=1) < val[:, None], axis=1), k - 1)
        signal = loss[rows, a]
        lhat = config.estimator.estimate_batch(x, a, signal)
        try:
            x, lam = simplex_step_batch(config.potential, x, lhat, eta, lam0=lam)
        except SolverError as exc:
            raise SolverError(f"round {t}: {exc}") from exc
        played_cum += loss[rows, a]
        best_cum += loss[rows, best_arm]
        if t in cp_set:
            reg = played_cum - best_cum
            for i, trace in enumerate(traces):
                trace.checkpoints.append((t, float(reg[i])))
    for i, trace in enumerate(traces):
        trace.final_iterate = x[i]
    return traces


def _run_simplex(config: OsmdConfig, geometry: Simplex, run_id: int) -> RegretTrace:
    n, k, eta = config.horizon, geometry.k, config.eta
    loss_rng, act_rng = run_streams(config.master_seed, run_id)
    losses = config.loss_source.matrix(n, loss_rng)
    uniforms = act_rng.random(n)

    arm_totals = losses.sum(axis=0)
    best_arm = int(np.argmin(arm_totals))
    checkpoints = checkpoint_schedule(n)
    cp_set = set(checkpoints)

    x = initial_iterate(config.potential, geometry)
    lam = None
    played_cum = 0.0
    best_cum = 0.0
    trace = RegretTrace(run_id=run_id, eta=eta)
    for t in range(1, n + 1):
        loss = losses[t - 1]
        a = int(np.searchsorted(np.cumsum(x), uniforms[t - 1] * np.sum(x)))
        a = min(a, k - 1)
        signal = config.instance.signal(a, loss)
        lhat = config.estimator.estimate(x, a, signal)
        try:
            x, lam = simplex_step(config.potential, x, lhat, eta, lam0=lam)
        except SolverError as exc:
            raise SolverError(f"round {t}: {exc}") from exc
        played_cum += float(loss[a])
        best_cum += float(loss[best_arm])
        if t in cp_set:
            trace.checkpoints.append((t, played_cum - best_cum))
    trace.final_iterate = x
    return trace


def _run_ball(config: OsmdConfig, geometry: LpBall, run_id: int) -> RegretTrace:
    n, eta = config.horizon, config.eta
    instance = config.instance
    loss_rng, _ = run_streams(config.master_seed, run_id)
    losses = config.loss_source.matrix(n, loss_rng)

    total = losses.sum(axis=0)
    comparator = best_ball_point(total, geometry.p, instance.q)
    checkpoints = checkpoint_schedule(n)
    cp_set = set(checkpoints)

    x = initial_iterate(config.potential, geometry)
    played_cum = 0.0
    best_cum = 0.0
    trace = RegretTrace(run_id=run_id, eta=eta)
    for t in range(1, n + 1):
        loss = losses[t - 1]
        signal = instance.signal(x, loss)
        lhat = config.estimator.estimate(x, None, signal)
        played_cum += float(np.dot(x, loss))
        best_cum += float(np.dot(comparator, loss))
        req = MirrorStepRequest(
            potential=config.potential,
            geometry=geometry,
            x=x,
            loss_estimate=lhat,
            eta=eta,
        )
        try:
            x = ball_step(req)
        except SolverError as exc:
            raise SolverError(f"round {t}: {exc}") from exc
        if t in cp_set:
            trace.checkpoints.append((t, played_cum - best_cum))
    trace.final_iterate = x
    return trace


def best_ball_point(total_loss: np.ndarray, p: float, q: float) -> np.ndarray:
    """Minimiser of <a, L> over the unit lp-ball (attains -|L|_q)."""
    L = np.asarray(total_loss, dtype=float)
    if np.all(L == 0.0):
        return np.zeros_like(L)
    if p == 1.0:
        a = np.zeros_like(L)
        j = int(np.argmax(np.abs(L)))
        a[j] = -np.sign(L[j])
        return a
    norm = dual_norm(L, q)
    return -np.sign(L) * (np.abs(L) / norm) ** (q / p)

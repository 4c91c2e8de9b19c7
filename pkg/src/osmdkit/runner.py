"""Experiment orchestration: config parsing, seeded parallel sweeps, CSV/JSON
persistence and the bundled experiment presets."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from . import analysis, engine
from .environments import (
    Bernoulli,
    FixedSequence,
    GraphBandit,
    KArmedBandit,
    LpFullInfo,
    Rademacher,
    load_fixed_csv,
)
from .estimators import (
    FullInformation,
    GraphHybrid,
    ImportanceWeighted,
    ShiftedImportanceWeighted,
)
from .graphs import (
    bandit_graph,
    complete_graph,
    cycle_graph,
    full_information_graph,
    independence_number,
    load_graph,
)
from .potentials import (
    ClippedLp,
    LpBall,
    Negentropy,
    Simplex,
    TsallisAlpha,
    TsallisHalf,
)

FIG1_MEANS = (0.45, 0.55, 0.55, 0.55, 0.55)
FIG1_HORIZON = 100_000
FIG1_REPEATS = 100


class ConfigError(ValueError):
    """Configuration failed validation; message lists the offending fields."""


CONFIG_SCHEMA = {
    "type": "object",
    "required": ["experiment", "algorithm", "instance", "horizon", "repeats", "seed"],
    "properties": {
        "experiment": {"type": "string"},
        "label": {"type": "string"},
        "out": {"type": "string"},
        "horizon": {"type": "integer", "minimum": 1},
        "repeats": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "workers": {"type": "integer", "minimum": 1},
        "algorithm": {
            "type": "object",
            "required": ["potential", "estimator", "eta"],
            "properties": {
                "potential": {
                    "type": "object",
                    "required": ["kind"],
                    "properties": {
                        "kind": {
                            "enum": [
                                "negentropy",
                                "tsallis_half",
                                "tsallis_alpha",
                                "clipped_lp",
                            ]
                        },
                        "alpha": {"type": "number"},
                    },
                },
                "estimator": {
                    "enum": [
                        "importance_weighted",
                        "shifted",
                        "graph_hybrid",
                        "full_information",
                    ]
                },
                "eta": {
                    "anyOf": [
                        {"type": "number", "exclusiveMinimum": 0},
                        {"const": "auto"},
                    ]
                },
            },
        },
        "instance": {
            "type": "object",
            "required": ["kind", "losses"],
            "properties": {
                "kind": {"enum": ["k_armed", "graph", "lp_full_info"]},
                "k": {"type": "integer", "minimum": 1},
                "p": {"type": "number", "minimum": 1, "maximum": 2},
                "d": {"type": "integer", "minimum": 1},
                "graph": {"type": "object"},
                "losses": {
                    "type": "object",
                    "required": ["kind"],
                    "properties": {
                        "kind": {
                            "enum": ["bernoulli", "fixed", "fixed_csv", "rademacher"]
                        }
                    },
                },
            },
        },
    },
}


def validate_config(cfg: dict) -> None:
    import jsonschema

    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        fields = "; ".join(
            f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}"
            for e in errors
        )
        raise ConfigError(f"invalid config: {fields}")


def build_graph(spec: dict):
    if "path" in spec:
        return load_graph(spec["path"])
    gen = spec.get("generator", "bandit")
    k = int(spec["k"])
    if gen == "bandit":
        return bandit_graph(k)
    if gen == "complete":
        return complete_graph(k, self_loops=bool(spec.get("self_loops", False)))
    if gen == "cycle":
        return cycle_graph(k, self_loops=bool(spec.get("self_loops", True)))
    if gen == "full_information":
        return full_information_graph(k)
    raise ConfigError(f"unknown graph generator {gen!r}")


def build_instance(spec: dict):
    kind = spec["kind"]
    if kind == "k_armed":
        instance = KArmedBandit(int(spec["k"]))
    elif kind == "graph":
        instance = GraphBandit(build_graph(spec["graph"]))
    elif kind == "lp_full_info":
        instance = LpFullInfo(float(spec["p"]), int(spec["d"]))
    else:
        raise ConfigError(f"unknown instance kind {kind!r}")

    lspec = spec["losses"]
    lkind = lspec["kind"]
    if lkind == "bernoulli":
        source = Bernoulli(means=tuple(float(v) for v in lspec["means"]))
    elif lkind == "fixed":
        source = FixedSequence(rows=tuple(tuple(r) for r in lspec["rows"]))
    elif lkind == "fixed_csv":
        source = load_fixed_csv(lspec["path"])
    elif lkind == "rademacher":
        if not isinstance(instance, LpFullInfo):
            raise ConfigError("rademacher losses require an lp_full_info instance")
        source = Rademacher(d=instance.dim, q=instance.q)
    else:
        raise ConfigError(f"unknown loss source {lkind!r}")
    return instance, source


def build_potential(spec: dict, instance):
    kind = spec["kind"]
    if kind == "negentropy":
        return Negentropy()
    if kind == "tsallis_half":
        return TsallisHalf()
    if kind == "tsallis_alpha":
        if "alpha" in spec:
            return TsallisAlpha(float(spec["alpha"]))
        return TsallisAlpha(1.0 - 1.0 / math.log(instance.dim))
    if kind == "clipped_lp":
        if not isinstance(instance, LpFullInfo):
            raise ConfigError("clipped_lp potential requires an lp_full_info instance")
        return ClippedLp(instance.p, instance.d)
    raise ConfigError(f"unknown potential {kind!r}")


def auto_eta(potential, estimator_name: str, instance, horizon: int) -> tuple[float, dict]:
    """Learning rate from the closed-form diameter and stability constants of
    the supported potential/estimator pairings."""
    if isinstance(instance, LpFullInfo):
        diam = potential.diameter_upper_bound(LpBall(instance.p, instance.d))
        a, b = 2.0, 0.0
    else:
        k = instance.dim
        if isinstance(potential, Negentropy):
            diam, a, b = math.log(k), float(k), 0.0
        elif isinstance(potential, TsallisHalf):
            diam = 2.0 * math.sqrt(k)
            if estimator_name == "shifted":
                a, b = math.sqrt(k) / 2.0, 12.0 * k
            else:
                a, b = 2.0 * math.sqrt(k), 0.0
        elif isinstance(potential, TsallisAlpha):
            diam = potential.diameter_upper_bound(Simplex(k))
            if not isinstance(instance, GraphBandit):
                raise ConfigError("auto eta for tsallis_alpha needs a graph instance")
            alpha_ind = independence_number(instance.graph).value
            a, b = analysis.graph_stability_bound(k, alpha_ind), 0.0
        else:
            raise ConfigError(
                f"no auto learning rate for {type(potential).__name__}"
            )
    eta, bound = analysis.tune_eta(diam, (a, b), horizon)
    return eta, {"diameter": diam, "stab_a": a, "stab_b": b, "implied_bound": bound}


def build_estimator(name: str, instance, eta: float):
    k = instance.dim
    if name == "importance_weighted":
        return ImportanceWeighted(k)
    if name == "shifted":
        return ShiftedImportanceWeighted(k, eta)
    if name == "graph_hybrid":
        if not isinstance(instance, GraphBandit):
            raise ConfigError("graph_hybrid estimator requires a graph instance")
        return GraphHybrid(instance.graph)
    if name == "full_information":
        return FullInformation(k)
    raise ConfigError(f"unknown estimator {name!r}")


@dataclass
class ResolvedRun:
    config: engine.OsmdConfig
    label: str
    experiment: str
    out_dir: str
    repeats: int
    tuning: dict


def resolve(cfg: dict) -> ResolvedRun:
    validate_config(cfg)
    instance, source = build_instance(cfg["instance"])
    potential = build_potential(cfg["algorithm"]["potential"], instance)
    eta_spec = cfg["algorithm"]["eta"]
    est_name = cfg["algorithm"]["estimator"]
    tuning = {}
    if eta_spec == "auto":
        eta, tuning = auto_eta(potential, est_name, instance, cfg["horizon"])
    else:
        eta = float(eta_spec)
    estimator = build_estimator(est_name, instance, eta)
    config = engine.OsmdConfig(
        potential=potential,
        estimator=estimator,
        instance=instance,
        loss_source=source,
        eta=eta,
        horizon=int(cfg["horizon"]),
        master_seed=int(cfg["seed"]),
    )
    return ResolvedRun(
        config=config,
        label=cfg.get("label", est_name),
        experiment=cfg["experiment"],
        out_dir=cfg.get("out", "out"),
        repeats=int(cfg["repeats"]),
        tuning=tuning,
    )


#: repeats executed per vectorised batch; bounds the in-memory loss block
BATCH_RUNS = 25


def _worker(args):
    config, run_ids = args
    return engine.run_batch(config, run_ids)


def execute(resolved: ResolvedRun, workers: int = 1) -> list[engine.RegretTrace]:
    """Run all repeats; results only depend on (config, run id), so neither
    the worker count nor the batch split ever changes the output."""
    ids = list(range(resolved.repeats))
    jobs = [
        (resolved.config, ids[i : i + BATCH_RUNS])
        for i in range(0, len(ids), BATCH_RUNS)
    ]
    if workers <= 1:
        batches = [_worker(j) for j in jobs]
    else:
        with get_context("spawn").Pool(workers) as pool:
            batches = pool.map(_worker, jobs)
    traces = [t for batch in batches for t in batch]
    return sorted(traces, key=lambda t: t.run_id)


def write_trace_csv(traces, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("run_id,t,cum_regret\n")
        for trace in traces:
            for t, reg in trace.checkpoints:
                fh.write(f"{trace.run_id},{t},{reg!r}\n")


def checkpoint_stats(traces) -> list[dict]:
    """Per-checkpoint mean and standard deviation across runs."""
    if not traces:
        return []
    rounds = [t for t, _ in traces[0].checkpoints]
    values = np.array([[reg for _, reg in tr.checkpoints] for tr in traces])
    out = []
    for idx, t in enumerate(rounds):
        col = values[:, idx]
        out.append(
            {
                "t": int(t),
                "mean": float(col.mean()),
                "std": float(col.std(ddof=1)) if len(col) > 1 else 0.0,
                "runs": int(len(col)),
            }
        )
    return out


def run_experiment(cfg: dict, workers: int = 1) -> dict:
    """Execute one algorithm block and persist CSV plus summary statistics."""
    resolved = resolve(cfg)
    traces = execute(resolved, workers=workers)
    exp_dir = os.path.join(resolved.out_dir, resolved.experiment)
    os.makedirs(exp_dir, exist_ok=True)
    csv_path = os.path.join(exp_dir, f"{resolved.label}.csv")
    write_trace_csv(traces, csv_path)
    summary = {
        "experiment": resolved.experiment,
        "label": resolved.label,
        "eta": resolved.config.eta,
        "tuning": resolved.tuning,
        "horizon": resolved.config.horizon,
        "repeats": resolved.repeats,
        "seed": resolved.config.master_seed,
        "csv": csv_path,
        "checkpoints": checkpoint_stats(traces),
    }
    return summary


def fig1_configs(
    repeats: int = FIG1_REPEATS,
    horizon: int = FIG1_HORIZON,
    seed: int = 0,
    out: str = "out",
) -> list[dict]:
    """The bundled shifted-vs-plain comparison on the five-armed Bernoulli
    instance with a single slightly better arm."""
    base_instance = {
        "kind": "k_armed",
        "k": len(FIG1_MEANS),
        "losses": {"kind": "bernoulli", "means": list(FIG1_MEANS)},
    }
    common = {
        "experiment": "fig1",
        "instance": base_instance,
        "horizon": horizon,
        "repeats": repeats,
        "seed": seed,
        "out": out,
    }
    plain = dict(common)
    plain["label"] = "inf"
    plain["algorithm"] = {
        "potential": {"kind": "tsallis_half"},
        "estimator": "importance_weighted",
        "eta": "auto",
    }
    shifted = dict(common)
    shifted["label"] = "inf_shift"
    shifted["algorithm"] = {
        "potential": {"kind": "tsallis_half"},
        "estimator": "shifted",
        "eta": "auto",
    }
    return [plain, shifted]


def run_fig1(
    repeats: int = FIG1_REPEATS,
    horizon: int = FIG1_HORIZON,
    seed: int = 0,
    out: str = "out",
    workers: int = 1,
) -> dict:
    summaries = [run_experiment(c, workers=workers) for c in fig1_configs(repeats, horizon, seed, out)]
    plain, shifted = summaries
    ratio = plain["checkpoints"][-1]["mean"] / shifted["checkpoints"][-1]["mean"]
    doc = {
        "experiment": "fig1",
        "algorithms": summaries,
        "final_regret_ratio": ratio,
        "error_bars": "three standard deviations",
    }
    path = os.path.join(out, "fig1", "summary.json")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
    return doc

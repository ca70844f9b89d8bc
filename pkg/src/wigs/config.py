"""Experiment configuration: dataclasses, validation, YAML loading, snapshots.

A config names one dataset source (a CSV path or a bundled generator), the
preprocessing mode, the split fraction, the model settings, the method
battery with per-method parameters, and the replication plan.  The same
dictionary form round-trips through the JSON snapshot written next to run
outputs, so a finished run can be replayed byte-for-byte.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

import yaml

from .sac import SacConfig

ENV_OUT_DIR = "WIGS_OUT_DIR"

METHOD_KINDS = (
    "passive", "gsx", "gsy", "igs",
    "wigs_static", "wigs_linear", "wigs_exp", "wigs_mab", "wigs_sac",
    "uncertainty", "qbc", "emcm", "egal",
)

# Named interpretation choices baked into this implementation, embedded in
# every run snapshot so downstream consumers know which conventions
# produced the numbers.
INTERPRETATION_REGISTRY = {
    "version": 1,
    "phi_normalization": "per-iteration min-max over the full candidate x labeled pairwise distance collection, separately per metric",
    "tie_breaking": "lowest candidate index",
    "zscore_std": "population standard deviation",
    "robust_quantiles": "midpoint interpolation (average of bracketing order statistics)",
    "mixture_out_of_range": "redraw component and value until the draw lands in [0, 1]",
    "milestone_anchor": "threshold = (1 - q) * starting RMSE; final RMSE is exactly 0 at pool exhaustion",
    "relative_auc_aggregation": "per-seed AUC ratios averaged across seeds",
    "ucb_bonus": "mean_i + c_explore * sqrt(ln n / n_i)",
    "first_reward": "skipped; transitions are stored once two CV values exist",
    "replication_seeds": "base_seed + replication index; named substreams per consumer",
    "egal": "Gaussian similarity, bandwidth = mean pairwise distance on a seeded sample of <= 500 rows, diversity filter at the 25th percentile of nearest-labeled distance",
}


@dataclass(frozen=True)
class MethodSpec:
    """One selection strategy plus its parameters.

    ``name`` labels output rows and must be unique within a config;
    ``kind`` picks the selector; ``params`` holds kind-specific settings
    (weight / decay constants, committee size, bandit arms, agent
    hyperparameters).
    """

    name: str
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in METHOD_KINDS:
            raise ValueError(f"unknown method kind {self.kind!r}")
        p = self.params
        if self.kind == "wigs_static":
            w = p.get("w")
            if w is None or not 0.0 <= float(w) <= 1.0:
                raise ValueError(f"{self.name}: static weight must lie in [0, 1]")
        if self.kind in ("wigs_linear", "wigs_exp") and float(p.get("c", 1.0)) <= 0:
            raise ValueError(f"{self.name}: decay constant must be positive")
        if self.kind == "wigs_mab":
            arms = p.get("arms", (0.25, 0.50, 0.75))
            if not arms or any(not 0.0 <= float(a) <= 1.0 for a in arms):
                raise ValueError(f"{self.name}: bandit arms must lie in [0, 1]")
            if float(p.get("c_explore", 2.0)) < 0:
                raise ValueError(f"{self.name}: c_explore must be nonnegative")
        if self.kind in ("qbc", "emcm") and int(p.get("committee_size", 10)) < 2:
            raise ValueError(f"{self.name}: committee needs at least 2 members")

    def sac_config(self) -> SacConfig:
        """Agent hyperparameters, package defaults overridden by params."""
        fields = (
            "hidden", "lr", "beta1", "beta2", "adam_eps", "gamma", "tau",
            "alpha_ent", "batch_size", "buffer_capacity", "log_std_min",
            "log_std_max",
        )
        overrides = {k: self.params[k] for k in fields if k in self.params}
        return SacConfig(**overrides)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one benchmark run."""

    # dataset source: exactly one of csv_path / dgp
    csv_path: str | None = None
    dgp: str | None = None
    n: int | None = None
    dataset_seed: int = 0
    scaling: str = "zscore"
    categorical_columns: tuple[str, ...] | None = None
    initial_fraction: float = 0.05
    alpha: float = 0.01
    cv_folds: int = 5
    methods: tuple[MethodSpec, ...] = ()
    replications: int = 1
    base_seed: int = 0
    parallelism: int = 1
    out_dir: str = "results"

    def __post_init__(self):
        if (self.csv_path is None) == (self.dgp is None):
            raise ValueError("specify exactly one dataset source: csv_path or dgp")
        if self.dgp is not None:
            if self.dgp not in ("two_regime", "three_regime"):
                raise ValueError(f"unknown generator {self.dgp!r}")
            if self.n is None or self.n < 2:
                raise ValueError("generator runs need n >= 2")
        if self.scaling not in ("zscore", "robust"):
            raise ValueError(f"unknown scaling {self.scaling!r}")
        if not 0.0 < self.initial_fraction < 1.0:
            raise ValueError("initial_fraction must lie in (0, 1)")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be at least 2")
        if not self.methods:
            raise ValueError("methods list is empty")
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ValueError("method names must be unique")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be at least 1")

    def resolved_out_dir(self) -> str:
        return os.environ.get(ENV_OUT_DIR, self.out_dir)


def default_methods() -> tuple[MethodSpec, ...]:
    """The standard 14-method battery with documented defaults."""
    return (
        MethodSpec("passive", "passive"),
        MethodSpec("gsx", "gsx"),
        MethodSpec("gsy", "gsy"),
        MethodSpec("igs", "igs"),
        MethodSpec("wigs_s_0.25", "wigs_static", {"w": 0.25}),
        MethodSpec("wigs_s_0.75", "wigs_static", {"w": 0.75}),
        MethodSpec("wigs_lin", "wigs_linear", {"c": 1.0}),
        MethodSpec("wigs_exp", "wigs_exp", {"c": 5.0}),
        MethodSpec("wigs_mab", "wigs_mab", {"arms": (0.25, 0.50, 0.75), "c_explore": 2.0}),
        MethodSpec("wigs_sac", "wigs_sac"),
        MethodSpec("uncertainty", "uncertainty"),
        MethodSpec("qbc", "qbc", {"committee_size": 10}),
        MethodSpec("emcm", "emcm", {"committee_size": 10}),
        MethodSpec("egal", "egal"),
    )


def config_to_dict(config: ExperimentConfig) -> dict:
    d = asdict(config)
    d["methods"] = [asdict(m) for m in config.methods]
    return d


def config_from_dict(d: dict) -> ExperimentConfig:
    d = dict(d)
    d["methods"] = tuple(
        MethodSpec(m["name"], m["kind"], dict(m.get("params") or {}))
        for m in d.get("methods", [])
    )
    if d.get("categorical_columns") is not None:
        d["categorical_columns"] = tuple(d["categorical_columns"])
    return ExperimentConfig(**d)


def load_config(path: str) -> ExperimentConfig:
    """Parse a YAML config file (sections: dataset, preprocessing, split,
    model, run, methods); see the README for the full schema."""
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}

    dataset = raw.get("dataset") or {}
    preprocessing = raw.get("preprocessing") or {}
    split = raw.get("split") or {}
    model = raw.get("model") or {}
    run = raw.get("run") or {}

    methods_raw = raw.get("methods")
    if methods_raw == "default" or methods_raw is None:
        methods = default_methods()
    else:
        methods = []
        for entry in methods_raw:
            entry = dict(entry)
            name = entry.pop("name")
            kind = entry.pop("kind")
            params = entry.pop("params", None)
            if params is None:
                params = entry  # flat style: remaining keys are the params
            methods.append(MethodSpec(name, kind, dict(params)))
        methods = tuple(methods)

    cat = preprocessing.get("categorical_columns")
    return ExperimentConfig(
        csv_path=dataset.get("csv"),
        dgp=dataset.get("dgp"),
        n=dataset.get("n"),
        dataset_seed=int(dataset.get("seed", 0)),
        scaling=preprocessing.get("scaling", "zscore"),
        categorical_columns=tuple(cat) if cat is not None else None,
        initial_fraction=float(split.get("initial_fraction", 0.05)),
        alpha=float(model.get("alpha", 0.01)),
        cv_folds=int(model.get("cv_folds", 5)),
        methods=methods,
        replications=int(run.get("replications", 1)),
        base_seed=int(run.get("base_seed", 0)),
        parallelism=int(run.get("parallelism", 1)),
        out_dir=str(run.get("out_dir", "results")),
    )


def snapshot_json(config: ExperimentConfig) -> str:
    """Deterministic JSON snapshot embedded in run outputs."""
    payload = {
        "schema_version": 1,
        "config": config_to_dict(config),
        "interpretation": INTERPRETATION_REGISTRY,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def snapshot_to_config(text: str) -> ExperimentConfig:
    return config_from_dict(json.loads(text)["config"])

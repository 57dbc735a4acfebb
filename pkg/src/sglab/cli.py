"""Command-line front end.

    sglab run local|joint|condition|ordinary|blindness|absorbing|sweep [flags]

Configuration precedence: built-in defaults < --config file (JSON, keys
named like the flags with underscores) < command-line flags.  Unknown keys
in a config file are rejected.  An unseeded run draws a seed from system
entropy and records it in the report, so every emitted file is exactly
reproducible from its own config echo.

Exit codes: 0 success, 2 malformed config, 3 dimension cap exceeded,
4 I/O failure.  SGLAB_OUT_DIR sets the default output directory.
"""
from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import decoherence, experiment
from .reports import RunReport, emit_report
from .sampling import split
from .tensor import DimensionCapError, qubits, PureState
from .observables import PAULI

PIPELINES = ("local", "joint", "condition", "ordinary", "blindness", "absorbing", "sweep")
FORMATS = ("json-lines", "csv")

OUT_DIR_ENV = "SGLAB_OUT_DIR"


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass
class ExperimentConfig:
    pipeline: str
    alpha_re: float = 1.0 / np.sqrt(2)
    alpha_im: float = 0.0
    beta_re: float = 1.0 / np.sqrt(2)
    beta_im: float = 0.0
    basis: str = "Z"
    observables: list[str] = field(default_factory=lambda: ["IZZ", "ZZI", "XXX"])
    shots: int = 1000
    d: list[int] = field(default_factory=lambda: [3])
    env_model: str = "haar"
    weights: str = "uniform"
    mixture: bool = False
    trials: int = 100
    seed: int | None = None
    out: str | None = None
    format: str = "json-lines"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.pipeline not in PIPELINES:
            raise ConfigError(f"unknown pipeline {self.pipeline!r}")
        if abs(self.alpha_re**2 + self.alpha_im**2
               + self.beta_re**2 + self.beta_im**2 - 1.0) > 1e-12:
            raise ConfigError("prep amplitudes must satisfy |alpha|^2 + |beta|^2 = 1")
        if self.basis not in ("Z", "X"):
            raise ConfigError("basis must be Z or X")
        unknown = set(self.observables) - set(experiment.JOINT_OBSERVABLES)
        if unknown:
            raise ConfigError(f"unknown joint observables {sorted(unknown)}")
        if self.shots < 1:
            raise ConfigError("shots must be >= 1")
        if not self.d or any(int(x) < 1 for x in self.d):
            raise ConfigError("every d must be >= 1")
        if self.env_model not in decoherence.ENV_MODELS:
            raise ConfigError(f"env-model must be one of {decoherence.ENV_MODELS}")
        if self.weights not in decoherence.WEIGHT_MODELS:
            raise ConfigError(f"weights must be one of {decoherence.WEIGHT_MODELS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        self.observables = [str(o) for o in self.observables]
        self.d = [int(x) for x in self.d]
        self.shots = int(self.shots)
        self.trials = int(self.trials)
        if self.seed is not None:
            self.seed = int(self.seed)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        if "pipeline" not in data:
            raise ConfigError("config must name a pipeline")
        return cls(**data)

    def to_dict(self) -> dict:
        return {
            "pipeline": self.pipeline,
            "alpha_re": float(self.alpha_re), "alpha_im": float(self.alpha_im),
            "beta_re": float(self.beta_re), "beta_im": float(self.beta_im),
            "basis": self.basis, "observables": list(self.observables),
            "shots": int(self.shots), "d": list(self.d),
            "env_model": self.env_model, "weights": self.weights,
            "mixture": bool(self.mixture), "trials": int(self.trials),
            "seed": self.seed, "out": self.out, "format": self.format,
        }

    def prep(self) -> experiment.SpinPrep:
        return experiment.SpinPrep(complex(self.alpha_re, self.alpha_im),
                                   complex(self.beta_re, self.beta_im))


def _bell_target(sign: int) -> PureState:
    amps = np.zeros(4, dtype=complex)
    amps[0b10] = 1 / np.sqrt(2)
    amps[0b01] = sign / np.sqrt(2)
    return PureState(qubits("a_up", "a_dn"), amps)


def _run_condition(config: ExperimentConfig, seed: int) -> RunReport:
    rows = []
    for outcome in (+1, -1):
        conditional = experiment.condition_on_spin_x(config.prep(), outcome)
        target = _bell_target(outcome)
        zz = np.real(np.vdot(conditional.amplitudes,
                             np.kron(PAULI["Z"], PAULI["Z"]) @ conditional.amplitudes))
        rows.append({
            "spin_x_outcome": outcome,
            "amplitudes": [complex(a) for a in conditional.amplitudes],
            "bell_fidelity": float(conditional.fidelity(target)),
            "zz_anticorrelation": float(zz),
        })
    summary = {"bell_fidelities": [r["bell_fidelity"] for r in rows]}
    return RunReport("condition", {}, seed, rows, summary)


def _run_ordinary(config: ExperimentConfig, seed: int) -> RunReport:
    stage = experiment.ordinary_premeasurement(config.prep())
    state = stage.state

    def word_exp(word):
        from .observables import PauliString, apply_pauli
        obs = PauliString.from_word(word, state.register)
        return float(np.real(np.vdot(state.amplitudes, apply_pauli(state, obs).amplitudes)))

    rows = [{
        "stage": stage.stage,
        "z_pup_z_pdn": word_exp("IZZ"),
        "z_s_z_pup": word_exp("ZZI"),
        "z_s_z_pdn": word_exp("ZIZ"),
    }]
    return RunReport("ordinary", {}, seed, rows, dict(rows[0]))


def _sample_detectors(config: ExperimentConfig, seed: int, mode: str):
    d = config.d[0]
    up_rng, dn_rng = split(seed, 2)
    det_up = decoherence.DetectorModel.sample(
        d, up_rng, config.env_model, config.weights, mode=mode, label="D_up")
    det_dn = decoherence.DetectorModel.sample(
        d, dn_rng, config.env_model, config.weights, mode=mode, label="D_dn")
    return det_up, det_dn


def _run_blindness(config: ExperimentConfig, seed: int, mode: str) -> RunReport:
    det_up, det_dn = _sample_detectors(config, seed, mode)
    if mode == "absorbing":
        row = decoherence.absorbing_variant(config.prep(), det_up, det_dn)
    else:
        row = decoherence.blindness_contrast(config.prep(), det_up, det_dn, seed=seed)
    summary = {
        "demon_analytic": row["demon_analytic"],
        "readout_only_analytic": row["readout_only_analytic"],
    }
    pipeline = "absorbing" if mode == "absorbing" else "blindness"
    return RunReport(pipeline, {}, seed, [row], summary)


def _run_sweep(config: ExperimentConfig, seed: int) -> RunReport:
    rows, summary = decoherence.sweep_suppression(
        config.prep(), config.d, config.trials, seed,
        env_model=config.env_model, weights_model=config.weights)
    return RunReport("sweep", {}, seed, rows, summary)


def run(config: ExperimentConfig) -> str:
    """Execute one pipeline and write its report; returns the output path."""
    seed = config.seed if config.seed is not None else secrets.randbits(63)
    config.seed = int(seed)
    pipeline = config.pipeline
    if pipeline == "local":
        report = experiment.run_local_mode(config.prep(), config.basis,
                                           config.shots, seed, mixture=config.mixture)
    elif pipeline == "joint":
        report = experiment.run_joint_mode(config.prep(), config.observables, seed)
    elif pipeline == "condition":
        report = _run_condition(config, seed)
    elif pipeline == "ordinary":
        report = _run_ordinary(config, seed)
    elif pipeline == "blindness":
        report = _run_blindness(config, seed, "transmitting")
    elif pipeline == "absorbing":
        report = _run_blindness(config, seed, "absorbing")
    elif pipeline == "sweep":
        report = _run_sweep(config, seed)
    else:  # pragma: no cover - validate() already rejected it
        raise ConfigError(f"unknown pipeline {pipeline!r}")

    if config.out is None:
        ext = "jsonl" if config.format == "json-lines" else "csv"
        out_dir = os.environ.get(OUT_DIR_ENV, ".")
        config.out = os.path.join(out_dir, f"{pipeline}.{ext}")
    report.config = config.to_dict()
    emit_report(report, config.out, config.format)
    return config.out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sglab",
        description="Ancilla-aided Stern-Gerlach measurement laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run one experiment pipeline")
    run_p.add_argument("pipeline", choices=PIPELINES)
    run_p.add_argument("--config", help="JSON config file; flags override its values")
    run_p.add_argument("--alpha-re", type=float, dest="alpha_re")
    run_p.add_argument("--alpha-im", type=float, dest="alpha_im")
    run_p.add_argument("--beta-re", type=float, dest="beta_re")
    run_p.add_argument("--beta-im", type=float, dest="beta_im")
    run_p.add_argument("--basis", choices=("Z", "X"))
    run_p.add_argument("--observables", help="comma-separated, e.g. IZZ,ZZI,XXX")
    run_p.add_argument("--shots", type=int)
    run_p.add_argument("--d", help="comma-separated environment dimensions")
    run_p.add_argument("--env-model", choices=decoherence.ENV_MODELS, dest="env_model")
    run_p.add_argument("--weights", choices=decoherence.WEIGHT_MODELS)
    run_p.add_argument("--mixture", action="store_const", const=True, default=None,
                       help="replace t4 by the classical branch mixture (local mode)")
    run_p.add_argument("--trials", type=int)
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--out")
    run_p.add_argument("--format", choices=FORMATS)
    return parser


def _merge_config(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        data.update(loaded)
    data["pipeline"] = args.pipeline
    overrides = {
        name: getattr(args, name)
        for name in ("alpha_re", "alpha_im", "beta_re", "beta_im", "basis",
                     "shots", "env_model", "weights", "mixture", "trials",
                     "seed", "out", "format")
        if getattr(args, name) is not None
    }
    if args.observables is not None:
        overrides["observables"] = [w.strip() for w in args.observables.split(",") if w.strip()]
    if args.d is not None:
        try:
            overrides["d"] = [int(w) for w in args.d.split(",") if w.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --d list: {exc}") from exc
    data.update(overrides)
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _merge_config(args)
        path = run(config)
    except (ConfigError, ValueError) as exc:
        print(f"sglab: config error: {exc}", file=sys.stderr)
        return 2
    except DimensionCapError as exc:
        print(f"sglab: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"sglab: i/o error: {exc}", file=sys.stderr)
        return 4
    print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

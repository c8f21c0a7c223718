"""Batch experiment runner: executes the classical / quantum / kernel
tracks over seeds, computes accuracies against held-out target labels, and
records quantum-vs-classical parity rows.

Exit-code policy (enforced by the CLI): infrastructure failures are hard
errors; parity disagreements are data, recorded with pass flags.
"""
from __future__ import annotations

import dataclasses
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import classical_sa as csa
from . import quantum_sa as qsa
from .datasets import Domain, DomainShift, SynthSpec, center_columns, load_csv
from .errors import ConfigurationError, SubalignError
from .quantum_core import ShotPlan

SCHEMA_VERSION = 1
ENV_PREFIX = "SUBALIGN_"

__all__ = [
    "ExperimentConfig",
    "RunReport",
    "run",
    "compare_tracks",
    "load_config",
    "parse_config_text",
]


@dataclass
class ExperimentConfig:
    dataset: SynthSpec | None = field(default_factory=SynthSpec)
    source_csv: str | None = None
    target_csv: str | None = None
    label_column: int | None = None
    d: int = 1
    track: str = "classical"
    classifier: str = "nn"
    kernel: csa.KernelSpec | None = None
    precision_qubits: int = 8
    ae_bits: int = 7
    shots: int = 1024
    repeats: int = 15
    exact_theta: bool = True
    precision_sweep: tuple[int, ...] = ()
    gamma: float = 1.0
    seeds: tuple[int, ...] = (0,)
    output_dir: str = "runs"
    workers: int = 1

    def validate(self) -> None:
        if not self.seeds:
            raise ConfigurationError("seeds: at least one seed required")
        if self.d < 1:
            raise ConfigurationError("d: must be >= 1")
        if self.track not in ("classical", "quantum", "both"):
            raise ConfigurationError(f"track: unknown value {self.track!r}")
        if self.classifier not in ("nn", "svm", "both"):
            raise ConfigurationError(f"classifier: unknown value {self.classifier!r}")
        if not 1 <= self.precision_qubits <= 12:
            raise ConfigurationError("quantum.precision_qubits: must be in 1..12")
        if not 1 <= self.ae_bits <= 10:
            raise ConfigurationError("quantum.ae_bits: must be in 1..10")
        if self.shots < 1 or self.repeats < 1 or self.workers < 1:
            raise ConfigurationError("shots, repeats, workers must be >= 1")
        if self.gamma <= 0:
            raise ConfigurationError("gamma: must be > 0")
        if self.dataset is None and (self.source_csv is None or self.target_csv is None):
            raise ConfigurationError("dataset: need a synth spec or both CSV paths")
        if self.dataset is not None:
            self.dataset.validate()
            if self.d > self.dataset.D:
                raise ConfigurationError(
                    f"d: {self.d} exceeds the feature dimension D={self.dataset.D}"
                )
        if any(not 1 <= p <= 12 for p in self.precision_sweep):
            raise ConfigurationError("quantum.precision_sweep: values must be in 1..12")

    def echo(self) -> dict:
        doc = dataclasses.asdict(self)
        if self.dataset is not None:
            doc["dataset"] = dataclasses.asdict(self.dataset)
        if self.kernel is not None:
            doc["kernel"] = dataclasses.asdict(self.kernel)
        return doc


@dataclass
class RunReport:
    schema_version: int
    config: dict
    accuracy: list[dict]
    parity: list[dict]
    sweep: list[dict]
    timings: list[dict]

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2)

    @classmethod
    def from_json(cls, doc: str) -> "RunReport":
        return cls(**json.loads(doc))


# ---------------------------------------------------------------------------
# config parsing


_KEY_MAP = {
    "dataset.D": ("dataset", "D", int),
    "dataset.n_s": ("dataset", "n_s", int),
    "dataset.n_t": ("dataset", "n_t", int),
    "dataset.classes": ("dataset", "class_count", int),
    "dataset.separation": ("dataset", "class_separation", float),
    "dataset.noise_sigma": ("dataset", "noise_sigma", float),
    "dataset.rotation": ("shift", "rotation_angle", float),
    "dataset.translation": ("shift", "translation", float),
    "dataset.scale": ("shift", "scale", float),
    "dataset.source_csv": (None, "source_csv", str),
    "dataset.target_csv": (None, "target_csv", str),
    "dataset.label_column": (None, "label_column", int),
    "d": (None, "d", int),
    "track": (None, "track", str),
    "classifier": (None, "classifier", str),
    "gamma": (None, "gamma", float),
    "kernel.kind": ("kernel", "kind", str),
    "kernel.degree": ("kernel", "degree", int),
    "quantum.precision_qubits": (None, "precision_qubits", int),
    "quantum.ae_bits": (None, "ae_bits", int),
    "quantum.shots": (None, "shots", int),
    "quantum.repeats": (None, "repeats", int),
    "quantum.exact_theta": (None, "exact_theta", None),
    "quantum.precision_sweep": (None, "precision_sweep", None),
    "seeds": (None, "seeds", None),
    "output_dir": (None, "output_dir", str),
    "workers": (None, "workers", int),
}


def _parse_bool(v: str) -> bool:
    if v.lower() in ("1", "true", "yes", "on"):
        return True
    if v.lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"cannot parse boolean value {v!r}")


def parse_config_text(text: str, environ: dict | None = None) -> ExperimentConfig:
    """Parse the flat dotted-key config format, then apply SUBALIGN_*
    environment overrides (dots become underscores, case-insensitive)."""
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line {lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        pairs[key] = value
    environ = os.environ if environ is None else environ
    for key in _KEY_MAP:
        env_name = ENV_PREFIX + key.upper().replace(".", "_")
        if env_name in environ:
            pairs[key] = environ[env_name]
    return _build_config(pairs)


def _build_config(pairs: dict[str, str]) -> ExperimentConfig:
    cfg_kwargs: dict = {}
    ds_kwargs: dict = {}
    shift_kwargs: dict = {}
    kernel_kwargs: dict = {}
    for key, value in pairs.items():
        if key not in _KEY_MAP:
            raise ConfigurationError(f"unknown config key {key!r}")
        group, name, conv = _KEY_MAP[key]
        if key == "seeds":
            cfg_kwargs["seeds"] = tuple(int(s) for s in value.split(",") if s.strip())
        elif key == "quantum.precision_sweep":
            cfg_kwargs["precision_sweep"] = tuple(
                int(s) for s in value.split(",") if s.strip()
            )
        elif key == "quantum.exact_theta":
            cfg_kwargs["exact_theta"] = _parse_bool(value)
        elif group == "dataset":
            ds_kwargs[name] = conv(value)
        elif group == "shift":
            shift_kwargs[name] = conv(value)
        elif group == "kernel":
            kernel_kwargs[name] = conv(value)
        else:
            cfg_kwargs[name] = conv(value)
    if cfg_kwargs.get("source_csv"):
        cfg_kwargs["dataset"] = None
    else:
        spec = SynthSpec(**ds_kwargs) if ds_kwargs or not shift_kwargs else SynthSpec()
        if shift_kwargs:
            spec = replace(spec, domain_shift=DomainShift(**shift_kwargs))
        cfg_kwargs["dataset"] = spec
    if kernel_kwargs:
        cfg_kwargs["kernel"] = csa.KernelSpec(**kernel_kwargs)
    cfg = ExperimentConfig(**cfg_kwargs)
    cfg.validate()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# execution


def _load_pair(config: ExperimentConfig, seed: int) -> tuple[Domain, Domain]:
    if config.dataset is not None:
        from .datasets import synth_shifted_gaussians

        return synth_shifted_gaussians(replace(config.dataset, seed=seed))
    source = load_csv(config.source_csv, config.label_column)
    target = load_csv(config.target_csv, config.label_column)
    target.labels_hidden = True
    return source, target


def _accuracy(pred: np.ndarray, target: Domain) -> float:
    if target.labels is None:  # unlabeled CSV target: accuracy unknowable
        return float("nan")
    truth = target.hidden_labels()
    return float(np.mean(pred == truth))


def _parity_row(quantity, classical_val, quantum_val, abs_err, tol):
    rel = abs_err / max(abs(classical_val), 1e-300)
    return {
        "quantity": quantity,
        "classical": float(classical_val),
        "quantum": float(quantum_val),
        "abs_err": float(abs_err),
        "rel_err": float(rel),
        "tolerance": float(tol),
        "pass": bool(abs_err <= tol),
    }


def _run_seed(config: ExperimentConfig, seed: int) -> dict:
    t_start = time.perf_counter()
    source, target = _load_pair(config, seed)
    source_c, _ = center_columns(source)
    target_c, _ = center_columns(target)
    accuracy, parity, timings, trace = [], [], [], []

    t0 = time.perf_counter()
    Ps = csa.pca_subspace(source_c, config.d)
    Pt = csa.pca_subspace(target_c, config.d)
    art = csa.build_alignment(Ps, Pt, source_c, target_c)
    timings.append({"seed": seed, "stage": "classical_align", "seconds": time.perf_counter() - t0})

    ys = source_c.visible_labels
    want_nn = config.classifier in ("nn", "both")
    want_svm = config.classifier in ("svm", "both")
    nn_pred = svm_model = None
    if config.track in ("classical", "both"):
        t0 = time.perf_counter()
        if want_nn:
            nn_pred = csa.nn_classify(art.X_hat_a, ys, art.X_hat_t)
            accuracy.append(
                {"seed": seed, "track": "classical", "classifier": "nn",
                 "accuracy": _accuracy(nn_pred, target_c)}
            )
        if want_svm:
            svm_model = csa.svm_train(source_c, art.A, config.gamma)
            pred = np.array(
                [csa.svm_classify(svm_model, target_c.samples[:, j]) for j in range(target_c.n)]
            )
            accuracy.append(
                {"seed": seed, "track": "classical", "classifier": "svm",
                 "accuracy": _accuracy(pred, target_c)}
            )
        timings.append({"seed": seed, "stage": "classical_classify", "seconds": time.perf_counter() - t0})

    if config.kernel is not None:
        t0 = time.perf_counter()
        fit = csa.kernel_sa_fit(source, target, config.kernel, config.d)
        pred = csa.nn_classify(fit.Z_a, ys, fit.Z_t)
        accuracy.append(
            {"seed": seed, "track": "kernel", "classifier": "nn",
             "accuracy": _accuracy(pred, target_c)}
        )
        timings.append({"seed": seed, "stage": "kernel_track", "seconds": time.perf_counter() - t0})

    if config.track in ("quantum", "both"):
        if source_c.dim > qsa.QPCA_MAX_DIM:
            raise ConfigurationError(
                f"quantum caps exceeded: D={source_c.dim} > {qsa.QPCA_MAX_DIM}; use a smaller D"
            )
        if want_svm and source_c.n + 1 > qsa.QSVM_MAX_ROWS:
            raise ConfigurationError(
                f"quantum caps exceeded: n_s={source_c.n} too large for the "
                f"inversion register; use n_s <= {qsa.QSVM_MAX_ROWS - 1}"
            )
        if want_nn and source_c.n > 64:
            raise ConfigurationError("quantum caps exceeded: n_s > 64 for the NN track")
        t0 = time.perf_counter()
        q_Ps = qsa.qpca(source_c, config.d, config.precision_qubits).basis
        q_Pt = qsa.qpca(target_c, config.d, config.precision_qubits).basis
        chain = qsa.q_build_alignment(
            q_Ps, q_Pt, source_c, target_c,
            precision_qubits=config.precision_qubits,
            exact_theta=config.exact_theta,
        )
        timings.append({"seed": seed, "stage": "quantum_align", "seconds": time.perf_counter() - t0})
        classical_ref = {
            "M": art.M_star,
            "X_hat_s": Ps.P.T @ source_c.samples,
            "X_hat_a": art.X_hat_a,
            "X_hat_t": art.X_hat_t,
        }
        for stage in ("M", "X_hat_s", "X_hat_a", "X_hat_t"):
            ips = chain[f"{stage}_state"]
            trace.append({
                "seed": seed,
                "stage": stage,
                "registers": [list(r) for r in ips.state.layout.registers],
                "success_probability": float(ips.success_probability),
                "scale": float(ips.scale),
                "max_deviation": float(np.max(np.abs(ips.as_matrix() - classical_ref[stage]))),
            })
        # entrywise tolerance: exact-theta mode is limited by float error,
        # finite precision by the 2^(1-n) overlap lattice times the scales
        eps = 1e-6 if config.exact_theta else 2.0 ** (1 - config.precision_qubits)
        m_err = np.max(np.abs(chain["M_star"] - art.M_star))
        parity.append(_parity_row(
            f"seed{seed}.M_star", np.max(np.abs(art.M_star)), np.max(np.abs(chain["M_star"])),
            m_err, eps,
        ))
        scale_a = max(1.0, float(np.max(np.abs(art.X_hat_a))))
        a_err = np.max(np.abs(chain["X_hat_a"] - art.X_hat_a))
        parity.append(_parity_row(
            f"seed{seed}.X_hat_a", np.max(np.abs(art.X_hat_a)), np.max(np.abs(chain["X_hat_a"])),
            a_err, eps * 3 * scale_a,
        ))
        plan = ShotPlan(
            shots=config.shots, seed=seed,
            mode="exact_expectation" if config.exact_theta else "sampled",
        )
        t0 = time.perf_counter()
        if want_nn and nn_pred is not None:
            q_pred, _diag = qsa.q_nn_classify(
                chain["X_hat_a"], ys, chain["X_hat_t"], plan,
                ae_bits=config.ae_bits, repeats=config.repeats,
            )
            agree = float(np.mean(q_pred == nn_pred))
            # exact mode can still disagree when the AE lattice ties two
            # distances, so allow a couple of flips; sampled mode gets more
            parity.append(_parity_row(
                f"seed{seed}.nn_labels", 1.0, agree, 1.0 - agree,
                0.02 if config.exact_theta else 0.05,
            ))
            accuracy.append(
                {"seed": seed, "track": "quantum", "classifier": "nn",
                 "accuracy": _accuracy(q_pred, target_c)}
            )
        if want_svm and svm_model is not None:
            q_model = qsa.q_svm_train(source_c, art.A, config.gamma,
                                      precision_qubits=max(config.precision_qubits, 10))
            q_pred = np.array([
                qsa.q_svm_classify(q_model, source_c, art.A, target_c.samples[:, j], plan)[0]
                for j in range(target_c.n)
            ])
            c_pred = np.array(
                [csa.svm_classify(svm_model, target_c.samples[:, j]) for j in range(target_c.n)]
            )
            agree = float(np.mean(q_pred == c_pred))
            parity.append(_parity_row(
                f"seed{seed}.svm_labels", 1.0, agree, 1.0 - agree,
                0.02 if config.exact_theta else 0.05,
            ))
            accuracy.append(
                {"seed": seed, "track": "quantum", "classifier": "svm",
                 "accuracy": _accuracy(q_pred, target_c)}
            )
        timings.append({"seed": seed, "stage": "quantum_classify", "seconds": time.perf_counter() - t0})

    sweep = []
    for prec in config.precision_sweep:
        q_Ps = qsa.qpca(source_c, config.d, prec).basis
        err = float(np.linalg.norm(q_Ps.P @ q_Ps.P.T - Ps.P @ Ps.P.T))
        sweep.append({"seed": seed, "precision_qubits": prec, "projector_error": err})

    timings.append({"seed": seed, "stage": "total", "seconds": time.perf_counter() - t_start})
    return {"accuracy": accuracy, "parity": parity, "sweep": sweep,
            "timings": timings, "trace": trace}


def run(config: ExperimentConfig) -> RunReport:
    """Execute the configured tracks over every seed and write the report
    files (JSON report plus accuracy/parity CSV tables) to output_dir."""
    config.validate()
    seeds = list(config.seeds)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(lambda s: _run_seed(config, s), seeds))
    else:
        results = [_run_seed(config, s) for s in seeds]
    # merge deterministically in seed order (map already preserves it)
    report = RunReport(
        schema_version=SCHEMA_VERSION,
        config=config.echo(),
        accuracy=[row for r in results for row in r["accuracy"]],
        parity=[row for r in results for row in r["parity"]],
        sweep=[row for r in results for row in r["sweep"]],
        timings=[row for r in results for row in r["timings"]],
    )
    trace_rows = [row for r in results for row in r["trace"]]
    _write_outputs(config, report, trace_rows)
    return report


def _write_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(str(row[c]) for c in columns) + "\n")


def _write_outputs(
    config: ExperimentConfig, report: RunReport, trace_rows: list[dict] | None = None
) -> None:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"report_v{SCHEMA_VERSION}.json").write_text(report.to_json(), encoding="utf-8")
    if trace_rows:
        with open(out / f"trace_v{SCHEMA_VERSION}.jsonl", "w", encoding="utf-8") as fh:
            for row in trace_rows:
                fh.write(json.dumps(row) + "\n")
    _write_csv(
        out / f"accuracy_v{SCHEMA_VERSION}.csv",
        report.accuracy,
        ["seed", "track", "classifier", "accuracy"],
    )
    _write_csv(
        out / f"parity_v{SCHEMA_VERSION}.csv",
        report.parity,
        ["quantity", "classical", "quantum", "abs_err", "rel_err", "tolerance", "pass"],
    )
    if report.sweep:
        _write_csv(
            out / f"sweep_v{SCHEMA_VERSION}.csv",
            report.sweep,
            ["seed", "precision_qubits", "projector_error"],
        )


def compare_tracks(report: RunReport) -> list[dict]:
    """Summarize a both-track report: per-quantity max error, label
    agreement, and precision-sweep sensitivity rows when present."""
    tracks = {row["track"] for row in report.accuracy}
    if not {"classical", "quantum"} <= tracks:
        raise SubalignError("report does not contain both tracks; run with track=both")
    if not report.parity:
        raise SubalignError("report has an empty parity section")
    rows = []
    by_quantity: dict[str, list[dict]] = {}
    for rec in report.parity:
        name = rec["quantity"].split(".", 1)[-1]
        by_quantity.setdefault(name, []).append(rec)
    for name, recs in sorted(by_quantity.items()):
        if name.endswith("labels"):
            rows.append({
                "quantity": name, "kind": "agreement",
                "value": float(np.mean([r["quantum"] for r in recs])),
                "all_pass": all(r["pass"] for r in recs),
            })
        else:
            rows.append({
                "quantity": name, "kind": "max_abs_err",
                "value": float(np.max([r["abs_err"] for r in recs])),
                "all_pass": all(r["pass"] for r in recs),
            })
    if report.sweep:
        precisions = sorted({r["precision_qubits"] for r in report.sweep})
        for prec in precisions:
            errs = [r["projector_error"] for r in report.sweep if r["precision_qubits"] == prec]
            rows.append({
                "quantity": f"qpca_projector_error@n={prec}", "kind": "median",
                "value": float(np.median(errs)), "all_pass": True,
            })
    return rows

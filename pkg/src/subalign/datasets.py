"""Source/target domain data: synthesis, CSV I/O, centering.

Internally samples are stored column-wise (a D x n matrix, one column per
point). CSV files are row-wise (one row per sample), matching the common
convention; `load_csv`/`save_csv` transpose accordingly.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, ParseError

__all__ = [
    "Domain",
    "DomainShift",
    "SynthSpec",
    "synth_shifted_gaussians",
    "load_csv",
    "save_csv",
    "center_columns",
]


@dataclass
class Domain:
    """A dataset with optional labels.

    ``samples`` is D x n with columns as points. When ``labels_hidden`` is
    set (synthetic target domains), adaptation code must not look at the
    labels; evaluation code reads them through `hidden_labels`.
    """

    samples: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""
    labels_hidden: bool = False

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2:
            raise ConfigurationError("samples must be a 2-d matrix")
        if not np.all(np.isfinite(self.samples)):
            raise ConfigurationError("samples contain NaN/Inf entries")
        D, n = self.samples.shape
        if D < 1 or n < 2:
            raise ConfigurationError(f"need D >= 1 and n >= 2, got D={D}, n={n}")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int)
            if self.labels.shape != (n,):
                raise ConfigurationError(
                    f"labels length {self.labels.shape} does not match n={n}"
                )

    @property
    def dim(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def visible_labels(self) -> np.ndarray | None:
        """Labels as adaptation code may see them (None when hidden)."""
        if self.labels_hidden:
            return None
        return self.labels

    def hidden_labels(self) -> np.ndarray:
        """Evaluation-only accessor for withheld labels."""
        if self.labels is None:
            raise ConfigurationError(f"domain {self.name!r} carries no labels")
        return self.labels


@dataclass(frozen=True)
class DomainShift:
    """Transformation applied to the target draw: rotate the first two
    coordinates, then scale, then translate."""

    rotation_angle: float = 0.0
    translation: tuple[float, ...] | float = 0.0
    scale: float = 1.0

    def apply(self, X: np.ndarray) -> np.ndarray:
        D = X.shape[0]
        out = X.copy()
        if D >= 2 and self.rotation_angle != 0.0:
            c, s = math.cos(self.rotation_angle), math.sin(self.rotation_angle)
            top = out[:2].copy()
            out[0] = c * top[0] - s * top[1]
            out[1] = s * top[0] + c * top[1]
        out *= self.scale
        t = np.asarray(self.translation, dtype=float)
        if t.ndim == 0:
            t = np.full(D, float(t))
        if t.shape != (D,):
            raise ConfigurationError(f"translation length {t.shape} != D={D}")
        return out + t[:, None]

    def invert(self, X: np.ndarray) -> np.ndarray:
        D = X.shape[0]
        t = np.asarray(self.translation, dtype=float)
        if t.ndim == 0:
            t = np.full(D, float(t))
        out = (X - t[:, None]) / self.scale
        if D >= 2 and self.rotation_angle != 0.0:
            c, s = math.cos(-self.rotation_angle), math.sin(-self.rotation_angle)
            top = out[:2].copy()
            out[0] = c * top[0] - s * top[1]
            out[1] = s * top[0] + c * top[1]
        return out


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for the shifted-Gaussians generator."""

    D: int = 2
    n_s: int = 40
    n_t: int = 40
    class_count: int = 2
    class_separation: float = 4.0
    domain_shift: DomainShift = field(default_factory=DomainShift)
    noise_sigma: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.D < 1 or self.n_s < 2 or self.n_t < 2 or self.class_count < 1:
            raise ConfigurationError(
                f"invalid synth dimensions: D={self.D}, n_s={self.n_s}, "
                f"n_t={self.n_t}, classes={self.class_count}"
            )
        if self.noise_sigma < 0:
            raise ConfigurationError("noise_sigma must be >= 0")
        if not 0.0 <= self.domain_shift.rotation_angle < 2 * math.pi:
            raise ConfigurationError("rotation_angle must lie in [0, 2*pi)")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")


def _class_means(spec: SynthSpec) -> np.ndarray:
    # Classes separated along axis 1, adjacent means class_separation apart.
    means = np.zeros((spec.D, spec.class_count))
    offsets = (np.arange(spec.class_count) - (spec.class_count - 1) / 2.0)
    means[0] = offsets * spec.class_separation
    return means


def _class_labels(spec: SynthSpec) -> np.ndarray:
    if spec.class_count == 2:
        return np.array([-1, 1])
    return np.arange(spec.class_count)


def _draw(spec: SynthSpec, rng: np.random.Generator, n: int):
    means = _class_means(spec)
    label_values = _class_labels(spec)
    classes = rng.integers(0, spec.class_count, size=n)
    X = means[:, classes] + spec.noise_sigma * rng.standard_normal((spec.D, n))
    return X, label_values[classes]


def synth_shifted_gaussians(spec: SynthSpec) -> tuple[Domain, Domain]:
    """Draw a labelled source domain and a shifted target domain.

    Both domains come from the same Gaussian-cluster process; the target
    draw is additionally transformed by ``spec.domain_shift``. Target labels
    are retained but hidden. Deterministic under a fixed seed.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    Xs, ys = _draw(spec, rng, spec.n_s)
    Xt, yt = _draw(spec, rng, spec.n_t)
    Xt = spec.domain_shift.apply(Xt)
    source = Domain(Xs, ys, name="source")
    target = Domain(Xt, yt, name="target", labels_hidden=True)
    return source, target


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def load_csv(path: str, label_column: int | None = None) -> Domain:
    """Load a domain from CSV (rows = samples, optional header row).

    ``label_column`` is a 1-based column index holding integer labels.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ParseError(f"{path}: empty file")
    start = 0
    if not all(_is_number(c) for c in rows[0]):
        start = 1  # header row
    width = len(rows[start]) if start < len(rows) else 0
    data, labels = [], []
    for ridx, row in enumerate(rows[start:], start=start + 1):
        if len(row) != width:
            raise ParseError(f"{path}: ragged row {ridx} (expected {width} cells)")
        vals = []
        for cidx, cell in enumerate(row, start=1):
            if not _is_number(cell):
                raise ParseError(f"{path}: non-numeric cell {cell!r} in row {ridx}")
            vals.append(float(cell))
        if label_column is not None:
            labels.append(int(vals[label_column - 1]))
            del vals[label_column - 1]
        data.append(vals)
    samples = np.array(data, dtype=float).T
    return Domain(samples, np.array(labels, dtype=int) if label_column else None)


def save_csv(domain: Domain, path: str, header: bool = False) -> None:
    """Write a domain to CSV, mirroring the `load_csv` layout."""
    X = domain.samples
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if header:
            cols = [f"f{m}" for m in range(X.shape[0])]
            if domain.labels is not None:
                cols.append("label")
            writer.writerow(cols)
        for j in range(X.shape[1]):
            row = [repr(float(v)) for v in X[:, j]]
            if domain.labels is not None:
                row.append(str(int(domain.labels[j])))
            writer.writerow(row)


def center_columns(domain: Domain) -> tuple[Domain, np.ndarray]:
    """Remove the per-feature mean; returns the centered domain and the mean
    vector for reuse on query points."""
    mean = domain.samples.mean(axis=1)
    centered = replace(domain, samples=domain.samples - mean[:, None])
    return centered, mean

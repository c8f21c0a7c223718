"""Classical subspace alignment: PCA bases, the closed-form alignment
matrix M* = Ps^T Pt, cross-domain similarity, 1-NN and least-squares SVM
classifiers, and the kernelized variant.

This module is the oracle track the quantum pipeline is verified against.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .datasets import Domain, center_columns
from .errors import (
    ConfigurationError,
    IllConditionedError,
    RankDeficiencyError,
    ShapeError,
)

__all__ = [
    "SubspaceBasis",
    "AlignmentArtifacts",
    "KernelSpec",
    "SvmModel",
    "KernelAlignment",
    "pca_subspace",
    "alignment_matrix",
    "build_alignment",
    "similarity",
    "nn_classify",
    "svm_train",
    "svm_classify",
    "kernel_matrix",
    "kernel_pca_weights",
    "kernel_alignment",
    "kernel_sa_fit",
]

DEGENERACY_GAP = 1e-12


def _as_matrix(X) -> np.ndarray:
    return X.samples if isinstance(X, Domain) else np.asarray(X, dtype=float)


def _fix_signs(V: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of every column positive (first such
    entry wins on ties), so eigenvector signs are deterministic."""
    V = V.copy()
    for k in range(V.shape[1]):
        lead = np.argmax(np.abs(V[:, k]))
        if V[lead, k] < 0:
            V[:, k] = -V[:, k]
    return V


@dataclass
class SubspaceBasis:
    """Top-d principal directions (orthonormal columns) with eigenvalues."""

    P: np.ndarray
    eigenvalues: np.ndarray
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float)
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        d = self.P.shape[1]
        if self.eigenvalues.shape != (d,):
            raise ShapeError("eigenvalue count must equal basis column count")
        if np.max(np.abs(self.P.T @ self.P - np.eye(d))) > 1e-10:
            raise ShapeError("basis columns are not orthonormal")
        if np.any(np.diff(self.eigenvalues) > 1e-10) or np.any(
            self.eigenvalues < -1e-12
        ):
            raise ConfigurationError("eigenvalues must be descending and >= 0")

    @property
    def d(self) -> int:
        return self.P.shape[1]


@dataclass
class AlignmentArtifacts:
    """Everything the alignment step produces: M*, the aligned basis P_a,
    the target aligned matrix A, and both projected datasets."""

    M_star: np.ndarray
    P_a: np.ndarray
    A: np.ndarray
    X_hat_a: np.ndarray
    X_hat_t: np.ndarray

    def __post_init__(self):
        if np.linalg.norm(self.M_star, 2) > 1 + 1e-10:
            raise ConfigurationError("spectral norm of M* exceeds 1")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel selector: linear | polynomial(degree) | cosine | hard."""

    kind: str = "linear"
    degree: int = 1

    def __post_init__(self):
        if self.kind not in ("linear", "polynomial", "cosine", "hard"):
            raise ConfigurationError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "polynomial" and self.degree < 1:
            raise ConfigurationError("polynomial degree must be >= 1")


def pca_subspace(X, d: int) -> SubspaceBasis:
    """Top-d eigenvectors of X X^T (X must be centered).

    A degenerate-subspace warning is attached when the eigenvalue gap at the
    cut is below 1e-12.
    """
    M = _as_matrix(X)
    D, n = M.shape
    if not 1 <= d <= min(D, n):
        raise ConfigurationError(f"d={d} out of range for D={D}, n={n}")
    w, V = np.linalg.eigh(M @ M.T)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    warnings = []
    if d < D and w[d - 1] - w[d] < DEGENERACY_GAP:
        warnings.append(
            f"degenerate subspace: eigenvalue gap {w[d - 1] - w[d]:.3e} at cut d={d}"
        )
    P = _fix_signs(V[:, :d])
    return SubspaceBasis(P, np.maximum(w[:d], 0.0), warnings)


def alignment_matrix(Ps: SubspaceBasis, Pt: SubspaceBasis) -> np.ndarray:
    """The closed-form minimizer of ||Ps M - Pt||_F, namely Ps^T Pt."""
    if Ps.d != Pt.d:
        raise ShapeError(f"subspace dimensions differ: {Ps.d} vs {Pt.d}")
    return Ps.P.T @ Pt.P


def build_alignment(Ps: SubspaceBasis, Pt: SubspaceBasis, Xs, Xt) -> AlignmentArtifacts:
    """Assemble M*, P_a = Ps M*, A = Ps M* Pt^T and the projected datasets."""
    Ms = alignment_matrix(Ps, Pt)
    Xs_m, Xt_m = _as_matrix(Xs), _as_matrix(Xt)
    if Xs_m.shape[0] != Ps.P.shape[0] or Xt_m.shape[0] != Pt.P.shape[0]:
        raise ShapeError("data dimension does not match basis dimension")
    P_a = Ps.P @ Ms
    return AlignmentArtifacts(
        M_star=Ms,
        P_a=P_a,
        A=Ps.P @ Ms @ Pt.P.T,
        X_hat_a=P_a.T @ Xs_m,
        X_hat_t=Pt.P.T @ Xt_m,
    )


def similarity(xs: np.ndarray, xt: np.ndarray, A: np.ndarray) -> float:
    """Cross-domain similarity xs^T A xt."""
    xs, xt = np.asarray(xs, float), np.asarray(xt, float)
    if xs.shape != (A.shape[0],) or xt.shape != (A.shape[1],):
        raise ShapeError("vector dimensions do not match A")
    return float(xs @ A @ xt)


def nn_classify(train: np.ndarray, train_labels: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """1-nearest-neighbor labels (columns are points, ties to lowest index)."""
    train, queries = np.asarray(train, float), np.asarray(queries, float)
    if train.shape[1] == 0:
        raise ConfigurationError("empty training set")
    d2 = (
        np.sum(train**2, axis=0)[:, None]
        - 2 * train.T @ queries
        + np.sum(queries**2, axis=0)[None, :]
    )
    nearest = np.argmin(d2, axis=0)
    return np.asarray(train_labels)[nearest]


@dataclass
class SvmModel:
    """Least-squares SVM trained through the cross-domain similarity kernel."""

    b: float
    alpha: np.ndarray
    gamma: float
    support_data: Domain
    A_ref: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.alpha)) or not math.isfinite(self.b):
            raise ConfigurationError("non-finite SVM parameters")
        if self.gamma <= 0:
            raise ConfigurationError("gamma must be > 0")

    def kernel_block(self) -> np.ndarray:
        X = self.support_data.samples
        return X.T @ self.A_ref @ X

    def F_matrix(self) -> np.ndarray:
        n = self.alpha.size
        F = np.zeros((n + 1, n + 1))
        F[0, 1:] = 1.0
        F[1:, 0] = 1.0
        F[1:, 1:] = self.kernel_block() + np.eye(n) / self.gamma
        return F

    def J_matrix(self) -> np.ndarray:
        n = self.alpha.size
        J = np.zeros((n + 1, n + 1))
        J[0, 1:] = 1.0
        J[1:, 0] = 1.0
        return J

    def K_gamma_matrix(self) -> np.ndarray:
        n = self.alpha.size
        K = np.zeros((n + 1, n + 1))
        K[1:, 1:] = self.kernel_block() + np.eye(n) / self.gamma
        return K

    def to_json(self) -> str:
        return json.dumps(
            {
                "b": self.b,
                "alpha": self.alpha.tolist(),
                "gamma": self.gamma,
                "A": self.A_ref.tolist(),
                "support_samples": self.support_data.samples.tolist(),
                "support_labels": self.support_data.hidden_labels().tolist()
                if self.support_data.labels is not None
                else None,
                "shapes": {
                    "D": self.support_data.dim,
                    "n_s": self.support_data.n,
                },
            }
        )

    @classmethod
    def from_json(cls, doc: str) -> "SvmModel":
        obj = json.loads(doc)
        data = Domain(
            np.array(obj["support_samples"]),
            np.array(obj["support_labels"]) if obj["support_labels"] else None,
            name="support",
        )
        return cls(obj["b"], np.array(obj["alpha"]), obj["gamma"], data, np.array(obj["A"]))


def svm_train(Xs: Domain, A: np.ndarray, gamma: float) -> SvmModel:
    """Solve the least-squares SVM system F (b, alpha) = (0, y).

    F is built from the similarity kernel K[i,i'] = x_i^T A x_i'; since A is
    generally non-symmetric, F is solved as-is with a general dense solver.
    """
    if gamma <= 0:
        raise ConfigurationError("gamma must be > 0")
    y = Xs.visible_labels
    if y is None:
        raise ConfigurationError("source domain must carry visible labels")
    if not set(np.unique(y)) <= {-1, 1}:
        raise ConfigurationError("SVM labels must lie in {-1, +1}")
    n = Xs.n
    K = Xs.samples.T @ A @ Xs.samples
    F = np.zeros((n + 1, n + 1))
    F[0, 1:] = 1.0
    F[1:, 0] = 1.0
    F[1:, 1:] = K + np.eye(n) / gamma
    if np.linalg.cond(F) > 1e12:
        raise IllConditionedError(
            "SVM system is numerically singular; try a larger gamma"
        )
    rhs = np.concatenate(([0.0], y.astype(float)))
    sol = np.linalg.solve(F, rhs)
    return SvmModel(float(sol[0]), sol[1:], gamma, Xs, A)


def svm_classify(model: SvmModel, xt: np.ndarray) -> int:
    """Predicted label sign(sum_i alpha_i x_i^T A xt + b); sign(0) -> +1."""
    k = model.support_data.samples.T @ model.A_ref @ np.asarray(xt, float)
    value = float(model.alpha @ k + model.b)
    return 1 if value >= 0 else -1


def svm_decision_value(model: SvmModel, xt: np.ndarray) -> float:
    k = model.support_data.samples.T @ model.A_ref @ np.asarray(xt, float)
    return float(model.alpha @ k + model.b)


# ---------------------------------------------------------------------------
# kernels


def _hard_kernel_states(X: np.ndarray, lo: np.ndarray, span: np.ndarray) -> np.ndarray:
    """Statevectors of the hard-kernel feature circuit, one row per column of X.

    The circuit uses q = ceil(log2 D) qubits: each feature drives an RY
    rotation on qubit (m mod q), followed by one ring of controlled-Z
    entanglers. Features are min-max rescaled to [0, pi] first.
    """
    from .quantum_core import apply_unitary_vec

    D, n = X.shape
    q = max(1, math.ceil(math.log2(D))) if D > 1 else 1
    angles = np.where(span[:, None] > 0, (X - lo[:, None]) / np.where(span[:, None] > 0, span[:, None], 1.0) * math.pi, 0.0)
    states = np.zeros((n, 2**q))
    cz = np.diag([1.0, 1.0, 1.0, -1.0])
    for j in range(n):
        vec = np.zeros(2**q, dtype=complex)
        vec[0] = 1.0
        for m in range(D):
            t = angles[m, j]
            ry = np.array(
                [[math.cos(t / 2), -math.sin(t / 2)], [math.sin(t / 2), math.cos(t / 2)]]
            )
            vec = apply_unitary_vec(vec, ry, [m % q], q)
        if q == 2:
            vec = apply_unitary_vec(vec, cz, [0, 1], q)
        elif q > 2:
            for k in range(q):
                vec = apply_unitary_vec(vec, cz, [k, (k + 1) % q], q)
        states[j] = vec.real
    return states


def kernel_matrix(X, Y, spec: KernelSpec) -> np.ndarray:
    """Gram matrix between the columns of X and Y under the selected kernel."""
    Xm, Ym = _as_matrix(X), _as_matrix(Y)
    if Xm.shape[0] != Ym.shape[0]:
        raise ShapeError("kernel operands must share the feature dimension")
    if spec.kind == "linear":
        return Xm.T @ Ym
    if spec.kind == "polynomial":
        return (Xm.T @ Ym) ** spec.degree
    if spec.kind == "cosine":
        K = np.ones((Xm.shape[1], Ym.shape[1]))
        for m in range(Xm.shape[0]):
            K *= np.cos(Xm[m][:, None] - Ym[m][None, :])
        return K
    # hard kernel: exact statevector overlaps of the feature circuit
    both = np.hstack([Xm, Ym])
    lo, hi = both.min(axis=1), both.max(axis=1)
    span = hi - lo
    Sx = _hard_kernel_states(Xm, lo, span)
    Sy = _hard_kernel_states(Ym, lo, span)
    return Sx @ Sy.T


def _double_center(K: np.ndarray) -> np.ndarray:
    n, m = K.shape
    return K - K.mean(axis=0, keepdims=True) - K.mean(axis=1, keepdims=True) + K.mean()


def kernel_pca_weights(K: np.ndarray, d: int) -> np.ndarray:
    """Kernel-PCA weight matrix W (n x d) with unit-norm feature components.

    The Gram matrix is double-centered before eigendecomposition; columns
    are v_k / sqrt(lambda_k) with the same sign convention as `pca_subspace`.
    """
    K = np.asarray(K, float)
    n = K.shape[0]
    if K.shape != (n, n):
        raise ShapeError("Gram matrix must be square")
    scale = max(np.max(np.abs(K)), 1.0)
    if np.max(np.abs(K - K.T)) > 1e-8 * scale:
        raise ConfigurationError("Gram matrix is not symmetric")
    Kc = _double_center(K)
    w, V = np.linalg.eigh(Kc)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    if np.min(w) < -1e-8 * scale:
        raise ConfigurationError("Gram matrix is not positive semidefinite")
    if d > n or w[d - 1] <= 1e-12:
        raise RankDeficiencyError(
            f"component {d} has eigenvalue <= 1e-12; Gram matrix rank is deficient"
        )
    V = _fix_signs(V[:, :d])
    return V / np.sqrt(w[:d])


def kernel_alignment(Ws: np.ndarray, Kst: np.ndarray, Wt: np.ndarray) -> np.ndarray:
    """Feature-space alignment matrix Ws^T K_st Wt."""
    if Ws.shape[0] != Kst.shape[0] or Wt.shape[0] != Kst.shape[1]:
        raise ShapeError("weight/cross-Gram shapes are inconsistent")
    if Ws.shape[1] != Wt.shape[1]:
        raise ShapeError("weight matrices must share the component count")
    return Ws.T @ Kst @ Wt


@dataclass
class KernelAlignment:
    """Fitted kernel-SA pipeline; all feature-space quantities are computed
    through Gram matrices, never materializing the feature map."""

    spec: KernelSpec
    Xs: Domain
    Xt: Domain
    mean_s: np.ndarray
    mean_t: np.ndarray
    Ws: np.ndarray
    Wt: np.ndarray
    M_star: np.ndarray
    Z_a: np.ndarray  # aligned source projections, d x n_s
    Z_t: np.ndarray  # target projections, d x n_t

    def project_source(self, X) -> np.ndarray:
        Xm = _as_matrix(X) - self.mean_s[:, None]
        K = _double_center_cross(
            kernel_matrix(self.Xs, Xm, self.spec),
            kernel_matrix(self.Xs, self.Xs, self.spec),
        )
        return self.M_star.T @ (self.Ws.T @ K)

    def project_target(self, X) -> np.ndarray:
        Xm = _as_matrix(X) - self.mean_t[:, None]
        K = _double_center_cross(
            kernel_matrix(self.Xt, Xm, self.spec),
            kernel_matrix(self.Xt, self.Xt, self.spec),
        )
        return self.Wt.T @ K

    def similarity(self, xs: np.ndarray, xt: np.ndarray) -> float:
        zs = self.project_source(np.asarray(xs, float)[:, None])
        zt = self.project_target(np.asarray(xt, float)[:, None])
        return float(zs[:, 0] @ zt[:, 0])


def _double_center_cross(Kxy: np.ndarray, Kxx: np.ndarray) -> np.ndarray:
    """Center a cross-Gram K(train, query) consistently with a double-centered
    training Gram."""
    col_mean = Kxy.mean(axis=0, keepdims=True)
    row_mean = Kxx.mean(axis=1, keepdims=True)
    return Kxy - col_mean - row_mean + Kxx.mean()


def kernel_sa_fit(Xs: Domain, Xt: Domain, spec: KernelSpec, d: int) -> KernelAlignment:
    """Run the kernel-SA pipeline: center both domains, build Gram matrices,
    extract kernel-PCA weights, and align the feature subspaces."""
    Xs_c, mean_s = center_columns(Xs)
    Xt_c, mean_t = center_columns(Xt)
    Kss = kernel_matrix(Xs_c, Xs_c, spec)
    Ktt = kernel_matrix(Xt_c, Xt_c, spec)
    Kst = kernel_matrix(Xs_c, Xt_c, spec)
    Ws = kernel_pca_weights(Kss, d)
    Wt = kernel_pca_weights(Ktt, d)
    # cross-Gram centered against both domain means
    Kst_c = (
        Kst
        - Kst.mean(axis=0, keepdims=True)
        - Kst.mean(axis=1, keepdims=True)
        + Kst.mean()
    )
    M = kernel_alignment(Ws, Kst_c, Wt)
    Zs = Ws.T @ _double_center(Kss)
    Zt = Wt.T @ _double_center(Ktt)
    return KernelAlignment(
        spec, Xs_c, Xt_c, mean_s, mean_t, Ws, Wt, M, M.T @ Zs, Zt
    )

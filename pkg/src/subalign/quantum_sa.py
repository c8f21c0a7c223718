"""Quantum subspace alignment assembled from the simulator primitives:
qPCA, the matrix-multiplication pipeline for M* and the projections,
quantum nearest-neighbor classification, and the qSVM.

Each stage exposes enough bookkeeping (global scales, success
probabilities) that its output can be compared entrywise against the
classical track.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .classical_sa import SubspaceBasis, _fix_signs
from .datasets import Domain
from .errors import (
    ConfigurationError,
    IllConditionedError,
    PostselectionError,
    PrecisionError,
)
from .quantum_core import (
    QuantumState,
    RegisterLayout,
    ShotPlan,
    amplitude_encode,
    amplitude_estimation,
    encode_matrix,
    grover_min_find,
    partial_trace,
    pe_outcome_kernel,
    signed_overlap,
)

__all__ = [
    "QpcaResult",
    "InnerProductState",
    "QsvmState",
    "qpca",
    "matrix_product_state",
    "q_project",
    "q_build_alignment",
    "q_nn_classify",
    "q_svm_train",
    "q_svm_classify",
    "build_phi1",
    "build_g_operator",
    "overlap_angle",
]

QPCA_MAX_DIM = 16
QSVM_MAX_ROWS = 16


@dataclass
class QpcaResult:
    basis: SubspaceBasis
    sampled_eigenphases: np.ndarray
    precision_qubits: int
    copies_used: int
    warnings: list[str] = field(default_factory=list)


@dataclass
class InnerProductState:
    """State over |i>^I1 |j>^I2 whose amplitudes are proportional to the
    entries of P^T Q, with the dropped norms tracked in ``scale``."""

    state: QuantumState
    scale: float
    success_probability: float
    rows: int
    cols: int

    def as_matrix(self) -> np.ndarray:
        """Reconstruct P^T Q from amplitudes and the scale ledger."""
        shaped = self.state.reshaped().real * self.state.global_scale
        return shaped[: self.rows, : self.cols]


@dataclass
class QsvmState:
    """Inverted SVM system as a normalized state plus readout bookkeeping."""

    b_alpha_state: QuantumState
    norms: dict
    gamma: float
    success_probability: float
    rows: int
    readout_scale: float

    def readout(self) -> tuple[float, np.ndarray]:
        """Reconstruct (b, alpha) exactly (simulation privilege)."""
        vec = self.b_alpha_state.amplitudes.real[: self.rows] * self.readout_scale
        return float(vec[0]), vec[1:]


# ---------------------------------------------------------------------------
# qPCA


def qpca(
    X,
    d: int,
    precision_qubits: int = 8,
    copies: int | None = None,
) -> QpcaResult:
    """Principal subspace via phase estimation of exp(i rho t0) on the
    covariance state rho ~ X X^T obtained by partial trace.

    Eigenvalues are recovered from the sampled eigenphases as
    lambda = 2 pi phase / t0 (times the covariance trace).
    """
    M = X.samples if isinstance(X, Domain) else np.asarray(X, float)
    D, n = M.shape
    if D > QPCA_MAX_DIM:
        raise ConfigurationError(f"qPCA capped at D <= {QPCA_MAX_DIM}")
    if not 1 <= d <= min(D, n):
        raise ConfigurationError(f"d={d} out of range")
    psi = encode_matrix(M, index_name="i", feature_name="m")
    rho = partial_trace(psi, "i")
    cov_trace = float(np.sum(M * M))

    lam, U = np.linalg.eigh(rho.matrix)
    order = np.argsort(lam)[::-1]
    lam, U = np.maximum(lam[order], 0.0), U[:, order].real
    t0 = 0.95 * math.pi  # keeps every eigenphase below 1/2
    phases = lam * t0 / (2 * math.pi)
    N = 2**precision_qubits
    kernels = np.stack([pe_outcome_kernel(p, precision_qubits) for p in phases])
    weights = lam[:, None] * kernels  # (eigvec, outcome) joint distribution
    outcome_prob = weights.sum(axis=0)

    # Eigenphases live below 1/2 by the choice of t0, so outcomes in the
    # upper half of the lattice are aliasing tails; scan only local maxima
    # of the lower half, largest phase first.
    half = N // 2
    lower = outcome_prob[:half]
    maxima = [
        k
        for k in range(half - 1, -1, -1)
        if (k == 0 or lower[k] >= lower[k - 1])
        and (k == half - 1 or lower[k] >= lower[k + 1])
    ]
    # when the lattice is too coarse for distinct peaks, fall back to the
    # remaining outcomes (their conditional states still separate vectors)
    candidates = maxima + [k for k in range(half - 1, -1, -1) if k not in maxima]
    selected_vecs: list[np.ndarray] = []
    selected_phases: list[float] = []
    warnings: list[str] = []
    for k in candidates:
        if len(selected_vecs) >= d:
            break
        if outcome_prob[k] < 1e-8:
            continue
        cond = weights[:, k] / outcome_prob[k]
        for j in np.argsort(cond)[::-1]:
            if len(selected_vecs) >= d or cond[j] < 0.25:
                break
            v = U[:, j].copy()
            for s in selected_vecs:
                v -= (s @ v) * s
            if np.linalg.norm(v) < 0.5:
                continue
            selected_vecs.append(v / np.linalg.norm(v))
            selected_phases.append(k / N)
    if len(selected_vecs) >= d:
        order_sel = np.argsort(selected_phases)[::-1]
        selected_vecs = [selected_vecs[i] for i in order_sel]
        selected_phases = [selected_phases[i] for i in order_sel]
    if len(selected_vecs) < d:
        gaps = np.abs(np.diff(phases[: d + 1]))
        raise PrecisionError(
            f"could not separate the top-{d} eigenphases at {precision_qubits} "
            f"precision qubits (phase gaps {gaps})"
        )
    if any(
        abs(selected_phases[i] - selected_phases[i + 1]) < 1.0 / N
        for i in range(d - 1)
    ):
        warnings.append(
            f"eigenphase gap below the 2^-{precision_qubits} lattice; "
            "top subspace is only determined up to rotation"
        )

    P = _fix_signs(np.stack(selected_vecs, axis=1)[:D])
    eigvals = np.array(selected_phases) * 2 * math.pi / t0 * cov_trace
    basis = SubspaceBasis(P, eigvals, list(warnings))
    return QpcaResult(
        basis=basis,
        sampled_eigenphases=np.array(selected_phases),
        precision_qubits=precision_qubits,
        copies_used=copies if copies is not None else N - 1,
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# matrix multiplication pipeline


def overlap_angle(cosine: float) -> float:
    """Angle theta with sin(theta) = sqrt((1 + <u|v>)/2)."""
    c = min(max(cosine, -1.0), 1.0)
    return math.asin(math.sqrt((1.0 + c) / 2.0))


def build_phi1(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """The mixed column state (|0>(u+v) + |1>(u-v))/2 for unit u, v."""
    return np.concatenate([(u + v) / 2.0, (u - v) / 2.0]).astype(complex)


def build_g_operator(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Grover-type operator (2|phi1><phi1| - I)(-sigma_z x I) whose
    eigenvalues on the column pair are exp(+-2i theta)."""
    phi1 = build_phi1(u, v)
    dim = phi1.size
    refl = 2.0 * np.outer(phi1, phi1.conj()) - np.eye(dim)
    sz = np.kron(np.diag([1.0, -1.0]), np.eye(dim // 2))
    return refl @ (-sz)


def _lattice_theta(theta: float, n: int) -> float:
    return round(theta * 2**n / math.pi) * math.pi / 2**n


def matrix_product_state(
    P: np.ndarray,
    Q: np.ndarray,
    precision_qubits: int = 8,
    exact_theta: bool = False,
) -> InnerProductState:
    """Run the five-step multiplication pipeline producing a state whose
    amplitudes encode the entries of P^T Q.

    Per column pair the overlap angle theta is either represented exactly
    (exact-theta mode) or read off the 2^-n phase lattice, and the
    conditional rotation writes the recovered cosine onto the R=|0> branch.
    The reported success probability is the exact Born probability of the
    postselection.
    """
    P = np.asarray(P, float)
    Q = np.asarray(Q, float)
    if P.shape[0] != Q.shape[0]:
        raise ConfigurationError("column spaces must share the ambient dimension")
    r, c = P.shape[1], Q.shape[1]
    pnorm, qnorm = np.linalg.norm(P), np.linalg.norm(Q)
    if pnorm == 0 or qnorm == 0:
        raise ConfigurationError("zero operand matrix")
    unnorm = np.zeros((r, c))
    for i in range(r):
        ui = P[:, i]
        nu = np.linalg.norm(ui)
        for j in range(c):
            vj = Q[:, j]
            nv = np.linalg.norm(vj)
            if nu == 0 or nv == 0:
                continue
            cos_ij = float(ui @ vj / (nu * nv))
            if exact_theta:
                rec = cos_ij
            else:
                theta = overlap_angle(cos_ij)
                rec = 2.0 * math.sin(_lattice_theta(theta, precision_qubits)) ** 2 - 1.0
            unnorm[i, j] = nu * nv * rec / (pnorm * qnorm)
    success = float(np.sum(unnorm**2))
    if success < 1e-6:
        raise PostselectionError(
            f"postselection probability {success:.3e} below 1e-6; "
            "overlaps are degenerate"
        )
    iq = max(1, math.ceil(math.log2(r)))
    jq = max(1, math.ceil(math.log2(c)))
    layout = RegisterLayout((("I1", iq), ("I2", jq)))
    amps = np.zeros((2**iq, 2**jq))
    amps[:r, :c] = unnorm / math.sqrt(success)
    state = QuantumState(
        amps.reshape(-1).astype(complex),
        layout,
        pnorm * qnorm * math.sqrt(success),
    )
    return InnerProductState(state, pnorm * qnorm, success, r, c)


def q_project(
    P: np.ndarray,
    X,
    precision_qubits: int = 8,
    exact_theta: bool = True,
) -> QuantumState:
    """State encoding P^T X (the subspace projection of a dataset)."""
    Xm = X.samples if isinstance(X, Domain) else np.asarray(X, float)
    return matrix_product_state(P, Xm, precision_qubits, exact_theta).state


def q_build_alignment(
    Ps: SubspaceBasis,
    Pt: SubspaceBasis,
    Xs,
    Xt,
    precision_qubits: int = 8,
    exact_theta: bool = False,
) -> dict:
    """Full quantum alignment chain: M* state, projected source, aligned
    source, and projected target, with reconstructed matrices for parity."""
    Xs_m = Xs.samples if isinstance(Xs, Domain) else np.asarray(Xs, float)
    Xt_m = Xt.samples if isinstance(Xt, Domain) else np.asarray(Xt, float)
    ips_m = matrix_product_state(Ps.P, Pt.P, precision_qubits, exact_theta)
    M = ips_m.as_matrix()
    ips_xs = matrix_product_state(Ps.P, Xs_m, precision_qubits, exact_theta)
    X_hat_s = ips_xs.as_matrix()
    ips_xa = matrix_product_state(M, X_hat_s, precision_qubits, exact_theta)
    ips_xt = matrix_product_state(Pt.P, Xt_m, precision_qubits, exact_theta)
    return {
        "M_state": ips_m,
        "X_hat_s_state": ips_xs,
        "X_hat_a_state": ips_xa,
        "X_hat_t_state": ips_xt,
        "M_star": M,
        "X_hat_a": ips_xa.as_matrix(),
        "X_hat_t": ips_xt.as_matrix(),
    }


# ---------------------------------------------------------------------------
# quantum nearest neighbor


def _encode_vec(v: np.ndarray) -> QuantumState:
    return amplitude_encode(v, name="C1")


def _ae_distance(a: float, ae_bits: int, plan: ShotPlan) -> float:
    """Push a normalized distance through the amplitude-estimation lattice."""
    a = min(max(a, 0.0), 1.0)
    s, c = math.sqrt(a), math.sqrt(1.0 - a)
    prep = np.array([[c, -s], [s, c]])
    good = np.diag([0.0, 1.0])
    return amplitude_estimation(prep, good, ae_bits, plan)


def q_nn_classify(
    X_hat_a: np.ndarray,
    labels: np.ndarray,
    X_hat_t: np.ndarray,
    plan: ShotPlan,
    ae_bits: int = 7,
    repeats: int = 15,
) -> tuple[np.ndarray, list[dict]]:
    """Label each target point by its nearest aligned source point.

    Per-pair distances are built from Hadamard-test overlaps and the stored
    vector norms, pushed through the amplitude-estimation lattice, and the
    minimum is located with Durr-Hoyer minimum finding.
    """
    X_hat_a = np.asarray(X_hat_a, float)
    X_hat_t = np.asarray(X_hat_t, float)
    d, n_s = X_hat_a.shape
    if d > 8 or n_s > 64:
        raise ConfigurationError("register budget: d <= 8 and n_s <= 64")
    labels = np.asarray(labels)
    src_norms = np.linalg.norm(X_hat_a, axis=0)
    src_states = [
        _encode_vec(X_hat_a[:, i]) if src_norms[i] > 0 else None for i in range(n_s)
    ]
    out = np.empty(X_hat_t.shape[1], dtype=labels.dtype)
    diagnostics = []
    for j in range(X_hat_t.shape[1]):
        t = X_hat_t[:, j]
        tn = np.linalg.norm(t)
        t_state = _encode_vec(t) if tn > 0 else None
        pair_plan = replace(plan, seed=plan.seed + 7919 * j)
        dists = np.empty(n_s)
        for i in range(n_s):
            if t_state is None or src_states[i] is None:
                d2 = tn**2 + src_norms[i] ** 2
            else:
                ov = signed_overlap(t_state, src_states[i], pair_plan)
                d2 = tn**2 + src_norms[i] ** 2 - 2.0 * tn * src_norms[i] * ov
            dists[i] = math.sqrt(max(d2, 0.0))
        dmax = max(float(dists.max()), 1e-12)
        est = np.array(
            [_ae_distance(dists[i] / dmax, ae_bits, pair_plan) * dmax for i in range(n_s)]
        )
        warn = None
        order = np.argsort(est)
        if n_s > 1 and est[order[0]] == est[order[1]] and labels[order[0]] != labels[order[1]]:
            warn = "ambiguous nearest neighbor at AE resolution"
        stats = grover_min_find(est, pair_plan, repeats=repeats, return_stats=True)
        out[j] = labels[stats.index]
        diagnostics.append(
            {
                "target": j,
                "distances": est,
                "nearest": int(stats.index),
                "oracle_queries": stats.oracle_queries,
                "warning": warn,
            }
        )
    return out, diagnostics


# ---------------------------------------------------------------------------
# qSVM


def _svm_system(Xs: Domain, A: np.ndarray, gamma: float) -> np.ndarray:
    y = Xs.visible_labels
    if y is None:
        raise ConfigurationError("source domain must carry visible labels")
    n = Xs.n
    K = Xs.samples.T @ A @ Xs.samples
    F = np.zeros((n + 1, n + 1))
    F[0, 1:] = 1.0
    F[1:, 0] = 1.0
    F[1:, 1:] = K + np.eye(n) / gamma
    return F


def q_svm_train(
    Xs: Domain,
    A: np.ndarray,
    gamma: float,
    precision_qubits: int = 10,
    kappa_max: float = 1e4,
) -> QsvmState:
    """Matrix inversion of the (Hermitian-embedded) SVM system by spectral
    emulation of phase estimation plus the 1/lambda conditional rotation."""
    if gamma <= 0:
        raise ConfigurationError("gamma must be > 0")
    n = Xs.n
    rows = n + 1
    if rows > QSVM_MAX_ROWS:
        raise ConfigurationError(f"inversion register budget: n_s + 1 <= {QSVM_MAX_ROWS}")
    F = _svm_system(Xs, A, gamma)
    trF = float(np.trace(F))
    Fh = F / trF
    H = np.zeros((2 * rows, 2 * rows))
    H[:rows, rows:] = Fh
    H[rows:, :rows] = Fh.T
    lam, V = np.linalg.eigh(H)
    lmax = float(np.max(np.abs(lam)))
    t0 = 2 * math.pi * 0.25 / lmax
    N = 2**precision_qubits
    lam_rounded = np.round(lam * t0 / (2 * math.pi) * N) / N * 2 * math.pi / t0
    keep = np.abs(lam_rounded) >= lmax / kappa_max
    if not np.any(keep):
        raise IllConditionedError("every eigenvalue fell below the inversion cutoff")
    y = Xs.visible_labels.astype(float)
    y_hat = np.concatenate(([0.0], y))
    y_hat /= np.linalg.norm(y_hat)
    y_emb = np.concatenate([y_hat, np.zeros(rows)])
    coef = V.T @ y_emb
    C = float(np.min(np.abs(lam_rounded[keep])))
    inv_coef = np.where(keep, coef / np.where(keep, lam_rounded, 1.0), 0.0)
    success = float(np.sum((C * inv_coef) ** 2))
    if success <= 0:
        raise PostselectionError("zero postselection probability in inversion")
    x_full = V @ inv_coef
    x = x_full[rows:]
    mag = float(np.linalg.norm(x))
    if mag == 0:
        raise PostselectionError("inversion produced the zero solution")
    q = max(1, math.ceil(math.log2(rows)))
    amps = np.zeros(2**q, dtype=complex)
    amps[:rows] = x / mag
    state = QuantumState(amps, RegisterLayout.single("BA", q))
    readout_scale = mag * math.sqrt(n) / trF  # ||(0, y)|| = sqrt(n) for +-1 labels
    b, alpha = float(x[0] / mag * readout_scale), x[1:] / mag * readout_scale
    N_x = float(b**2 + np.sum(alpha**2 * np.sum(Xs.samples**2, axis=0)))
    return QsvmState(
        b_alpha_state=state,
        norms={"N_x": N_x},
        gamma=gamma,
        success_probability=success,
        rows=rows,
        readout_scale=readout_scale,
    )


def q_svm_classify(
    model: QsvmState,
    Xs: Domain,
    A: np.ndarray,
    xt: np.ndarray,
    plan: ShotPlan,
) -> tuple[int, dict]:
    """Signed decision via a Hadamard-test overlap of the training-parameter
    state and the query state; sign(0) -> +1."""
    b, alpha = model.readout()
    X = Xs.samples
    n = Xs.n
    xt = np.asarray(xt, float)
    at = A @ xt
    psi_t = np.concatenate([[b]] + [alpha[i] * X[:, i] for i in range(n)])
    psi_x = np.concatenate([[1.0]] + [at] * n)
    decision = signed_overlap(
        amplitude_encode(psi_t), amplitude_encode(psi_x), plan
    )
    info = {
        "decision_value": decision,
        "N_t": float(psi_x @ psi_x),
        "N_x": float(psi_t @ psi_t),
        "low_confidence": (not plan.exact)
        and abs(decision) < 3.0 / math.sqrt(plan.shots),
    }
    label = 1 if decision >= 0 else -1
    return label, info

"""Quantum algorithm primitives: QFT/phase estimation, density-operator
exponentiation, swap and Hadamard tests, amplitude estimation, conditional
rotation, and Grover-based minimum finding.

Everything is simulated exactly; measurement-bearing primitives offer both
an exact-expectation mode and a seeded shot-sampled mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..errors import (
    ConfigurationError,
    PostselectionError,
    RangeError,
    ValidationError,
)
from .state import (
    DensityOperator,
    QuantumState,
    RegisterLayout,
    ShotPlan,
)

MAX_PRECISION_QUBITS = 12
MAX_AE_QUBITS = 10
MAX_GROVER_N = 2**12


def qft_matrix(n: int) -> np.ndarray:
    """The n-qubit quantum Fourier transform as a dense matrix."""
    N = 2**n
    j, k = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    return np.exp(2j * np.pi * j * k / N) / math.sqrt(N)


def _check_unitary(U: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValidationError("operator must be square")
    if np.max(np.abs(U @ U.conj().T - np.eye(U.shape[0]))) > tol:
        raise ValidationError("operator is not unitary within 1e-10")
    return U


def pe_outcome_kernel(phase: float, n: int) -> np.ndarray:
    """Exact phase-estimation outcome distribution over k = 0..2^n-1 for an
    eigenstate with eigenphase ``phase`` (in units of full turns)."""
    N = 2**n
    delta = phase - np.arange(N) / N
    num = np.sin(np.pi * N * delta) ** 2
    den = N**2 * np.sin(np.pi * delta) ** 2
    out = np.where(np.abs(np.sin(np.pi * delta)) < 1e-15, 1.0, num / np.maximum(den, 1e-300))
    return out / out.sum()


def phase_estimation(
    U: np.ndarray,
    input_state: QuantumState,
    precision_qubits: int,
    register_name: str = "PE",
) -> QuantumState:
    """Standard phase estimation of ``U`` applied to the whole input state;
    the precision register is prepended (most significant)."""
    if not 1 <= precision_qubits <= MAX_PRECISION_QUBITS:
        raise ConfigurationError(
            f"precision_qubits must be in 1..{MAX_PRECISION_QUBITS}"
        )
    U = _check_unitary(U)
    if U.shape[0] != input_state.layout.dim:
        raise ValidationError("unitary dimension does not match input state")
    N = 2**precision_qubits
    T, Z = scipy.linalg.schur(U, output="complex")
    eigs = np.diag(T)
    w = Z.conj().T @ input_state.amplitudes
    powers = eigs[None, :] ** np.arange(N)[:, None]  # (N, dim) eigenvalue powers
    psi = (powers * w[None, :]) @ Z.T  # row k holds U^k |input>
    psi /= math.sqrt(N)
    out = np.fft.fft(psi, axis=0) / math.sqrt(N)  # inverse QFT on the index axis
    layout = input_state.layout.prepended(register_name, precision_qubits)
    return QuantumState(out.reshape(-1), layout, input_state.global_scale)


def density_exponentiation(
    rho: DensityOperator, sigma: DensityOperator, t: float, slices: int
) -> DensityOperator:
    """Approximate e^{-i rho t} sigma e^{i rho t} by ``slices`` rounds of the
    partial-swap channel, consuming one copy of rho per round.

    Trace-distance error decays like t^2 / slices.
    """
    if slices < 1:
        raise ConfigurationError("slices must be >= 1")
    if rho.dim != sigma.dim:
        raise ValidationError("rho and sigma dimensions differ")
    d = rho.dim
    dt = t / slices
    # swap operator on the two copies; exp(-i S dt) = cos(dt) I - i sin(dt) S
    S = np.zeros((d * d, d * d))
    idx = np.arange(d * d)
    a, b = idx // d, idx % d
    S[idx, b * d + a] = 1.0
    U = math.cos(dt) * np.eye(d * d) - 1j * math.sin(dt) * S
    sig = sigma.matrix
    for _ in range(slices):
        joint = U @ np.kron(sig, rho.matrix) @ U.conj().T
        sig = np.trace(joint.reshape(d, d, d, d), axis1=1, axis2=3)
        sig = 0.5 * (sig + sig.conj().T)
    sig /= np.trace(sig).real
    return DensityOperator(sig, sigma.layout)


def swap_test(a: QuantumState, b: QuantumState, plan: ShotPlan) -> float:
    """Squared overlap |<a|b>|^2, exact or from ancilla shot statistics."""
    if a.layout.dim != b.layout.dim:
        raise ValidationError("states live in different dimensions")
    overlap_sq = float(np.abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    if plan.exact:
        return overlap_sq
    p0 = (1.0 + overlap_sq) / 2.0
    hits = plan.rng().binomial(plan.shots, p0)
    return 2.0 * hits / plan.shots - 1.0


def signed_overlap(a: QuantumState, b: QuantumState, plan: ShotPlan) -> float:
    """Hadamard-test estimate of Re<a|b> (the swap test loses the sign)."""
    if a.layout.dim != b.layout.dim:
        raise ValidationError("states live in different dimensions")
    re = float(np.real(np.vdot(a.amplitudes, b.amplitudes)))
    if plan.exact:
        return re
    p0 = min(max((1.0 + re) / 2.0, 0.0), 1.0)
    hits = plan.rng().binomial(plan.shots, p0)
    return 2.0 * hits / plan.shots - 1.0


def amplitude_estimation(
    state_prep: np.ndarray,
    good_projector: np.ndarray,
    m: int,
    plan: ShotPlan | None = None,
) -> float:
    """Canonical amplitude estimation with an m-qubit phase register.

    Returns sin^2(pi k / 2^m) for the measured (or, in exact mode, the most
    probable) outcome k; error <= pi/2^m + pi^2/2^(2m) with probability
    >= 8/pi^2.
    """
    if not 1 <= m <= MAX_AE_QUBITS:
        raise ConfigurationError(f"m must be in 1..{MAX_AE_QUBITS}")
    A = _check_unitary(state_prep)
    P = np.asarray(good_projector, dtype=complex)
    if np.max(np.abs(P @ P - P)) > 1e-10 or np.max(np.abs(P - P.conj().T)) > 1e-10:
        raise ValidationError("good_projector must be an orthogonal projector")
    psi = A[:, 0]
    amp = float(np.real(np.vdot(psi, P @ psi)))
    amp = min(max(amp, 0.0), 1.0)
    theta = math.asin(math.sqrt(amp))
    N = 2**m
    dist = 0.5 * (pe_outcome_kernel(theta / math.pi, m) + pe_outcome_kernel(-theta / math.pi, m))
    if plan is None or plan.exact:
        k = int(np.argmax(dist))
    else:
        k = int(plan.rng().choice(N, p=dist / dist.sum()))
    return math.sin(math.pi * k / N) ** 2


def conditional_rotation(state: QuantumState, value_register: str, f) -> QuantumState:
    """Append an ancilla register R; basis value v of ``value_register`` gains
    amplitude f(v) on |0>_R and sqrt(1 - f(v)^2) on |1>_R."""
    q = state.layout.qubits(value_register)
    fv = np.array([float(f(v)) for v in range(2**q)])
    if np.any(np.abs(fv) > 1.0 + 1e-12):
        raise RangeError("|f(value)| must not exceed 1")
    fv = np.clip(fv, -1.0, 1.0)
    axis = state.layout.axis(value_register)
    psi = state.reshaped()
    shape = [1] * psi.ndim
    shape[axis] = 2**q
    fb = fv.reshape(shape)
    new = np.stack([psi * fb, psi * np.sqrt(1.0 - fb**2)], axis=-1)
    layout = state.layout.appended("R", 1)
    return QuantumState(new.reshape(-1), layout, state.global_scale)


def postselect_r0(state: QuantumState, register: str = "R") -> tuple[QuantumState, float]:
    """Condition on the rotation ancilla reading |0>; returns the renormalized
    state and the exact success probability."""
    return state.project(register, 0)


@dataclass
class GroverStats:
    index: int
    oracle_queries: int
    threshold_updates: int


def _durr_hoyer_once(values: np.ndarray, rng: np.random.Generator):
    N = values.size
    budget = math.ceil(22.5 * math.sqrt(N) + 1.4 * math.log2(max(N, 2)) ** 2)
    y_idx = int(rng.integers(N))
    queries = 0
    updates = 0
    while queries < budget:
        marked = np.flatnonzero(values < values[y_idx])
        if marked.size == 0:
            break
        # exponential Grover search over the marked set
        m = 1.0
        found = False
        theta = math.asin(math.sqrt(marked.size / N))
        while queries < budget:
            j = int(rng.integers(0, max(int(math.ceil(m)), 1)))
            queries += j + 1
            p_hit = math.sin((2 * j + 1) * theta) ** 2
            if rng.random() < p_hit:
                y_idx = int(rng.choice(marked))
                updates += 1
                found = True
                break
            m = min(1.2 * m, math.sqrt(N))
        if not found:
            break
    return y_idx, queries, updates


def grover_min_find(
    values,
    plan: ShotPlan,
    repeats: int = 1,
    return_stats: bool = False,
):
    """Durr-Hoyer quantum minimum finding (simulated with exact Grover
    success probabilities and instrumented oracle-query counting).

    A single run returns the true argmin with probability >= 1/2; the driver
    repeats ``repeats`` times and keeps the best index found.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ConfigurationError("empty input")
    if values.size > MAX_GROVER_N:
        raise ConfigurationError(f"N capped at {MAX_GROVER_N}")
    rng = plan.rng()
    best_idx, total_queries, total_updates = None, 0, 0
    for _ in range(max(repeats, 1)):
        idx, queries, updates = _durr_hoyer_once(values, rng)
        total_queries += queries
        total_updates += updates
        if best_idx is None or values[idx] < values[best_idx] or (
            values[idx] == values[best_idx] and idx < best_idx
        ):
            best_idx = idx
    if return_stats:
        return GroverStats(best_idx, total_queries, total_updates)
    return best_idx

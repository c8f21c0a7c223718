import math

import numpy as np
import pytest

from subalign import classical_sa as csa
from subalign import quantum_sa as qsa
from subalign.datasets import Domain, DomainShift, SynthSpec, center_columns, synth_shifted_gaussians
from subalign.errors import ConfigurationError, PostselectionError
from subalign.quantum_core import ShotPlan

EXACT = ShotPlan()


def _random_orthonormal(rng, D, d):
    Q, _ = np.linalg.qr(rng.standard_normal((D, d)))
    return Q


class TestQpca:
    def test_rank_one(self):
        u = np.array([3.0, 4.0]) / 5.0
        X = np.outer(u, [1.0, -2.0, 0.5])
        res = qsa.qpca(X, 1, precision_qubits=8)
        assert np.max(np.abs(np.abs(res.basis.P[:, 0]) - np.abs(u))) <= 1e-6
        # single unit eigenvalue of rho -> phase = t0 / 2pi on the lattice
        expect = round(0.95 * math.pi / (2 * math.pi) * 256) / 256
        assert res.sampled_eigenphases[0] == pytest.approx(expect)

    def test_degenerate_spectrum_warns_but_spans(self):
        X = np.hstack([np.eye(2), -np.eye(2)])  # isotropic: equal eigenvalues
        res = qsa.qpca(X, 2, precision_qubits=8)
        assert res.warnings
        P = res.basis.P
        assert np.max(np.abs(P @ P.T - np.eye(2))) <= 1e-10

    def test_projector_parity_random(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((4, 12))
        X -= X.mean(axis=1, keepdims=True)
        q = qsa.qpca(X, 2, precision_qubits=8).basis
        c = csa.pca_subspace(X, 2)
        err = np.linalg.norm(q.P @ q.P.T - c.P @ c.P.T)
        assert err <= 0.05

    def test_precision_median_monotone(self):
        # the parity property holds for the median over seeds, not per instance
        instances = []
        for seed in range(10):
            rng = np.random.default_rng(seed)
            X = rng.standard_normal((4, 12))
            X -= X.mean(axis=1, keepdims=True)
            instances.append((X, csa.pca_subspace(X, 2)))
        medians = []
        for n in (4, 6, 8, 10):
            errs = [
                np.linalg.norm(
                    qsa.qpca(X, 2, precision_qubits=n).basis.P
                    @ qsa.qpca(X, 2, precision_qubits=n).basis.P.T
                    - c.P @ c.P.T
                )
                for X, c in instances
            ]
            medians.append(np.median(errs))
        assert all(medians[i + 1] <= medians[i] + 1e-9 for i in range(3))

    def test_dimension_cap(self):
        with pytest.raises(ConfigurationError):
            qsa.qpca(np.ones((17, 20)), 2)


class TestThetaPipeline:
    def test_theta_identity(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            c = rng.uniform(-1, 1)
            t = qsa.overlap_angle(c)
            assert math.sin(t) ** 2 + math.cos(t) ** 2 == pytest.approx(1.0, abs=1e-12)
            assert math.sin(t) ** 2 == pytest.approx((1 + c) / 2, abs=1e-12)

    def test_g_operator_eigenphases(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            u = rng.standard_normal(4)
            u /= np.linalg.norm(u)
            v = rng.standard_normal(4)
            v /= np.linalg.norm(v)
            theta = qsa.overlap_angle(float(u @ v))
            G = qsa.build_g_operator(u, v)
            eigs = np.linalg.eigvals(G)
            want = {np.exp(2j * theta), np.exp(-2j * theta)}
            found = sum(
                1 for w in want if np.min(np.abs(eigs - w)) <= 1e-10
            )
            assert found == 2


class TestMatrixProductState:
    def test_identity_pattern(self):
        rng = np.random.default_rng(4)
        P = _random_orthonormal(rng, 4, 2)
        ips = qsa.matrix_product_state(P, P, exact_theta=True)
        M = ips.as_matrix()
        assert np.max(np.abs(M - np.eye(2))) <= 1e-6
        # off-diagonal amplitude mass vanishes in exact mode
        off = M - np.diag(np.diag(M))
        assert np.sum(off**2) <= 1e-6

    def test_single_cosine(self):
        u = np.array([[math.cos(math.pi / 3)], [math.sin(math.pi / 3)]])
        v = np.array([[1.0], [0.0]])
        n = 8
        ips = qsa.matrix_product_state(u, v, precision_qubits=n)
        assert abs(ips.as_matrix()[0, 0] - 0.5) <= 2.0 ** (1 - n) * 2

    def test_entrywise_parity_both_modes(self):
        rng = np.random.default_rng(5)
        P = _random_orthonormal(rng, 4, 2)
        Q = _random_orthonormal(rng, 4, 2)
        exact = qsa.matrix_product_state(P, Q, exact_theta=True).as_matrix()
        assert np.max(np.abs(exact - P.T @ Q)) <= 1e-6
        finite = qsa.matrix_product_state(P, Q, precision_qubits=8).as_matrix()
        assert np.max(np.abs(finite - P.T @ Q)) <= 0.02

    def test_postselection_bookkeeping(self):
        rng = np.random.default_rng(6)
        P = _random_orthonormal(rng, 4, 2)
        Q = _random_orthonormal(rng, 4, 2)
        ips = qsa.matrix_product_state(P, Q, exact_theta=True)
        # global scale ledger: |M|_F = |P|_F |Q|_F sqrt(success)
        implied = np.linalg.norm(P) * np.linalg.norm(Q) * math.sqrt(ips.success_probability)
        assert implied == pytest.approx(np.linalg.norm(P.T @ Q), abs=1e-10)
        assert 0.0 < ips.success_probability <= 1.0

    def test_degenerate_overlap_error(self):
        P = np.array([[1.0], [0.0]])
        Q = np.array([[0.0], [1.0]])  # orthogonal: zero postselection mass
        with pytest.raises(PostselectionError):
            qsa.matrix_product_state(P, Q, exact_theta=True)


class TestQProject:
    def test_identity_projection(self):
        rng = np.random.default_rng(7)
        X = rng.standard_normal((4, 3))
        state = qsa.q_project(np.eye(4), X)
        recon = state.reshaped().real * state.global_scale
        assert np.max(np.abs(recon[:4, :3] - X)) <= 1e-6

    def test_single_sample_direction(self):
        rng = np.random.default_rng(8)
        P = _random_orthonormal(rng, 4, 2)
        x = rng.standard_normal((4, 1))
        y = np.hstack([x, np.zeros((4, 1))])  # pad to n >= 2 columns
        state = qsa.q_project(P, y)
        recon = (state.reshaped().real * state.global_scale)[:2, :1]
        assert np.max(np.abs(recon - P.T @ x)) <= 1e-6

    def test_full_chain_cosine(self):
        spec = SynthSpec(D=4, n_s=8, n_t=8, seed=3,
                         domain_shift=DomainShift(rotation_angle=0.7))
        source, target = synth_shifted_gaussians(spec)
        sc, _ = center_columns(source)
        tc, _ = center_columns(target)
        Ps, Pt = csa.pca_subspace(sc, 2), csa.pca_subspace(tc, 2)
        art = csa.build_alignment(Ps, Pt, sc, tc)
        chain = qsa.q_build_alignment(Ps, Pt, sc, tc, exact_theta=True)
        a = chain["X_hat_a"].ravel()
        b = art.X_hat_a.ravel()
        cosine = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
        assert cosine >= 0.999


class TestQuantumNn:
    def test_recovers_exact_match(self):
        X_hat_a = np.array([[0.0, 4.0, -4.0], [0.0, 4.0, 4.0]])
        labels = np.array([5, 6, 7])
        X_hat_t = X_hat_a[:, [1]]
        for seed in range(5):
            pred, _ = qsa.q_nn_classify(
                X_hat_a, labels, X_hat_t, ShotPlan(seed=seed)
            )
            assert pred[0] == 6

    def test_equidistant_warns(self):
        X_hat_a = np.array([[-1.0, 1.0]])
        labels = np.array([0, 1])
        X_hat_t = np.array([[0.0]])
        pred, diag = qsa.q_nn_classify(X_hat_a, labels, X_hat_t, EXACT)
        assert diag[0]["warning"] is not None
        assert pred[0] in (0, 1)

    def test_register_budget(self):
        with pytest.raises(ConfigurationError):
            qsa.q_nn_classify(np.ones((9, 4)), np.arange(4), np.ones((9, 2)), EXACT)

    def test_agreement_with_classical(self):
        agree = total = 0
        for seed in range(5):
            spec = SynthSpec(D=4, n_s=16, n_t=8, seed=seed,
                             domain_shift=DomainShift(rotation_angle=0.9))
            source, target = synth_shifted_gaussians(spec)
            sc, _ = center_columns(source)
            tc, _ = center_columns(target)
            Ps, Pt = csa.pca_subspace(sc, 2), csa.pca_subspace(tc, 2)
            art = csa.build_alignment(Ps, Pt, sc, tc)
            classical = csa.nn_classify(art.X_hat_a, sc.visible_labels, art.X_hat_t)
            quantum, _ = qsa.q_nn_classify(
                art.X_hat_a, sc.visible_labels, art.X_hat_t,
                ShotPlan(seed=seed), ae_bits=7, repeats=15,
            )
            agree += int(np.sum(quantum == classical))
            total += classical.size
        assert agree / total >= 0.95


class TestQsvm:
    def _toy(self):
        X = np.array([[1.0, -1.0], [0.2, -0.1]])
        return Domain(X, np.array([1, -1]))

    def test_readout_cosine(self):
        dom = self._toy()
        model = csa.svm_train(dom, np.eye(2), 1.0)
        qmodel = qsa.q_svm_train(dom, np.eye(2), 1.0, precision_qubits=10)
        b, alpha = qmodel.readout()
        u = np.concatenate(([b], alpha))
        v = np.concatenate(([model.b], model.alpha))
        cosine = u @ v / (np.linalg.norm(u) * np.linalg.norm(v))
        assert cosine >= 0.999

    def test_gamma_infinity_limit(self):
        # classical-oracle check: dropping the gamma^-1 diagonal vs 1e6
        dom = self._toy()
        K = dom.samples.T @ dom.samples
        n = dom.n
        def solve(K_gamma):
            F = np.zeros((n + 1, n + 1))
            F[0, 1:] = 1.0
            F[1:, 0] = 1.0
            F[1:, 1:] = K_gamma
            return np.linalg.solve(F, np.concatenate(([0.0], dom.labels.astype(float))))
        inf = solve(K)
        big = solve(K + np.eye(n) / 1e6)
        assert np.linalg.norm(inf - big) / np.linalg.norm(inf) <= 1e-3

    def test_row_cap(self):
        rng = np.random.default_rng(9)
        dom = Domain(rng.standard_normal((2, 16)), rng.choice([-1, 1], 16))
        with pytest.raises(ConfigurationError):
            qsa.q_svm_train(dom, np.eye(2), 1.0)

    def test_orthogonal_query_gets_bias_sign(self):
        X = np.array([[1.0, -1.0], [0.0, 0.0]])
        dom = Domain(X, np.array([1, -1]))
        A = np.diag([1.0, 0.0])
        qmodel = qsa.q_svm_train(dom, A, 1.0, precision_qubits=10)
        b, _ = qmodel.readout()
        xt = np.array([0.0, 5.0])  # A xt = 0: kernel column vanishes
        label, info = qsa.q_svm_classify(qmodel, dom, A, xt, EXACT)
        assert label == (1 if b >= 0 else -1)

    def test_grid_parity_exact_and_sampled(self):
        dom = self._toy()
        model = csa.svm_train(dom, np.eye(2), 1.0)
        qmodel = qsa.q_svm_train(dom, np.eye(2), 1.0, precision_qubits=10)
        grid = [np.array([gx, gy]) for gx in (-1.0, 0.0, 1.0) for gy in (-1.0, 0.0, 1.0)]
        shots = 4096
        for i, xt in enumerate(grid):
            label, info = qsa.q_svm_classify(qmodel, dom, np.eye(2), xt, EXACT)
            assert label == csa.svm_classify(model, xt)
            exact_val = info["decision_value"]
            s_label, s_info = qsa.q_svm_classify(
                qmodel, dom, np.eye(2), xt,
                ShotPlan(shots=shots, seed=1000 + i, mode="sampled"),
            )
            sigma = math.sqrt(max(1.0 - exact_val**2, 1e-12) / shots)
            assert abs(s_info["decision_value"] - exact_val) <= 3 * sigma + 1e-9


class TestEndToEndParity:
    def test_labels_agree_small_instances(self):
        for seed in range(3):
            spec = SynthSpec(D=3, n_s=10, n_t=6, seed=seed,
                             domain_shift=DomainShift(rotation_angle=0.8))
            source, target = synth_shifted_gaussians(spec)
            sc, _ = center_columns(source)
            tc, _ = center_columns(target)
            Ps, Pt = csa.pca_subspace(sc, 2), csa.pca_subspace(tc, 2)
            art = csa.build_alignment(Ps, Pt, sc, tc)
            chain = qsa.q_build_alignment(Ps, Pt, sc, tc, exact_theta=True)
            c_nn = csa.nn_classify(art.X_hat_a, sc.visible_labels, art.X_hat_t)
            q_nn, diag = qsa.q_nn_classify(
                chain["X_hat_a"], sc.visible_labels, chain["X_hat_t"],
                ShotPlan(seed=seed),
            )
            # any disagreement must be a declared AE-resolution ambiguity
            for j in np.flatnonzero(q_nn != c_nn):
                assert diag[j]["warning"] is not None
            model = csa.svm_train(sc, art.A, 1.0)
            qmodel = qsa.q_svm_train(sc, art.A, 1.0, precision_qubits=10)
            for j in range(tc.n):
                xt = tc.samples[:, j]
                assert (
                    qsa.q_svm_classify(qmodel, sc, art.A, xt, EXACT)[0]
                    == csa.svm_classify(model, xt)
                )

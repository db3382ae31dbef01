import numpy as np
import pytest

from qcflab.errors import ValidationError
from qcflab.linalg import matrix_pnorm, solve_tridiagonal
from qcflab.model import NormKind, finite_differences, inner_product, make_params, vector_norm
from qcflab.operators import (
    ConjugateKind,
    OperatorKind,
    apply_inv_lap_qcf,
    assemble,
    conjugate_iteration_matrix,
    conjugate_strain_operator,
    form_oracle,
    ghost_forces,
    integration_matrix,
    laplacian_matrix,
)

SYMMETRIC = ("ATOM", "LAPLACIAN", "QCL", "QNL", "QCE")
CASES = [(4, 1), (6, 2), (8, 2), (12, 5), (32, 8)]


def _dense_inv_lap_qcf(p, u):
    lap = laplacian_matrix(p.N)
    return solve_tridiagonal(np.diag(lap), np.diag(lap, 1), assemble(p, "QCF").matrix @ u)


def test_laplacian_n2():
    expected = 4 * np.array([[2.0, -1, 0], [-1, 2, -1], [0, -1, 2]])
    np.testing.assert_array_equal(laplacian_matrix(2), expected)


@pytest.mark.parametrize("N,K", CASES)
def test_qcf_collapses_without_next_nearest(N, K):
    p = make_params(N, K, 1.7, 0.0)
    qcf = assemble(p, "QCF").matrix
    np.testing.assert_array_equal(qcf, assemble(p, "QCL").matrix)
    np.testing.assert_array_equal(qcf, 1.7 * laplacian_matrix(N))


@pytest.mark.parametrize("N,K", CASES)
@pytest.mark.parametrize("kind", SYMMETRIC)
def test_symmetric_operators(N, K, kind):
    M = assemble(make_params(N, K, 1.0, -0.17), kind).matrix
    assert np.abs(M - M.T).max() == 0.0


@pytest.mark.parametrize("N,K", CASES)
def test_qcf_row_split(N, K):
    p = make_params(N, K, 1.0, -0.17)
    qcf = assemble(p, "QCF").matrix
    atom = assemble(p, "ATOM").matrix
    qcl = assemble(p, "QCL").matrix
    for j in range(-N + 1, N):
        src = atom if abs(j) <= K else qcl
        np.testing.assert_array_equal(qcf[j + N - 1], src[j + N - 1])


def test_qcl_is_scaled_laplacian():
    p = make_params(16, 3, 1.0, -0.2)
    np.testing.assert_array_equal(assemble(p, "QCL").matrix, p.A_F * laplacian_matrix(16))


def test_invalid_kind():
    with pytest.raises(ValidationError):
        assemble(make_params(8, 2, 1.0, -0.1), "FOO")


def test_operator_matmul():
    p = make_params(8, 2, 1.0, -0.1)
    op = assemble(p, OperatorKind.QCE)
    v = np.arange(15.0)
    np.testing.assert_array_equal(op @ v, op.matrix @ v)


@pytest.mark.parametrize("N", [4, 8, 32])
def test_atom_form_oracle(N, rng):
    p = make_params(N, min(2, N - 2), 1.0, -0.23)
    L = assemble(p, "ATOM").matrix
    for _ in range(50):
        u = rng.standard_normal(p.n)
        assert inner_product(p, L @ u, u) == pytest.approx(form_oracle(p, "ATOM", u), rel=1e-12)


def test_qce_form_oracle_n6_k2(rng):
    p = make_params(6, 2, 1.0, -0.2)
    L = assemble(p, "QCE").matrix
    for _ in range(100):
        u = rng.standard_normal(p.n)
        assert inner_product(p, L @ u, u) == pytest.approx(form_oracle(p, "QCE", u), rel=1e-12)


def test_form_oracle_trivial(rng):
    p = make_params(8, 2, 1.3, 0.0)
    assert form_oracle(p, "ATOM", np.zeros(p.n)) == 0.0
    u = rng.standard_normal(p.n)
    assert form_oracle(p, "ATOM", u) == pytest.approx(1.3 * vector_norm(p, u, NormKind(1, 2)) ** 2, rel=1e-13)


def test_qce_interface_mode():
    p = make_params(6, 2, 1.0, -0.2)
    N, K = 6, 2
    w = np.zeros(2 * N)
    w[-K - 1 + N - 1] = 1.0
    w[K + 2 + N - 1] = -1.0
    u = np.cumsum(w)[:-1] / N
    quotient = form_oracle(p, "QCE", u) / vector_norm(p, u, NormKind(1, 2)) ** 2
    assert quotient == pytest.approx(p.A_F + 0.5 * p.phi2_2F, rel=1e-12)


def test_ghost_forces_example():
    g = ghost_forces(make_params(8, 2, 1.0, -0.1), -1.0).values
    N = 8
    assert [g[j + N - 1] for j in (1, 2, 3, 4)] == [4.0, -4.0, -4.0, 4.0]
    np.testing.assert_array_equal(g[::-1], -g)
    assert g.sum() == 0.0
    assert not ghost_forces(make_params(8, 2, 1.0, -0.1), 0.0).values.any()


def test_ghost_forces_k1_centre_cancels():
    g = ghost_forces(make_params(8, 1, 1.0, -0.1), 2.0).values
    assert g[7] == 0.0
    assert g.sum() == 0.0


def test_ghost_forces_support_check():
    with pytest.raises(ValidationError):
        ghost_forces(make_params(8, 6, 1.0, -0.1), 1.0)



def test_inv_lap_qcf_trivial(rng):
    p = make_params(8, 2, 1.0, -0.1)
    assert not apply_inv_lap_qcf(p, np.zeros(p.n)).any()
    q = make_params(8, 2, 1.4, 0.0)
    u = rng.standard_normal(q.n)
    np.testing.assert_allclose(apply_inv_lap_qcf(q, u), 1.4 * u, rtol=1e-12, atol=1e-13)


@pytest.mark.parametrize("N,K", [(4, 1), (8, 2), (16, 7), (33, 10), (64, 16), (64, 62)])
def test_inv_lap_qcf_matches_dense(N, K, rng):
    p = make_params(N, K, 1.0, -0.21)
    for _ in range(10):
        u = rng.standard_normal(p.n)
        fast = apply_inv_lap_qcf(p, u)
        dense = _dense_inv_lap_qcf(p, u)
        err = vector_norm(p, fast - dense, NormKind(1, 2))
        assert err <= 1e-12 * vector_norm(p, dense, NormKind(1, 2))


@pytest.mark.parametrize("kind", list(ConjugateKind))
def test_conjugate_exact_on_strains(kind, rng):
    p = make_params(8, 2, 1.0, -0.15)
    H = conjugate_strain_operator(p, kind)
    lap = laplacian_matrix(8)
    src = {
        ConjugateKind.QCF_PRECONL: "QCF",
        ConjugateKind.QCE_OP: "QCE",
        ConjugateKind.QCF_OP: "QCF",
        ConjugateKind.QNL_OP: "QNL",
    }[kind]
    op = np.linalg.solve(lap, assemble(p, src).matrix)
    for _ in range(50):
        u = rng.standard_normal(p.n)
        lhs = H.matrix @ finite_differences(p, u)[0]
        rhs = finite_differences(p, op @ u)[0]
        assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, np.abs(rhs).max())


def test_conjugate_preconl_trivial(rng):
    p = make_params(8, 2, 1.3, 0.0)
    H = conjugate_strain_operator(p, "QCF_PRECONL").matrix
    w = rng.standard_normal(16)
    w -= w.mean()
    np.testing.assert_allclose(H @ w, 1.3 * w, atol=1e-13)


def test_conjugate_rejects_unknown():
    with pytest.raises(ValidationError):
        conjugate_strain_operator(make_params(8, 2, 1.0, -0.1), "ATOM")


def test_conjugate_iteration_matrix_is_exact(rng):
    p = make_params(8, 2, 1.0, -0.15)
    G = np.eye(p.n) - 0.5 * np.linalg.solve(laplacian_matrix(8), assemble(p, "QCF").matrix)
    for pp in (1, np.inf):
        Gh = conjugate_iteration_matrix(p, G, pp)
        u = rng.standard_normal(p.n)
        np.testing.assert_allclose(Gh @ finite_differences(p, u)[0], finite_differences(p, G @ u)[0], atol=1e-11)


def test_conjugate_norm_brackets_restricted_norm(rng):
    # the full-space l^inf norm dominates the ratio on any strain
    p = make_params(8, 2, 1.0, -0.15)
    G = np.eye(p.n) - 0.7 * np.linalg.solve(p.A_F * laplacian_matrix(8), assemble(p, "QCF").matrix)
    m = matrix_pnorm(conjugate_iteration_matrix(p, G), np.inf)
    C = integration_matrix(8)
    for _ in range(200):
        w = rng.standard_normal(16)
        w -= w.mean()
        r = np.abs(finite_differences(p, G @ (C @ w))[0]).max() / np.abs(w).max()
        assert r <= m * (1 + 1e-12)


def test_qnl_coercive(rng):
    for N, K in [(8, 2), (32, 8)]:
        p = make_params(N, K, 1.0, -0.2)
        L = assemble(p, "QNL").matrix
        for _ in range(50):
            u = rng.standard_normal(p.n)
            q = inner_product(p, L @ u, u)
            assert q >= p.A_F * vector_norm(p, u, NormKind(1, 2)) ** 2 - 1e-10

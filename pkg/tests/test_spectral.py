import math

import numpy as np
import pytest

from qcflab.errors import NoSignChange, SingularMatrix, UnstableParams, ValidationError
from qcflab.linalg import gen_sym_eigen, sym_eigen
from qcflab.model import make_params
from qcflab.operators import assemble, laplacian_matrix
from qcflab.spectral import (
    PotentialSpec,
    critical_strain,
    interface_eigen_direct,
    lambda_star,
    laplacian_spectral_factors,
    lennard_jones,
    nu_eps,
    qcf_eigenbasis_cond,
    qnl_u12_spectrum,
    similarity_residual,
    stability_constants,
)

# frozen from scipy.linalg.eigh on the QCE pencil at N = K + 10
LAMBDA_K1 = 0.6565972630107386
LAMBDA_K15 = 0.6595255058964553

LJ_CRITICAL = ((156 + 624 * 2.0**-14) / (84 + 336 * 2.0**-8)) ** (1 / 6)


def test_laplacian_factors(rng):
    p = make_params(16, 3, 1.0, -0.1)
    fac = laplacian_spectral_factors(p)
    lap = laplacian_matrix(16)
    v = rng.standard_normal(p.n)
    np.testing.assert_allclose(fac.sqrt(fac.sqrt(v)), lap @ v, rtol=1e-10, atol=1e-10 * np.abs(lap @ v).max())
    np.testing.assert_allclose(fac.inv_sqrt(fac.sqrt(v)), v, atol=1e-11)
    assert not fac.sqrt(np.zeros(p.n)).any()


def test_laplacian_factors_n2():
    j = np.arange(1, 4)
    np.testing.assert_allclose(laplacian_spectral_factors(2).eigenvalues, 16 * np.sin(j * np.pi / 8) ** 2, rtol=1e-15)
    np.testing.assert_allclose(np.sort(laplacian_spectral_factors(2).eigenvalues), np.linalg.eigvalsh(laplacian_matrix(2)), rtol=1e-13)


def test_qnl_spectrum_examples():
    np.testing.assert_array_equal(qnl_u12_spectrum(make_params(8, 2, 1.2, 0.0)), np.full(15, 1.2))
    mu = qnl_u12_spectrum(make_params(4, 1, 1.0, -0.125))
    np.testing.assert_allclose(mu, [0.5] * 4 + [0.573223, 0.75, 0.926777], atol=1e-6)


def test_qnl_spectrum_ratio_asymptote():
    gaps = []
    for K in (8, 16, 32):
        mu = qnl_u12_spectrum(make_params(2 * K + 4, K, 1.0, -0.125))
        gaps.append(abs(mu.max() / mu.min() - 1.0 / 0.5))
    assert gaps[1] / gaps[0] == pytest.approx(0.25, rel=0.2)
    assert gaps[2] / gaps[1] == pytest.approx(0.25, rel=0.2)


@pytest.mark.parametrize("N,K", [(4, 1), (8, 3), (16, 14), (32, 7)])
def test_qnl_spectrum_matches_pencil(N, K):
    p = make_params(N, K, 1.0, -0.2)
    lam = gen_sym_eigen(assemble(p, "QNL").matrix, laplacian_matrix(N)).eigenvalues
    np.testing.assert_allclose(lam, qnl_u12_spectrum(p), atol=1e-10 * p.A_F)


@pytest.mark.parametrize("N,K", [(8, 2), (32, 8)])
def test_similarity_residual(N, K):
    assert similarity_residual(make_params(N, K, 1.0, -0.15)) <= 1e-13
    assert similarity_residual(make_params(N, K, 1.0, 0.0)) == 0.0


def test_eigenbasis_trivial():
    assert qcf_eigenbasis_cond(make_params(16, 4, 1.0, 0.0)).cond_V == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(SingularMatrix):
        qcf_eigenbasis_cond(make_params(16, 4, 1.0, -0.25))


def test_eigenbasis_growth():
    Ns = (32, 64, 128, 256)
    conds = [qcf_eigenbasis_cond(make_params(N, N // 4, 1.0, -0.125)) for N in Ns]
    cv = [c.cond_V for c in conds]
    assert max(cv) / min(cv) <= 2.0
    slope = np.polyfit(np.log(Ns), np.log([c.cond_W for c in conds]), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.3)


def test_qnl_stability_is_af():
    for N, K, p2 in [(8, 2, -0.1), (32, 5, -0.2), (40, 38, -0.05)]:
        p = make_params(N, K, 1.0, p2)
        r = stability_constants(p, "QNL")
        assert r.inf_u12 == pytest.approx(p.A_F, rel=1e-9)
        assert math.isnan(r.lambda_K)


def test_qce_lambda_k15():
    r = stability_constants(make_params(64, 15, 1.0, -0.125), "QCE")
    assert r.lambda_K == pytest.approx(0.6595, abs=1e-3)
    assert r.lambda_K == pytest.approx(LAMBDA_K15, abs=1e-10)
    assert 0.5 <= r.lambda_K <= 1.0


def test_qce_lambda_k1_frozen():
    r = stability_constants(make_params(11, 1, 1.0, -0.125), "QCE")
    assert r.lambda_K == pytest.approx(LAMBDA_K1, abs=1e-12)


def test_stability_report_json_keys():
    d = stability_constants(make_params(16, 3, 1.0, -0.1), "ATOM").as_dict()
    assert list(d) == ["kind", "N", "K", "phi2_F", "phi2_2F", "inf_u12", "lambda_K", "nu_eps"]


def test_stability_unknown_kind():
    with pytest.raises(ValidationError):
        stability_constants(make_params(16, 3, 1.0, -0.1), "QCL_X")


def test_atom_stability_identity():
    for N in (16, 64):
        p = make_params(N, 3, 1.0, -0.125)
        r = stability_constants(p, "ATOM")
        assert r.inf_u12 == pytest.approx(p.A_F - p.eps**2 * r.nu_eps * p.phi2_2F, rel=1e-9)


def test_qcf_sym_coercivity_ratio_small_pair():
    # the 64 -> 256 pair from the module example; sits before the asymptotic regime
    infs = [stability_constants(make_params(N, N // 4, 1.0, -0.125), "QCF_SYM").inf_u12 for N in (64, 256)]
    assert infs[0] < 0 and infs[1] < 0
    assert infs[1] / infs[0] == pytest.approx(2.0, rel=0.25)


def test_qcf_sym_coercivity_ratio_large_pair():
    infs = [stability_constants(make_params(N, N // 4, 1.0, -0.125), "QCF_SYM").inf_u12 for N in (256, 1024)]
    assert infs[0] < 0 and infs[1] < 0
    assert infs[1] / infs[0] == pytest.approx(2.0, rel=0.25)


def test_nu_eps_stable():
    vals = [nu_eps(N) for N in (16, 64, 256)]
    assert min(vals) > 0
    assert max(vals) / min(vals) < 1.2


def test_lambda_star_constants():
    ls = lambda_star()
    assert ls.z_hat == pytest.approx(2.206272296, abs=1e-8)
    assert ls.lambda_hat == pytest.approx(4.659525505897, abs=1e-9)
    assert ls.lambda_star == pytest.approx(0.6595, abs=1e-4)
    assert ls.c == pytest.approx(1.5826, abs=1e-4)


def test_interface_direct():
    ls = lambda_star()
    assert interface_eigen_direct(15) - 4 == pytest.approx(0.6595, abs=1e-4)
    assert interface_eigen_direct(15) - 4 == pytest.approx(ls.lambda_star, abs=1e-6)
    for K in range(1, 21):
        assert 0.5 <= interface_eigen_direct(K) - 4 <= 1.0


def test_interface_direct_decay_rate():
    v = np.array([interface_eigen_direct(K) for K in range(6, 13)])
    d = np.abs(np.diff(v))
    np.testing.assert_allclose(np.log(d[1:] / d[:-1]), -lambda_star().c, rtol=0.1)


@pytest.mark.parametrize("K", [1, 2, 5, 10])
def test_interface_direct_matches_pencil(K):
    r = stability_constants(make_params(K + 10, K, 1.0, -0.125), "QCE")
    assert interface_eigen_direct(K) - 4 == pytest.approx(r.lambda_K, abs=1e-8)


def test_interface_unrestricted_differs():
    assert interface_eigen_direct(1, skew_only=False) - 4 > LAMBDA_K1 + 1e-3


def test_critical_strain_lj():
    assert critical_strain(lennard_jones()) == pytest.approx(LJ_CRITICAL, abs=1e-10)


def test_critical_strain_errors():
    with pytest.raises(NoSignChange):
        critical_strain(PotentialSpec(lambda F: 2.0))
    with pytest.raises(UnstableParams):
        critical_strain(PotentialSpec(lambda F: -1.0))


QNL_COND_CASES = [(16, 4, -0.125), (32, 5, -0.2), (64, 16, -0.05)]


@pytest.mark.parametrize("N,K,p2", QNL_COND_CASES)
def test_qnl_eigen_lower_bound(N, K, p2):
    p = make_params(N, K, 1.0, p2)
    assert sym_eigen(assemble(p, "QNL").matrix).eigenvalues[0] >= 2 * p.A_F - 1e-9


@pytest.mark.parametrize("N,K,p2", QNL_COND_CASES)
def test_qnl_eigen_upper_bound_printed(N, K, p2):
    p = make_params(N, K, 1.0, p2)
    lam = sym_eigen(assemble(p, "QNL").matrix).eigenvalues
    assert lam[-1] <= p.phi2_F / p.eps**2 + 1e-9
    assert lam[-1] / lam[0] <= p.phi2_F / (2 * p.A_F) / p.eps**2


@pytest.mark.parametrize("N,K,p2", QNL_COND_CASES)
def test_qnl_eigen_upper_bound_sharp(N, K, p2):
    p = make_params(N, K, 1.0, p2)
    lam = sym_eigen(assemble(p, "QNL").matrix).eigenvalues
    assert lam[-1] <= 4 * p.phi2_F / p.eps**2 + 1e-9
    assert lam[-1] / lam[0] <= 2 * p.phi2_F / p.A_F / p.eps**2


@pytest.mark.parametrize("c", [0.3, 2.5])
def test_scaling_invariance(c):
    p = make_params(24, 5, 1.0, -0.15)
    q = p.with_coefficients(c * p.phi2_F, c * p.phi2_2F)
    np.testing.assert_allclose(qnl_u12_spectrum(q), c * qnl_u12_spectrum(p), rtol=1e-10)
    a, b = stability_constants(p, "QCE"), stability_constants(q, "QCE")
    assert b.inf_u12 == pytest.approx(c * a.inf_u12, rel=1e-10)
    assert b.lambda_K == pytest.approx(a.lambda_K, rel=1e-10)
    assert b.nu_eps == pytest.approx(a.nu_eps, rel=1e-10)
    assert qcf_eigenbasis_cond(q).cond_V == pytest.approx(qcf_eigenbasis_cond(p).cond_V, rel=1e-10)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qcflab.errors import DimensionMismatch, NotSPD, ValidationError
from qcflab.model import (
    Displacement,
    NormKind,
    finite_differences,
    inner_product,
    make_params,
    vector_norm,
    weighted_norm,
)
from qcflab.operators import laplacian_matrix

INF = np.inf


def test_make_params_derives_eps_and_af():
    p = make_params(4, 1, 1.0, -0.125)
    assert p.eps == 0.25
    assert p.A_F == 0.5


def test_fig1_parameter_set():
    assert make_params(200, 8, 1.0, -0.125).A_F == 0.5


@pytest.mark.parametrize("args", [(4, 3, 1.0, -0.125), (3, 1, 1.0, -0.1), (8, 0, 1.0, -0.1), (8, 2, 0.0, -0.1), (8, 2, 1.0, 0.1)])
def test_make_params_rejects(args):
    with pytest.raises(ValidationError):
        make_params(*args)


def test_negative_af_is_allowed():
    assert make_params(8, 2, 1.0, -0.5).A_F == pytest.approx(-1.0)


def test_displacement_length_checked():
    p = make_params(4, 1, 1.0, 0.0)
    with pytest.raises(DimensionMismatch):
        Displacement(p, np.zeros(6))
    d = Displacement(p, np.arange(7.0))
    assert not d.values.flags.writeable
    assert d.strain.shape == (8,)


def test_finite_differences_small_chain():
    w, c, ext = finite_differences(2, [0.0, 1.0, 0.0])
    np.testing.assert_array_equal(w, [0, 2, -2, 0])
    np.testing.assert_array_equal(c, [4, -8, 4])
    np.testing.assert_array_equal(ext, [0, 4, -8, 4, 0])


def test_finite_differences_zero():
    w, c, ext = finite_differences(5, np.zeros(9))
    assert not w.any() and not c.any() and not ext.any()


def test_finite_differences_dimension():
    with pytest.raises(DimensionMismatch):
        finite_differences(4, np.zeros(5))


@pytest.mark.parametrize("kind, expected", [(NormKind(1, INF), 2.0), (NormKind(1, 2), 2.0), (NormKind(0, 2), np.sqrt(0.5))])
def test_vector_norm_examples(kind, expected):
    assert vector_norm(2, [0.0, 1.0, 0.0], kind) == pytest.approx(expected, rel=1e-15)


def test_inner_product_examples():
    assert inner_product(2, [0, 1, 0], [0, 1, 0]) == 0.5
    assert inner_product(2, [1, 0, 0], [0, 1, 0]) == 0.0
    assert inner_product(2, [1, 1, 1], [1, -1, 1]) == 0.5


def test_weighted_norm(rng):
    p = make_params(8, 2, 1.0, -0.1)
    v = rng.standard_normal(p.n)
    assert weighted_norm(p, v, np.eye(p.n)) == pytest.approx(vector_norm(p, v, NormKind(0, 2)), rel=1e-14)
    assert weighted_norm(p, v, laplacian_matrix(8)) == pytest.approx(vector_norm(p, v, NormKind(1, 2)), rel=1e-12)
    assert weighted_norm(p, np.zeros(p.n), np.eye(p.n)) == 0.0
    with pytest.raises(NotSPD):
        weighted_norm(p, v, -np.eye(p.n))


def test_norm_kind_parse():
    assert NormKind.parse("1,inf") == NormKind(1, INF)
    assert NormKind.parse(" 2 , 1 ") == NormKind(2, 1)
    assert str(NormKind(0, 2)) == "0,2"
    with pytest.raises(ValidationError):
        NormKind.parse("3,1")
    with pytest.raises(ValidationError):
        NormKind.parse("1")


@pytest.mark.parametrize("N", [4, 16, 64])
def test_poincare_and_inverse_on_random_vectors(N, rng):
    for _ in range(200):
        v = rng.standard_normal(2 * N - 1)
        a = vector_norm(N, v, NormKind(1, INF))
        b = vector_norm(N, v, NormKind(2, INF))
        assert a <= 0.5 * b
        assert b <= 2 * N * a * (1 + 1e-14)


@pytest.mark.parametrize("N", [4, 16, 64])
def test_sharp_poincare_constant(N):
    # the parabola attains (2N-1)/(2N), so no constant below that works
    x = np.arange(-N + 1, N) / N
    u = 0.5 * (1 - x**2)
    a = vector_norm(N, u, NormKind(1, INF))
    b = vector_norm(N, u, NormKind(2, INF))
    assert a / b == pytest.approx((2 * N - 1) / (2 * N), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(N=st.integers(4, 40), data=st.data())
def test_poincare_sharp_bound_holds(N, data):
    v = data.draw(arrays(float, 2 * N - 1, elements=st.floats(-1e3, 1e3)))
    a = vector_norm(N, v, NormKind(1, INF))
    b = vector_norm(N, v, NormKind(2, INF))
    assert a <= (2 * N - 1) / (2 * N) * b * (1 + 1e-12) + 1e-9


@settings(max_examples=60, deadline=None)
@given(N=st.integers(4, 64), data=st.data())
def test_strain_sums_to_zero(N, data):
    v = data.draw(arrays(float, 2 * N - 1, elements=st.floats(-1e3, 1e3)))
    w = finite_differences(N, v)[0]
    assert abs(w.sum() / N) <= 1e-13 * 2 * N * max(1.0, np.abs(w).max() / N)


@settings(max_examples=40, deadline=None)
@given(N=st.integers(4, 64), data=st.data())
def test_laplacian_form_is_strain_norm(N, data):
    v = data.draw(arrays(float, 2 * N - 1, elements=st.floats(-10, 10)))
    q = inner_product(N, laplacian_matrix(N) @ v, v)
    s = vector_norm(N, v, NormKind(1, 2)) ** 2
    assert q == pytest.approx(s, rel=1e-12, abs=1e-12)

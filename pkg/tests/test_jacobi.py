import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from grassgeo import AlgebraShape, Element
from grassgeo.errors import ValidationError
from grassgeo.grassmann import TangentVector, curvature
from grassgeo.jacobi import (
    apply_fn_of_ad,
    codiagonal_skew_basis,
    coordinates,
    dexp,
    dexp_matrix,
    jacobi_field,
    lie_dexp,
    scalar_function,
)
from grassgeo.matcore import trace_inner
from grassgeo import oracle
from grassgeo.sampling import random_element, random_projection, random_shape, random_tangent, random_unit_state

seeds = st.integers(0, 2**32 - 1)


def _skew(a):
    return (a - a.H) * 0.5


def test_cardinal_functions_at_zero_and_away():
    z = np.array([0.0, 0.3j, 1.2, -2.0 + 0.5j])
    nz = z[1:]
    assert scalar_function("sinhc")(z)[0] == 1
    assert np.allclose(scalar_function("sinhc")(nz), np.sinh(nz) / nz)
    assert np.allclose(scalar_function("F")(nz), (1 - np.exp(-nz)) / nz)
    assert np.allclose(scalar_function("G")(nz), (np.exp(nz) - 1) / nz)
    assert scalar_function("F")(z)[0] == 1 and scalar_function("G")(z)[0] == 1
    with pytest.raises(ValidationError):
        scalar_function("tanh")


@given(seeds)
def test_function_of_ad_against_independent_oracle(seed):
    rng = np.random.default_rng(seed)
    sh = random_shape(rng, max_dim=5)
    v, x = _skew(random_element(rng, sh)), random_element(rng, sh)
    T = rng.uniform(0.1, 4.0)
    assert (apply_fn_of_ad(v, "sinhc", T, x) - oracle.sinhc_ad(v, T, x)).norm() < 1e-10 * (1 + x.norm())
    assert (apply_fn_of_ad(v, "one", T, x) - x).norm() < 1e-12 * (1 + x.norm())


@given(seeds)
def test_cosh_of_ad_is_the_conjugation_average(seed):
    rng = np.random.default_rng(seed)
    sh = random_shape(rng, max_dim=4)
    v, x = _skew(random_element(rng, sh)), random_element(rng, sh)
    t = rng.uniform(-2, 2)
    # e^{t ad v} x = e^{tv} x e^{-tv}
    plus = oracle.expm(t * v) @ x @ oracle.expm(-t * v)
    minus = oracle.expm(-t * v) @ x @ oracle.expm(t * v)
    assert (apply_fn_of_ad(v, "cosh", t, x) - (plus + minus) * 0.5).norm() < 1e-10 * (1 + x.norm())


@given(seeds)
def test_jacobi_field_initial_data(seed):
    rng = np.random.default_rng(seed)
    st_ = random_unit_state(rng, random_shape(rng, max_dim=5))
    X, Y = random_tangent(rng, st_.P), random_tangent(rng, st_.P)
    assert (jacobi_field(st_, X, Y, 0.0).x - X.x).norm() < 1e-12 * (1 + X.norm())
    # with zero initial value the field is t times the exponential differential
    zero = TangentVector(st_.P, Element.zeros(st_.shape))
    t = rng.uniform(0.2, 3.0)
    assert (jacobi_field(st_, zero, Y, t).x - t * dexp(st_, t, Y).x).norm() < 1e-10 * (1 + Y.norm())


@given(seeds)
def test_jacobi_field_matches_variation(seed):
    rng = np.random.default_rng(seed)
    st_ = random_unit_state(rng, random_shape(rng, max_dim=6))
    X, Y = random_tangent(rng, st_.P), random_tangent(rng, st_.P)
    t = rng.uniform(0.2, 3.0)
    mu = jacobi_field(st_, X, Y, t)
    assert oracle.fd_variation_check(st_, X, Y, t, h=1e-4) / mu.x.norm() < 1e-6


@given(seeds)
def test_jacobi_equation(seed):
    """D^2 mu = R(mu, gamma') gamma' with R(X, Y)Z = -[[X, Y], Z].

    e^{tv} is the horizontal lift of the geodesic, so after pulling fields back
    by it the covariant derivative is the plain time derivative.
    """
    rng = np.random.default_rng(seed)
    st_ = random_unit_state(rng, random_shape(rng, max_dim=4))
    X, Y = random_tangent(rng, st_.P), random_tangent(rng, st_.P)
    t, h = rng.uniform(0.2, 2.0), 1e-3

    def pulled(s):
        u = st_.exp_tv(s)
        return u.H @ jacobi_field(st_, X, Y, s).x @ u

    m = [pulled(t - h), pulled(t), pulled(t + h)]
    d2 = (m[0] - 2.0 * m[1] + m[2]) * (1 / h**2)
    rhs = curvature(st_.P, m[1], st_.V.x, st_.V.x)
    assert (d2 - rhs).norm() < 1e-5 * (1 + m[1].norm())


@given(seeds)
def test_dexp_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    st_ = random_unit_state(rng, random_shape(rng, max_dim=6))
    Y = random_tangent(rng, st_.P)
    T = rng.uniform(0.1, 3.0)
    ref = dexp(st_, T, Y).x.norm()
    assert oracle.fd_dexp_check(st_, T, Y) / max(ref, 1e-12) < 1e-6


@given(seeds)
def test_lie_dexp_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    sh = random_shape(rng, max_dim=5)
    v, w = _skew(random_element(rng, sh)), _skew(random_element(rng, sh))
    assert oracle.fd_lie_dexp_check(v, w) < 1e-7


@given(seeds)
def test_codiagonal_basis_is_orthonormal(seed):
    rng = np.random.default_rng(seed)
    sh = random_shape(rng, max_dim=5)
    P = random_projection(rng, sh)
    basis = codiagonal_skew_basis(P)
    want = sum(r * (b.dim - r) * (2 if b.field == "C" else 1) for r, b in zip(P.ranks(), sh))
    assert len(basis) == want
    gram = np.array([[trace_inner(a, b) for b in basis] for a in basis])
    assert np.allclose(gram, np.eye(len(basis)), atol=1e-12)
    for b in basis:
        assert b.is_skew(1e-12)
        assert (P.p @ b @ P.p).norm() < 1e-12


def test_coordinates_refuse_elements_outside_the_span(rng):
    P = random_projection(rng, AlgebraShape.of(3))
    with pytest.raises(ValidationError):
        coordinates(codiagonal_skew_basis(P), Element.identity(P.shape) * 1j, tol=1e-9)


@given(seeds)
def test_dexp_matrix_against_vectorized_oracle(seed):
    rng = np.random.default_rng(seed)
    st_ = random_unit_state(rng, random_shape(rng, max_dim=6))
    T = rng.uniform(0.1, 4.0)
    basis = codiagonal_skew_basis(st_.P)
    ref = oracle.vectorize(lambda b: oracle.sinhc_ad(st_.v, T, b), basis).matrix
    m = dexp_matrix(st_, T)
    assert np.max(np.abs(m - ref)) < 1e-10
    # sinhc is even and ad v is skew-adjoint, so the matrix is symmetric
    assert np.allclose(m, m.T, atol=1e-12)


def test_dexp_matrix_at_zero_is_identity(rng):
    st_ = random_unit_state(rng, AlgebraShape.of(4, (3, "R")))
    m = dexp_matrix(st_, 0.0)
    assert np.allclose(m, np.eye(m.shape[0]), atol=1e-14)


def test_dexp_is_singular_exactly_at_conjugate_times():
    sh = AlgebraShape.of(3)
    P = Element(sh, [np.diag([1.0, 0, 0])])
    V = Element(sh, [np.array([[0, 1.0, 0], [1.0, 0, 0], [0, 0, 0]])])
    from grassgeo.grassmann import GeodesicState

    st_ = GeodesicState.from_elements(P, V)
    s = lambda T: np.linalg.svd(dexp_matrix(st_, T), compute_uv=False)
    assert np.sum(s(math.pi / 2) < 1e-9) == 1
    assert np.sum(s(math.pi) < 1e-9) == 3
    assert np.sum(s(1.0) < 1e-9) == 0


def test_jacobi_needs_tangent_vectors_at_the_base(rng):
    st_ = random_unit_state(rng, AlgebraShape.of(3))
    other = random_projection(rng, st_.shape)
    with pytest.raises(ValidationError):
        jacobi_field(st_, random_tangent(rng, other), random_tangent(rng, st_.P), 1.0)
    with pytest.raises(ValidationError):
        jacobi_field(st_, st_.V.x, st_.V, 1.0)

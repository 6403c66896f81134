import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from grassgeo import AlgebraShape, Element
from grassgeo.errors import ValidationError
from grassgeo.grassmann import (
    GeodesicState,
    Projection,
    TangentVector,
    christoffel,
    codiagonal_projection,
    complex_structure,
    covariant_derivative,
    curvature,
    exp_map,
    geodesic_block_formula,
    geodesic_eval,
    geodesic_symmetry,
    geodesic_velocity,
    horizontal_lift,
    kks_form,
    moment,
    parallel_transport_geodesic,
    parallel_transport_path,
    sectional,
    skew_from_tangent,
    tangent,
    tangent_from_skew,
)
from grassgeo.matcore import bracket, expm_skew, trace_inner
from grassgeo.sampling import (
    haar_unitary,
    random_element,
    random_projection,
    random_shape,
    random_tangent,
    random_unit_state,
)

seeds = st.integers(0, 2**32 - 1)


def _cp1():
    sh = AlgebraShape.of(2)
    P = Projection(Element(sh, [np.diag([1.0, 0.0])]))
    X = TangentVector(P, Element(sh, [np.array([[0, 1.0], [1.0, 0]]) / math.sqrt(2)]))
    return P, X


def test_projection_validation():
    with pytest.raises(ValidationError):
        Projection(Element(AlgebraShape.of(2), [np.diag([2.0, 0.0])]))


def test_tangent_vector_must_be_codiagonal():
    P, _ = _cp1()
    with pytest.raises(ValidationError):
        TangentVector(P, Element(P.shape, [np.eye(2)]))


@given(seeds)
def test_tangent_and_generator_roundtrip(seed):
    rng = np.random.default_rng(seed)
    P = random_projection(rng, random_shape(rng, max_dim=5))
    X = random_tangent(rng, P)
    x = X.generator
    assert x.is_skew(1e-10)
    assert (tangent_from_skew(x, P).x - X.x).norm() < 1e-12
    assert (skew_from_tangent(X) - x).norm() < 1e-12
    a = random_element(rng, P.shape)
    c = codiagonal_projection(a, P)
    assert (codiagonal_projection(c, P) - c).norm() < 1e-12
    assert (P.p @ c @ P.p).norm() < 1e-12


@given(seeds)
def test_geodesics_stay_on_the_orbit(seed):
    rng = np.random.default_rng(seed)
    st_ = random_unit_state(rng, random_shape(rng, max_dim=5))
    t = rng.uniform(-4, 4)
    Q = geodesic_eval(st_, t)
    assert Q.ranks() == st_.P.ranks()
    assert (Q.p @ Q.p - Q.p).norm() < 1e-10


@given(seeds)
def test_block_formula_matches_conjugation(seed):
    rng = np.random.default_rng(seed)
    st_ = random_unit_state(rng, random_shape(rng, max_dim=6))
    for t in rng.uniform(-6, 6, size=4):
        u = expm_skew(t * st_.v)
        assert (geodesic_block_formula(st_, t) - u @ st_.P.p @ u.H).norm() < 1e-10


@given(seeds)
def test_velocity_matches_finite_difference(seed):
    rng = np.random.default_rng(seed)
    st_ = random_unit_state(rng, random_shape(rng, max_dim=4))
    t, h = rng.uniform(-2, 2), 1e-5
    fd = (geodesic_eval(st_, t + h).p - geodesic_eval(st_, t - h).p) * (1 / (2 * h))
    assert (fd - geodesic_velocity(st_, t).x).norm() < 1e-8


def test_exp_map_agrees_with_geodesic(rng):
    st_ = random_unit_state(rng, AlgebraShape.of(4, (3, "R")))
    assert (exp_map(st_.P, st_.V).p - geodesic_eval(st_, 1.0).p).norm() < 1e-12


def test_unnormalized_speed_is_rejected_unless_asked(rng):
    P = random_projection(rng, AlgebraShape.of(3))
    V = random_tangent(rng, P) * 3.0
    st_ = GeodesicState.from_tangent(V, normalize=True)
    assert st_.speed == pytest.approx(1.0)


@given(seeds)
def test_christoffel_is_symmetric(seed):
    rng = np.random.default_rng(seed)
    P = random_projection(rng, random_shape(rng, max_dim=5))
    X, Y = random_tangent(rng, P), random_tangent(rng, P)
    assert (christoffel(P, X, Y) - christoffel(P, Y, X)).norm() < 1e-12 * (1 + X.norm() * Y.norm())


@given(seeds)
def test_curvature_identities(seed):
    rng = np.random.default_rng(seed)
    P = random_projection(rng, random_shape(rng, max_dim=4))
    X, Y, Z, W = (random_tangent(rng, P) for _ in range(4))
    R = lambda a, b, c: curvature(P, a, b, c)
    # the curvature of a tangent triple is tangent
    assert (codiagonal_projection(R(X, Y, Z), P) - R(X, Y, Z)).norm() < 1e-10
    # antisymmetry and first Bianchi identity
    assert (R(X, Y, Z) + R(Y, X, Z)).norm() < 1e-10
    assert (R(X, Y, Z) + R(Y, Z, X) + R(Z, X, Y)).norm() < 1e-10
    # pair symmetry
    lhs = trace_inner(R(X, Y, Z), W.x)
    rhs = trace_inner(R(Z, W, X), Y.x)
    assert lhs == pytest.approx(rhs, abs=1e-9)


@given(seeds)
def test_sectional_curvature_is_nonnegative(seed):
    rng = np.random.default_rng(seed)
    P = random_projection(rng, random_shape(rng, max_dim=4))
    X, Y = random_tangent(rng, P), random_tangent(rng, P)
    # Gram-Schmidt in the trace inner product
    x = X.x * (1 / X.x.fro())
    y = Y.x - trace_inner(Y.x, x) * x
    # a one-dimensional tangent space has no planes
    assume(y.fro() > 1e-6 * Y.x.fro())
    y = y * (1 / y.fro())
    k = sectional(P, x, y)
    assert k >= -1e-12
    assert k == pytest.approx(bracket(x, y).fro() ** 2, abs=1e-10)


def test_sectional_on_the_projective_line():
    P, X = _cp1()
    JX = complex_structure(P, X)
    assert sectional(P, X, JX) == pytest.approx(2.0)


def test_sectional_requires_orthonormal_input():
    P, X = _cp1()
    with pytest.raises(ValidationError):
        sectional(P, X, X)


@given(seeds)
def test_complex_structure_and_kks_form(seed):
    rng = np.random.default_rng(seed)
    P = random_projection(rng, random_shape(rng, max_dim=4, fields="C"))
    X, Y = random_tangent(rng, P), random_tangent(rng, P)
    JX = complex_structure(P, X)
    assert (complex_structure(P, JX).x + X.x).norm() < 1e-12
    assert trace_inner(JX.x, JX.x) == pytest.approx(trace_inner(X.x, X.x))
    assert kks_form(P, X, Y) == pytest.approx(-kks_form(P, Y, X), abs=1e-10)
    assert kks_form(P, X, JX) == pytest.approx(X.x.fro() ** 2)


def test_complex_structure_needs_complex_blocks(rng):
    P = random_projection(rng, AlgebraShape.of((3, "R")))
    with pytest.raises(ValidationError):
        complex_structure(P, random_tangent(rng, P))


@given(seeds)
def test_moment_map_is_equivariant(seed):
    rng = np.random.default_rng(seed)
    sh = random_shape(rng, max_dim=4)
    P = random_projection(rng, sh)
    a = random_element(rng, sh)
    x = (a - a.H) * 0.5
    u = Element(sh, [haar_unitary(rng, b.dim, b.field) for b in sh])
    moved = Projection(u @ P.p @ u.H)
    assert moment(moved, x) == pytest.approx(moment(P, u.H @ x @ u), abs=1e-10)


def test_moment_of_scalar_rotation_counts_rank():
    sh = AlgebraShape.of(3)
    P = Projection(Element(sh, [np.diag([1.0, 1.0, 0.0])]))
    assert moment(P, Element(sh, [1j * np.eye(3)])) == pytest.approx(-2.0)


@given(seeds)
def test_geodesic_symmetry_reverses_geodesics(seed):
    rng = np.random.default_rng(seed)
    st_ = random_unit_state(rng, random_shape(rng, max_dim=4))
    t = rng.uniform(-2, 2)
    assert (geodesic_symmetry(st_.P, geodesic_eval(st_, t)).p - geodesic_eval(st_, -t).p).norm() < 1e-10
    assert (geodesic_symmetry(st_.P, st_.P).p - st_.P.p).norm() < 1e-12


@given(seeds)
def test_parallel_transport_is_an_isometry(seed):
    rng = np.random.default_rng(seed)
    st_ = random_unit_state(rng, random_shape(rng, max_dim=4))
    X, Y = random_tangent(rng, st_.P), random_tangent(rng, st_.P)
    t = rng.uniform(-3, 3)
    tx, ty = parallel_transport_geodesic(st_, X, t), parallel_transport_geodesic(st_, Y, t)
    assert trace_inner(tx.x, ty.x) == pytest.approx(trace_inner(X.x, Y.x), abs=1e-10)
    assert (parallel_transport_geodesic(st_, st_.V, t).x - geodesic_velocity(st_, t).x).norm() < 1e-12


def test_sampled_transport_matches_closed_form(rng):
    st_ = random_unit_state(rng, AlgebraShape.of(3, (3, "R")))
    X = random_tangent(rng, st_.P)
    times = np.linspace(0, 1.5, 101)
    path = [geodesic_eval(st_, t) for t in times]
    moved = parallel_transport_path(path, X, times)
    assert (moved.x - parallel_transport_geodesic(st_, X, 1.5).x).norm() < 1e-7


def test_horizontal_lift_along_a_geodesic_is_the_one_parameter_group(rng):
    st_ = random_unit_state(rng, AlgebraShape.of(4))
    times = np.linspace(0, 1, 81)
    us = horizontal_lift([geodesic_eval(st_, t) for t in times], times)
    assert (us[-1] - st_.exp_tv(1.0)).norm() < 1e-7


def test_coarse_paths_are_refused(rng):
    st_ = random_unit_state(rng, AlgebraShape.of(3))
    times = np.linspace(0, 2, 6)
    with pytest.raises(ValidationError):
        horizontal_lift([geodesic_eval(st_, t) for t in times], times)


@given(seeds)
def test_covariant_derivative_presentations_agree(seed):
    rng = np.random.default_rng(seed)
    st_ = random_unit_state(rng, random_shape(rng, max_dim=4))
    X = random_tangent(rng, st_.P)
    times = np.linspace(0, 1, 121)
    path = [geodesic_eval(st_, t) for t in times]
    # a non-parallel field: the transported X scaled by t^2
    field = [parallel_transport_geodesic(st_, X, t).x * (t * t) for t in times]
    hor = covariant_derivative(path, field, times, "horizontal", check=False)
    red = covariant_derivative(path, field, times, "reductive", check=False)
    assert max((a - b).norm() for a, b in zip(hor, red)) < 1e-6
    want = [parallel_transport_geodesic(st_, X, t).x * (2 * t) for t in times]
    assert max((a - b).norm() for a, b in zip(hor, want)) < 1e-6


@given(seeds)
def test_geodesics_are_autoparallel(seed):
    rng = np.random.default_rng(seed)
    st_ = random_unit_state(rng, random_shape(rng, max_dim=4))
    times = np.linspace(0, 1, 61)
    path = [geodesic_eval(st_, t) for t in times]
    vel = [geodesic_velocity(st_, t) for t in times]
    acc = covariant_derivative(path, vel, times)
    assert max(a.norm() for a in acc) < 1e-6

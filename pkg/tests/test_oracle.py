import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from grassgeo import AlgebraShape, Element
from grassgeo import oracle
from grassgeo.errors import CrossCheckError, ValidationError
from grassgeo.jacobi import codiagonal_skew_basis
from grassgeo.matcore import trace_inner
from grassgeo.sampling import random_element, random_projection, random_shape

seeds = st.integers(0, 2**32 - 1)


@given(seeds)
def test_adapted_basis_spans_the_same_space_as_the_canonical_one(seed):
    rng = np.random.default_rng(seed)
    P = random_projection(rng, random_shape(rng, max_dim=5))
    a, b = oracle.adapted_basis(P.p), codiagonal_skew_basis(P)
    assert len(a) == len(b)
    cross = np.array([[trace_inner(x, y) for y in b] for x in a])
    # the change of basis between two orthonormal bases is orthogonal
    assert np.allclose(cross @ cross.T, np.eye(len(a)), atol=1e-10)


def test_nullity_of_explicit_matrices():
    assert oracle.nullity(np.diag([1.0, 1e-12, 0.5, 0.0]))[0] == 2
    assert oracle.nullity(np.eye(3))[0] == 0
    # scale invariance: only relative singular values matter
    assert oracle.nullity(1e-8 * np.diag([1.0, 0.5]))[0] == 0


def test_vectorize_detects_images_outside_the_span(rng):
    P = random_projection(rng, AlgebraShape.of(3))
    basis = oracle.adapted_basis(P.p)
    with pytest.raises(CrossCheckError):
        oracle.vectorize(lambda x: x @ x + P.p, basis)


def test_vectorize_needs_orthonormal_basis(rng):
    P = random_projection(rng, AlgebraShape.of(3))
    basis = [b * 2.0 for b in oracle.adapted_basis(P.p)]
    with pytest.raises(ValidationError):
        oracle.vectorize(lambda x: x, basis)


def test_identity_vectorizes_to_identity(rng):
    P = random_projection(rng, AlgebraShape.of(4, (3, "R")))
    op = oracle.vectorize(lambda x: x, oracle.adapted_basis(P.p))
    assert np.allclose(op.matrix, np.eye(op.matrix.shape[0]), atol=1e-12)


def test_sinhc_ad_on_commuting_input():
    sh = AlgebraShape.of(2)
    v = Element(sh, [np.diag([1j, -1j])])
    x = Element(sh, [np.array([[0, 1.0], [0, 0]])])
    # ad v scales the (1, 2) entry by 2i, and sinh(2iT)/(2iT) = sin(2T)/(2T)
    T = 0.7
    out = oracle.sinhc_ad(v, T, x)
    assert out.blocks[0][0, 1] == pytest.approx(math.sin(2 * T) / (2 * T))


def test_sinhc_ad_defective_fallback():
    # a non-normal generator exercises the Schur path of the eigen-solver
    sh = AlgebraShape.of(2)
    v = Element(sh, [np.array([[0.0, 1.0], [0.0, 1e-9]])])
    x = Element(sh, [np.eye(2)])
    out = oracle.sinhc_ad(v, 1.0, x)
    assert np.all(np.isfinite(out.blocks[0]))
    assert np.allclose(out.blocks[0], np.eye(2), atol=1e-6)


@pytest.mark.parametrize("N", [8, 16, 32])
def test_discretized_epi_demo(N):
    ms, null = oracle.discretized_epi_demo(N)
    assert null == 0
    assert ms == pytest.approx(2 / N, abs=1e-12)


def test_discretized_epi_demo_rejects_bad_sizes():
    with pytest.raises(ValidationError):
        oracle.discretized_epi_demo(1)


def test_brute_force_join_finds_a_rotation(rng):
    sh = AlgebraShape.of(3)
    P = random_projection(rng, sh, ranks=[1])
    Q = random_projection(rng, sh, ranks=[1])
    assert oracle.join_exists_bruteforce(P.p, Q.p)
    R = random_projection(rng, sh, ranks=[2])
    assert not oracle.join_exists_bruteforce(P.p, R.p)


@given(seeds)
def test_oracle_exponential_agrees_with_spectral_one(seed):
    from grassgeo.matcore import expm_skew

    rng = np.random.default_rng(seed)
    sh = random_shape(rng, max_dim=5)
    a = random_element(rng, sh)
    x = (a - a.H) * 0.5
    assert (oracle.expm(x) - expm_skew(x)).norm() < 1e-11

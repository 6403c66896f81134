import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from grassgeo import AlgebraShape, Element
from grassgeo.conjugate import (
    Classification,
    classify,
    classify_all,
    conjugate_times,
    eigen_witness_kernel,
    kernel_residual,
    mu_set,
    projective_reference,
    resonant_values,
)
from grassgeo.errors import ValidationError
from grassgeo.grassmann import GeodesicState
from grassgeo.matcore import trace_inner
from grassgeo.sampling import haar_unitary, planted_first_conjugate, random_shape, random_unit_state
from grassgeo.scenarios import pocos_state, projective_state

seeds = st.integers(0, 2**32 - 1)


def _independent(vectors) -> int:
    if not vectors:
        return 0
    g = np.array([[trace_inner(a.x, b.x) for b in vectors] for a in vectors])
    return int(np.sum(np.linalg.eigvalsh(g) > 1e-10 * np.max(np.diag(g))))


def test_candidate_times_of_projective_plane():
    st_ = projective_state(3, "C")
    times = [ct.T for ct in conjugate_times(st_, 2 * math.pi + 1e-9)]
    assert times == pytest.approx([math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi])
    first = conjugate_times(st_, 2.0)[0]
    assert {(k, abs(s - sp)) for k, s, sp in first.witnesses} == {(1, 2.0)}


def test_candidate_times_need_unit_speed():
    st_ = projective_state(3, "C").with_speed(2.0)
    with pytest.raises(ValidationError):
        conjugate_times(st_, 5.0)


@pytest.mark.parametrize("field", ["C", "R"])
@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_projective_orders(n, field):
    st_ = projective_state(n, field)
    table = projective_reference(n, field)
    reports = classify_all(st_, 3 * math.pi)
    assert reports, "projective geodesics always have candidate times"
    for r in reports:
        want = next((row.order for row in table if row.contains(r.time.T)), 0)
        assert r.order == want == r.oracle_nullity


def test_projective_reference_values():
    odd, even = projective_reference(4, "C")
    assert (odd.order, even.order) == (1, 5)
    odd, even = projective_reference(4, "R")
    assert (odd.order, even.order) == (0, 2)
    assert projective_reference(2, "R") == []
    with pytest.raises(ValidationError):
        projective_reference(1)


def test_first_conjugate_point_on_the_complex_projective_line_has_order_one():
    rep = classify(projective_state(2, "C"), math.pi / 2)
    assert rep.classification is Classification.MONOCONJUGATE
    assert rep.order == 1


def test_non_candidate_times_are_not_conjugate():
    rep = classify(projective_state(3, "C"), 1.0)
    assert rep.classification is Classification.NOT_CONJUGATE
    assert rep.order == 0 and rep.kernel.total_dim == 0


@pytest.mark.parametrize("field", ["C", "R"])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_planted_first_conjugate_order(field, d):
    rng = np.random.default_rng(100 * d + (field == "R"))
    want = d * d if field == "C" else (d * d - d) // 2
    for _ in range(3):
        st_ = planted_first_conjugate(rng, int(rng.integers(2 * d, 9)), field, d)
        rep = classify(st_, math.pi / 2)
        assert rep.order == want
        assert len(rep.kernel.T_part) == 0


@given(seeds)
def test_kernel_vectors_are_independent_and_annihilated(seed):
    rng = np.random.default_rng(seed)
    st_ = random_unit_state(rng, random_shape(rng, max_dim=4, max_blocks=2))
    for rep in classify_all(st_, 2 * math.pi):
        vecs = rep.kernel.vectors()
        assert _independent(vecs) == rep.order
        for w in vecs:
            assert kernel_residual(st_, rep.time.T, w) < 1e-9


@given(seeds)
def test_orders_are_unitarily_invariant(seed):
    rng = np.random.default_rng(seed)
    sh = random_shape(rng, max_dim=4, max_blocks=2)
    st_ = random_unit_state(rng, sh)
    u = Element(sh, [haar_unitary(rng, b.dim, b.field) for b in sh])
    moved = GeodesicState.from_elements(u @ st_.P.p @ u.H, u @ st_.V.x @ u.H)
    a = [(round(r.time.T, 8), r.order) for r in classify_all(st_, 2 * math.pi)]
    b = [(round(r.time.T, 8), r.order) for r in classify_all(moved, 2 * math.pi)]
    assert a == b


def test_embedded_geodesics_with_extra_kernel_directions():
    """A rank-one P in M4 moving inside a 2-plane: the idle directions add order at k pi."""
    sh = AlgebraShape.of(4)
    P = Element(sh, [np.diag([1.0, 0, 0, 0])])
    V = np.zeros((4, 4))
    V[0, 1] = V[1, 0] = 1.0
    st_ = GeodesicState.from_elements(P, Element(sh, [V]))
    rep = classify(st_, math.pi)
    assert rep.order == 5
    assert len(rep.kernel.T_part) > 0


def test_pocos_families():
    alpha = 0.4
    st_ = pocos_state(alpha)
    # k pi / 2 is monoconjugate
    assert classify(st_, math.pi / 2).order > 0
    # the (1 + alpha) and (1 - alpha) families are not conjugate
    assert classify(st_, math.pi / (1 + alpha)).order == 0
    assert classify(st_, math.pi / (1 - alpha)).order == 0
    # the 2 alpha family is conjugate through the second summand's own projective line
    rep = classify(st_, math.pi / (2 * alpha))
    assert rep.order == 1 == rep.oracle_nullity


def test_pocos_with_merged_families():
    st_ = pocos_state(1 / 3)
    for rep in classify_all(st_, 3 * math.pi):
        k = rep.time.T / (math.pi / 2)
        on_first = abs(k - round(k)) < 1e-8
        assert (rep.order > 0) == on_first


def test_resonances_and_mu_set():
    st_ = pocos_state(0.4)
    mus, approx = resonant_values(st_, math.pi / 2)
    assert not approx
    assert 2.0 in [round(m, 12) for m in mus]
    ms = mu_set(st_, 1, 1.0, -1.0)
    assert ms.js and all(m > 0 for m in ms.mus)


def test_eigen_witnesses_lie_in_the_kernel():
    st_ = projective_state(3, "C")
    w = eigen_witness_kernel(st_, 1, 1.0, -1.0)
    assert w is not None
    assert kernel_residual(st_, math.pi / 2, w) < 1e-10
    w0 = eigen_witness_kernel(st_, 1, 1.0, 0.0)
    assert w0 is not None
    assert kernel_residual(st_, math.pi, w0) < 1e-10


def test_report_serializes():
    rep = classify(projective_state(3, "C"), math.pi)
    obj = json.loads(rep.to_json())
    assert obj["classification"] == "Monoconjugate"
    assert obj["order"] == obj["oracle_nullity"] == 3
    assert len(obj["kernel_basis"]) == 3
    assert "kernel_basis" not in rep.to_dict(include_kernel=False)


def test_classify_rejects_nonpositive_times():
    with pytest.raises(ValidationError):
        classify(projective_state(3, "C"), 0.0)

"""Lengths, joining geodesics, and the cut-locus constructions.

Lengths use the operator norm: a geodesic with speed ``V`` has length
``|t| ||V||`` on ``[0, t]``. Two projections are joined by
``e^x P e^{-x} = Q`` with ``x`` skew and ``P``-co-diagonal; the length of that
geodesic is ``||x||``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CrossCheckError, ValidationError
from .grassmann import (
    GeodesicState,
    Projection,
    TangentVector,
    codiagonal_projection,
    geodesic_eval,
)
from .matcore import DEFAULT_TOL, REAL, Element, Tolerances, bracket, element_to_dict, expm_skew, logm_unitary

__all__ = [
    "JoinResult",
    "ShortcutResult",
    "path_length",
    "geodesic_length",
    "sampled_geodesic_length",
    "direct_rotation",
    "geodesic_join",
    "meet_projection",
    "second_minimizing_geodesic",
    "shortcut_past_cut",
    "exponent_reduction",
]


@dataclass(frozen=True, eq=False)
class JoinResult:
    exists: bool
    unique: bool
    x: Element | None
    length: float
    mismatch_dims: tuple[int, int] = (0, 0)

    def to_dict(self) -> dict:
        return {
            "exists": self.exists,
            "unique": self.unique,
            "generator": element_to_dict(self.x) if self.x is not None else None,
            "length": self.length if self.exists else None,
            "dim_P_meet_not_Q": self.mismatch_dims[0],
            "dim_Q_meet_not_P": self.mismatch_dims[1],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _el(p) -> Element:
    return p.p if isinstance(p, Projection) else p


def path_length(samples: Sequence[Projection | Element]) -> float:
    """Chord length ``sum ||P_{i+1} - P_i||`` of a sampled path."""
    els = [_el(s) for s in samples]
    return float(sum((b - a).norm() for a, b in zip(els, els[1:])))


def geodesic_length(state: GeodesicState, t0: float = 0.0, t1: float = 1.0) -> float:
    return abs(t1 - t0) * state.speed


def sampled_geodesic_length(state: GeodesicState, t0: float, t1: float, samples: int = 1000,
                            tol: float = 1e-3) -> float:
    """Chord length of ``gamma`` on ``[t0, t1]``, cross-checked against ``|t1 - t0| ||V||``.

    Only meaningful below the cut time, where the two must agree; raise
    otherwise.
    """
    ts = np.linspace(t0, t1, samples + 1)
    chord = path_length([geodesic_eval(state, t, check=False) for t in ts])
    exact = geodesic_length(state, t0, t1)
    if abs(chord - exact) > tol * max(1.0, exact):
        raise CrossCheckError(f"chord length {chord} disagrees with closed form {exact}")
    return chord


def _block_polar(t: Element) -> Element:
    out = []
    for m in t.blocks:
        w, _, zh = np.linalg.svd(m)
        out.append(w @ zh)
    return Element(t.shape, out)


def direct_rotation(P: Projection | Element, Q: Projection | Element, tol: Tolerances = DEFAULT_TOL) -> JoinResult:
    """The skew ``P``-co-diagonal ``x`` with ``||x|| < pi/2`` and ``e^x P e^{-x} = Q``.

    Built as ``x = log U`` with ``U`` the unitary polar factor of
    ``QP + (1-Q)(1-P)``, which is invertible when ``||P - Q|| < 1``.
    """
    p, q = _el(P), _el(Q)
    Projection(p, tol)
    Projection(q, tol)
    gap = (p - q).norm()
    if gap >= 1 - 1e-12:
        raise ValidationError(f"direct rotation needs ||P - Q|| < 1 (got {gap:.6g}); use geodesic_join")
    one = Element.identity(p.shape)
    u = _block_polar(q @ p + (one - q) @ (one - p))
    x = logm_unitary(u, tol)
    # the exact logarithm is co-diagonal; drop rounding noise and verify
    xc = codiagonal_projection(x, p)
    scale = max(1.0, x.norm())
    if (x - xc).norm() > 1e-8 * scale:
        raise CrossCheckError("direct rotation logarithm is not co-diagonal")
    if xc.norm() >= math.pi / 2:
        raise CrossCheckError("direct rotation has norm >= pi/2")
    e = expm_skew(xc, tol)
    resid = (e @ p @ e.H - q).norm()
    if resid > 1e-9:
        raise CrossCheckError(f"direct rotation does not reach Q (residual {resid:.2e})")
    return JoinResult(True, True, xc, xc.norm())


def meet_projection(P: Projection | Element, Q: Projection | Element, tol: Tolerances = DEFAULT_TOL) -> Element:
    """Projection onto ``ran P`` intersected with ``ran Q``: the eigenvalue-1 projection of ``PQP``."""
    p, q = _el(P), _el(Q)
    m = p @ q @ p
    out = []
    for spec, b in zip(m.shape, m.blocks):
        w, u = np.linalg.eigh((b + b.conj().T) / 2)
        cols = u[:, np.abs(w - 1.0) <= tol.cluster]
        blk = cols @ cols.conj().T
        out.append(np.real(blk) if spec.field == REAL else blk)
    return Element(m.shape, out)


def _onb(p: Element) -> list[np.ndarray]:
    out = []
    for b in p.blocks:
        w, u = np.linalg.eigh((b + b.conj().T) / 2)
        out.append(u[:, w > 0.5])
    return out


def geodesic_join(P: Projection | Element, Q: Projection | Element, tol: Tolerances = DEFAULT_TOL) -> JoinResult:
    """A geodesic from ``P`` to ``Q`` when one exists.

    With ``E = P meet (1-Q)`` and ``F = Q meet (1-P)``, a joining geodesic
    exists iff ``dim E = dim F`` in every block, and it is unique iff
    ``E = 0``. Orthonormal bases of ``E`` and ``F`` (in ``eigh`` order) are
    paired by ``W`` and rotated by ``pi/2 (W - W*)``; the rest is a direct
    rotation of ``P - E`` onto ``Q - F``.
    """
    p, q = _el(P), _el(Q)
    Projection(p, tol)
    Projection(q, tol)
    one = Element.identity(p.shape)
    E = meet_projection(p, one - q, tol)
    F = meet_projection(q, one - p, tol)
    eb, fb = _onb(E), _onb(F)
    dims = (sum(b.shape[1] for b in eb), sum(b.shape[1] for b in fb))
    if any(a.shape[1] != b.shape[1] for a, b in zip(eb, fb)):
        return JoinResult(False, False, None, math.nan, dims)
    w_blocks = []
    for spec, e, f in zip(p.shape, eb, fb):
        w = f @ e.conj().T
        w_blocks.append(np.real(w) if spec.field == REAL else w)
    W = Element(p.shape, w_blocks)
    x1 = (math.pi / 2) * (W - W.H)
    x2 = direct_rotation(p - E, q - F, tol).x
    x = x1 + x2
    e = expm_skew(x, tol)
    resid = (e @ p @ e.H - q).norm()
    if resid > 1e-9:
        raise CrossCheckError(f"joined geodesic misses Q (residual {resid:.2e})")
    return JoinResult(True, dims[0] == 0, x, x.norm(), dims)


# ---------------------------------------------------------------------------
# cut locus


def _phase_projection(v: Element, phase: float, tol: Tolerances) -> Element | None:
    """Eigenprojection of skew ``v`` at eigenvalue ``i * phase`` (complexified shape)."""
    blocks, found = [], False
    for a in v.blocks:
        m = -1j * np.asarray(a, dtype=np.complex128)
        w, u = np.linalg.eigh((m + m.conj().T) / 2)
        cols = u[:, np.abs(w - phase) <= tol.cluster]
        found |= cols.shape[1] > 0
        blocks.append(cols @ cols.conj().T)
    return Element(v.shape.complexified(), blocks) if found else None


def _realify_like(a: Element, shape) -> Element:
    return a.realify(shape, 1e-9) if shape.has_real else a


def _split_top(state: GeodesicState):
    """``(p_plus, p_minus, v_perp)`` for a generator with ``+-i pi/2`` in its spectrum."""
    v, tol = state.v, state.tol
    if v.norm() > math.pi / 2 + 1e-9:
        raise ValidationError("the generator must satisfy ||v|| <= pi/2 (rescale so the cut is at t = 1)")
    pp = _phase_projection(v, math.pi / 2, tol)
    pm = _phase_projection(v, -math.pi / 2, tol)
    if pp is None or pm is None:
        return None
    rot = _realify_like(1j * (math.pi / 2) * (pp - pm), v.shape)
    return pp, pm, rot, v - rot


def _state_from_generator(P: Projection, x: Element) -> GeodesicState:
    X = bracket(x, P.p)
    return GeodesicState.from_tangent(TangentVector(P, (X + X.H) * 0.5))


def second_minimizing_geodesic(state: GeodesicState, t0: float = 1.0) -> GeodesicState | None:
    """A second geodesic reaching ``gamma(t0)`` at time 1 when ``+-i pi/2`` are eigenvalues of ``t0 v``.

    With ``p_+-`` the eigenprojections at ``+-i pi/2`` and ``v_perp`` the rest,
    ``v1 = v_perp - i pi/2 (p_+ - p_-)`` reverses the rotation on the top
    eigenspaces. Returns ``None`` when those eigenvalues are absent.
    """
    st = state if t0 == 1.0 else state.with_speed(t0)
    split = _split_top(st)
    if split is None:
        return None
    _, _, rot, vperp = split
    v1 = vperp - rot
    other = _state_from_generator(st.P, v1)
    e2, e21 = expm_skew(2.0 * st.v, st.tol), expm_skew(2.0 * v1, st.tol)
    if (e2 - e21).norm() > 1e-9:
        raise CrossCheckError("e^{2v} and e^{2 v1} differ")
    g, g1 = geodesic_eval(st, 1.0), geodesic_eval(other, 1.0)
    if (g.p - g1.p).norm() > 1e-9:
        raise CrossCheckError("the two geodesics do not share the endpoint")
    return other


@dataclass(frozen=True, eq=False)
class ShortcutResult:
    state: GeodesicState
    length: float
    original_length: float
    endpoint_residual: float


def shortcut_past_cut(state: GeodesicState, eps: float, t0: float = 1.0) -> ShortcutResult:
    """A geodesic to ``gamma(1 + eps)`` strictly shorter than ``gamma`` on ``[0, 1 + eps]``.

    Needs ``+-i pi/2`` isolated in the spectrum of ``v`` (after rescaling by
    ``t0``), with gap ``delta = pi/2 - ||v_perp|| > 0`` and
    ``0 < eps < delta / (pi - delta)``. The generator is
    ``v2 = (1 - eps) i pi/2 (p_- - p_+) + (1 + eps) v_perp``.
    """
    st = state if t0 == 1.0 else state.with_speed(t0)
    split = _split_top(st)
    if split is None:
        raise ValidationError("+-i pi/2 is not an eigenvalue of the generator")
    _, _, rot, vperp = split
    delta = math.pi / 2 - vperp.norm()
    if delta <= st.tol.cluster:
        raise ValidationError("the eigenvalues +-i pi/2 are not isolated")
    if not 0 < eps < delta / (math.pi - delta):
        raise ValidationError(f"eps must lie in (0, {delta / (math.pi - delta):.6g})")
    v2 = -(1 - eps) * rot + (1 + eps) * vperp
    short = _state_from_generator(st.P, v2)
    target = geodesic_eval(st, 1 + eps)
    resid = (geodesic_eval(short, 1.0).p - target.p).norm()
    if resid > 1e-9:
        raise CrossCheckError(f"shortcut misses gamma(1 + eps) (residual {resid:.2e})")
    length, original = short.speed, (1 + eps) * st.speed
    if not length < original:
        raise CrossCheckError("shortcut is not shorter")
    return ShortcutResult(short, length, original, resid)


def exponent_reduction(v: Element, tol: Tolerances = DEFAULT_TOL) -> Element:
    """Skew ``z`` with ``e^z = e^v`` and ``||z|| <= pi``.

    Each eigenphase ``theta`` is moved by a multiple of ``2 pi`` towards 0
    until ``|theta| <= pi``, keeping its sign, so phases already in
    ``[-pi, pi]`` (including ``+-pi``) stay put, conjugate pairs stay
    conjugate and real blocks stay real.
    """
    if not v.is_skew(tol.structural * max(1.0, v.norm())):
        raise ValidationError("exponent_reduction needs a skew-adjoint input")
    out = []
    for a in v.blocks:
        m = -1j * np.asarray(a, dtype=np.complex128)
        w, u = np.linalg.eigh((m + m.conj().T) / 2)
        n = np.maximum(np.ceil((np.abs(w) - math.pi - 1e-12) / (2 * math.pi)), 0)
        w2 = np.sign(w) * (np.abs(w) - 2 * math.pi * n)
        out.append((u * (1j * w2)) @ u.conj().T)
    z = Element(v.shape.complexified(), out)
    z = (z - z.H) * 0.5
    z = z.realify(v.shape, 1e-9) if v.shape.has_real else z
    if (expm_skew(z, tol) - expm_skew(v, tol)).norm() > 1e-9 * max(1.0, v.norm()):
        raise CrossCheckError("exponent reduction changed the exponential")
    return z

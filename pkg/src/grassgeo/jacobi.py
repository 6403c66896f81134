"""Jacobi fields and the differential of the exponential map.

Everything here is an analytic function of ``ad v`` for a skew generator
``v``. Since ``v`` is normal with eigenphases ``theta_a`` and eigenprojections
``Q_a``, ``f(t ad v) x = sum_{a,b} f(i t (theta_a - theta_b)) Q_a x Q_b``,
which is evaluated in an eigenbasis of each block as a Hadamard product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError
from .grassmann import GeodesicState, Projection, TangentVector
from .matcore import DEFAULT_TOL, REAL, Element, Tolerances, bracket, expm_skew, trace_inner

__all__ = [
    "FUNCTION_TAGS",
    "scalar_function",
    "SuperOpSpec",
    "apply_fn_of_ad",
    "jacobi_field",
    "dexp",
    "codiagonal_skew_basis",
    "coordinates",
    "dexp_matrix",
    "lie_dexp",
]


def _cardinal(num: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    """``num(z) / z`` extended by continuity with value 1 at 0 (``num'(0) = 1``)."""

    def f(z):
        z = np.asarray(z, dtype=np.complex128)
        zero = z == 0
        safe = np.where(zero, 1.0, z)
        return np.where(zero, 1.0, num(safe) / safe)

    return f


FUNCTION_TAGS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "one": lambda z: np.ones_like(np.asarray(z, dtype=np.complex128)),
    "cosh": lambda z: np.cosh(np.asarray(z, dtype=np.complex128)),
    "sinhc": _cardinal(np.sinh),
    # F(z) = (1 - e^{-z}) / z and G(z) = e^z F(z) = (e^z - 1) / z
    "F": _cardinal(lambda z: -np.expm1(-z)),
    "G": _cardinal(np.expm1),
}


def scalar_function(tag: str) -> Callable[[np.ndarray], np.ndarray]:
    try:
        return FUNCTION_TAGS[tag]
    except KeyError:
        raise ValidationError(f"unknown function tag {tag!r}; expected one of {sorted(FUNCTION_TAGS)}") from None


@dataclass(frozen=True, eq=False)
class SuperOpSpec:
    """``f(t ad v)`` ready to apply.

    Holds, per block, the eigenphases ``theta`` of ``v`` (``v = U diag(i theta) U*``)
    and the unitary ``U``. The weight matrix ``W[a, b] = f(i t (theta_a - theta_b))``
    is precomputed, so applying the operator costs two basis changes.
    """

    v: Element
    tag: str
    t: float
    thetas: tuple[np.ndarray, ...]
    vectors: tuple[np.ndarray, ...]
    weights: tuple[np.ndarray, ...]

    @classmethod
    def build(cls, v: Element, tag: str, t: float = 1.0, tol: Tolerances = DEFAULT_TOL) -> "SuperOpSpec":
        if not v.is_skew(tol.structural * max(1.0, v.norm())):
            raise ValidationError("the generator must be skew-adjoint")
        f = scalar_function(tag)
        thetas, vecs, weights = [], [], []
        for a in v.blocks:
            m = -1j * np.asarray(a, dtype=np.complex128)
            w, u = np.linalg.eigh((m + m.conj().T) / 2)
            thetas.append(w)
            vecs.append(u)
            weights.append(f(1j * t * (w[:, None] - w[None, :])))
        return cls(v, tag, float(t), tuple(thetas), tuple(vecs), tuple(weights))

    def projections(self, cluster: float = DEFAULT_TOL.cluster) -> list[tuple[float, Element]]:
        """Clustered eigenphases with their eigenprojections (complexified shape)."""
        shape = self.v.shape.complexified()
        allw = sorted({round(float(x) / cluster) * cluster for w in self.thetas for x in w})
        out = []
        for th in allw:
            blocks = []
            for w, u in zip(self.thetas, self.vectors):
                cols = u[:, np.abs(w - th) <= cluster]
                blocks.append(cols @ cols.conj().T)
            out.append((th, Element(shape, blocks)))
        return out

    def __call__(self, x: Element) -> Element:
        out = []
        for u, wt, a in zip(self.vectors, self.weights, x.blocks):
            out.append(u @ (wt * (u.conj().T @ a @ u)) @ u.conj().T)
        res = Element(x.shape.complexified(), out)
        if x.shape.has_real:
            res = Element(x.shape, [np.real(b) if s.field == REAL else b for s, b in zip(x.shape, res.blocks)])
        return res


def apply_fn_of_ad(v: Element, f: str, t: float, x: Element, tol: Tolerances = DEFAULT_TOL) -> Element:
    """``f(t ad v)(x)`` for ``f`` in ``one, cosh, sinhc, F, G``."""
    return SuperOpSpec.build(v, f, t, tol)(x)


def _check_tangent(state: GeodesicState, Z: TangentVector, name: str):
    if not isinstance(Z, TangentVector):
        raise ValidationError(f"{name} must be a TangentVector")
    if Z.base.p is not state.P.p and not Z.base.p.allclose(state.P.p, state.tol.structural * 10):
        raise ValidationError(f"{name} is not tangent at the geodesic's base point")


def jacobi_field(state: GeodesicState, X: TangentVector, Y: TangentVector, t: float) -> TangentVector:
    """The Jacobi field along ``gamma`` with ``mu(0) = X`` and ``D_t mu(0) = Y``, at time ``t``.

    ``mu(t) = e^{tv} ([cosh(t ad v) x, P] + t [sinhc(t ad v) y, P]) e^{-tv}``
    with ``x, y`` the generators of ``X, Y``.
    """
    _check_tangent(state, X, "X")
    _check_tangent(state, Y, "Y")
    p = state.P.p
    x, y = X.generator, Y.generator
    inner = bracket(apply_fn_of_ad(state.v, "cosh", t, x, state.tol), p)
    inner = inner + t * bracket(apply_fn_of_ad(state.v, "sinhc", t, y, state.tol), p)
    u = state.exp_tv(t)
    base = Projection(u @ p @ u.H, state.tol)
    out = u @ inner @ u.H
    return TangentVector(base, (out + out.H) * 0.5)


def dexp(state: GeodesicState, T: float, Y: TangentVector) -> TangentVector:
    """``D(Exp_P)_{TV}(Y) = e^{Tv} [sinhc(T ad v) y, P] e^{-Tv}``."""
    _check_tangent(state, Y, "Y")
    p = state.P.p
    inner = bracket(apply_fn_of_ad(state.v, "sinhc", T, Y.generator, state.tol), p)
    u = state.exp_tv(T)
    out = u @ inner @ u.H
    return TangentVector(Projection(u @ p @ u.H, state.tol), (out + out.H) * 0.5)


def codiagonal_skew_basis(P: Projection | Element) -> list[Element]:
    """Canonical orthonormal basis of the skew ``P``-co-diagonal elements.

    Per block, let ``R`` and ``K`` be eigenvector bases of ``ran P`` and
    ``ker P`` (from ``eigh``). The basis runs lexicographically over
    ``(block, i, j, re/im)`` with ``i`` indexing ``R`` and ``j`` indexing ``K``:
    the real member is ``(r_i k_j* - k_j r_i*) / sqrt 2`` and, for complex
    blocks, the imaginary member is ``i (r_i k_j* + k_j r_i*) / sqrt 2``.
    Orthonormality is with respect to ``Re tau(a b*)``.
    """
    p = P.p if isinstance(P, Projection) else P
    shape = p.shape
    basis = []
    for bi, (spec, m) in enumerate(zip(shape, p.blocks)):
        w, u = np.linalg.eigh((m + m.conj().T) / 2)
        rank = int(round(float(np.sum(w))))
        ker, ran = u[:, : spec.dim - rank], u[:, spec.dim - rank:]
        for i in range(ran.shape[1]):
            r = ran[:, i: i + 1]
            for j in range(ker.shape[1]):
                k = ker[:, j: j + 1]
                outer = r @ k.conj().T
                members = [(outer - outer.conj().T) / np.sqrt(2)]
                if spec.field != REAL:
                    members.append(1j * (outer + outer.conj().T) / np.sqrt(2))
                for mem in members:
                    blocks = [np.zeros((s.dim, s.dim), dtype=s.dtype) for s in shape]
                    blocks[bi] = np.real(mem) if spec.field == REAL else mem
                    basis.append(Element(shape, blocks))
    return basis


def coordinates(basis: list[Element], a: Element, tol: float | None = None) -> np.ndarray:
    """Coordinates of ``a`` in an orthonormal ``basis``; with ``tol``, refuse if ``a`` leaves the span."""
    c = np.array([trace_inner(a, b) for b in basis])
    if tol is not None:
        back = Element.zeros(a.shape)
        for ci, b in zip(c, basis):
            back = back + ci * b
        r = (back - a).fro()
        if r > tol * max(1.0, a.fro()):
            raise ValidationError(f"element leaves the span of the basis (residual {r:.2e})")
    return c


def dexp_matrix(state: GeodesicState, T: float) -> np.ndarray:
    """Real matrix of ``y -> sinhc(T ad v) y`` on the skew co-diagonal space.

    Columns follow :func:`codiagonal_skew_basis`; the differential of
    ``Exp_P`` at ``TV`` is this operator up to the isomorphisms ``y -> [y, P]``
    and conjugation by ``e^{Tv}``, so both have the same nullity.
    """
    basis = codiagonal_skew_basis(state.P)
    op = SuperOpSpec.build(state.v, "sinhc", T, state.tol)
    m = np.zeros((len(basis), len(basis)))
    for j, b in enumerate(basis):
        m[:, j] = coordinates(basis, op(b))
    return m


def lie_dexp(v: Element, w: Element, tol: Tolerances = DEFAULT_TOL) -> Element:
    """Derivative of the group exponential at ``v`` along ``w``: ``e^v F(ad v) w``."""
    if not w.is_skew(tol.structural * max(1.0, w.norm())):
        raise ValidationError("w must be skew-adjoint")
    return expm_skew(v, tol) @ apply_fn_of_ad(v, "F", 1.0, w, tol)

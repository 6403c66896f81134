"""Brute-force verifiers kept independent of the analytic code paths.

Nothing here uses the spectral helpers of :mod:`grassgeo.matcore` or the
Hadamard evaluation of :mod:`grassgeo.jacobi`: eigenvectors come from the
general ``numpy.linalg.eig`` plus an explicit inverse, functions of ``ad v``
are summed with a plain double loop, exponentials come from
``scipy.linalg.expm``, and tangent bases are built by orthonormalizing
projected elementary matrices.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import CrossCheckError, ValidationError
from .matcore import REAL, AlgebraShape, Element

__all__ = [
    "VectorizedOperator",
    "adapted_basis",
    "vectorize",
    "nullity",
    "sinhc_ad",
    "vectorize_sinhc_ad",
    "expm",
    "fd_variation_check",
    "fd_dexp_check",
    "fd_lie_dexp_check",
    "discretized_epi_demo",
    "join_exists_bruteforce",
]


@dataclass(frozen=True, eq=False)
class VectorizedOperator:
    """Column ``j`` holds the coordinates of ``op(basis[j])`` in ``basis``."""

    matrix: np.ndarray
    basis: tuple[Element, ...]


def _inner(a: Element, b: Element) -> float:
    return float(sum(np.real(np.sum(x * np.conj(y))) for x, y in zip(a.blocks, b.blocks)))


def adapted_basis(p: Element) -> list[Element]:
    """Orthonormal basis of the skew ``p``-co-diagonal elements.

    Elementary skew matrices are projected by ``a -> p a q + q a p`` and the
    images orthonormalized with an SVD; the result spans the same space as the
    canonical basis of :mod:`grassgeo.jacobi` but is built independently.
    """
    shape = p.shape
    out = []
    for bi, spec in enumerate(shape):
        n = spec.dim
        pb = np.asarray(p.blocks[bi], dtype=np.complex128)
        qb = np.eye(n) - pb
        gens = []
        for i in range(n):
            for j in range(i, n):
                e = np.zeros((n, n), dtype=np.complex128)
                e[i, j] = 1.0
                if i != j:
                    gens.append(e - e.T)
                if spec.field != REAL:
                    gens.append(1j * (e + e.T) if i != j else 1j * e)
        proj = [pb @ g @ qb + qb @ g @ pb for g in gens]
        if spec.field == REAL:
            rows = np.array([np.real(m).ravel() for m in proj])
        else:
            rows = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in proj])
        if rows.size == 0:
            continue
        _, s, vh = np.linalg.svd(rows, full_matrices=False)
        keep = s > 1e-8 * max(1.0, s[0])
        for vec in vh[keep]:
            if spec.field == REAL:
                m = vec.reshape(n, n)
            else:
                m = vec[: n * n].reshape(n, n) + 1j * vec[n * n:].reshape(n, n)
            blocks = [np.zeros((b.dim, b.dim), dtype=b.dtype) for b in shape]
            blocks[bi] = m
            out.append(Element(shape, blocks))
    return out


def _flat(a: Element) -> np.ndarray:
    parts = []
    for b in a.blocks:
        b = np.asarray(b)
        parts.append(b.real.ravel())
        if np.iscomplexobj(b):
            parts.append(b.imag.ravel())
        else:
            parts.append(np.zeros(b.size))
    return np.concatenate(parts)


def vectorize(op: Callable[[Element], Element], basis: Sequence[Element], tol: float = 1e-9) -> VectorizedOperator:
    """Dense real matrix of ``op`` on the span of an orthonormal ``basis``.

    Raises :class:`CrossCheckError` if some image leaves the span, which means
    the subspace is not invariant under ``op``.
    """
    basis = tuple(basis)
    n = len(basis)
    if n == 0:
        return VectorizedOperator(np.zeros((0, 0)), basis)
    B = np.array([_flat(b) for b in basis])
    if np.max(np.abs(B @ B.T - np.eye(n))) > 1e-10:
        raise ValidationError("vectorize needs a trace-orthonormal basis")
    m = np.zeros((n, n))
    chunk = 256
    for start in range(0, n, chunk):
        imgs = np.array([_flat(op(b)) for b in basis[start:start + chunk]])
        c = B @ imgs.T
        resid = np.linalg.norm(B.T @ c - imgs.T, axis=0)
        scale = np.maximum(1.0, np.linalg.norm(imgs, axis=1))
        bad = np.nonzero(resid > tol * scale)[0]
        if bad.size:
            j = start + int(bad[0])
            raise CrossCheckError(f"operator image leaves the basis span (residual {resid[bad[0]]:.2e}, column {j})")
        m[:, start:start + len(imgs)] = c
    return VectorizedOperator(m, basis)


def nullity(op: VectorizedOperator | np.ndarray, tol: float = 1e-9) -> tuple[int, list]:
    """Dimension and basis of the kernel via SVD.

    The matrix is scaled to unit spectral norm first; singular values below
    ``tol`` count as zero. Kernel vectors are returned as Elements when the
    operator carries a basis, else as coordinate arrays.
    """
    m = op.matrix if isinstance(op, VectorizedOperator) else np.asarray(op)
    if m.size == 0:
        return 0, []
    _, s, vh = np.linalg.svd(m)
    scale = s[0] if s[0] > 0 else 1.0
    small = s / scale < tol
    k = int(np.sum(small))
    vecs = vh[len(s) - k:] if k else vh[:0]
    if isinstance(op, VectorizedOperator):
        out = []
        for v in vecs:
            acc = Element.zeros(op.basis[0].shape)
            for c, e in zip(v, op.basis):
                acc = acc + float(c) * e
            out.append(acc)
        return k, out
    return k, list(vecs)


def _sinhc(z: complex) -> complex:
    if abs(z) < 1e-300:
        return 1.0
    return cmath.sinh(z) / z


def _block_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    w, vecs = np.linalg.eig(np.asarray(a, dtype=np.complex128))
    if np.linalg.cond(vecs) > 1e6:
        # degenerate spectra can make eig's basis ill conditioned; a normal
        # matrix has a diagonal complex Schur form, which is exact here
        t, z = scipy.linalg.schur(np.asarray(a, dtype=np.complex128), output="complex")
        return np.diag(t).copy(), z, z.conj().T
    return w, vecs, np.linalg.inv(vecs)


def sinhc_ad(v: Element, T: float, x: Element) -> Element:
    """``sinhc(T ad v) x`` by an explicit double loop over eigenpairs of ``v``."""
    out = []
    for spec, a, xb in zip(v.shape, v.blocks, x.blocks):
        w, vecs, inv = _block_eig(a)
        y = inv @ np.asarray(xb, dtype=np.complex128) @ vecs
        n = len(w)
        z = np.zeros_like(y)
        for i in range(n):
            for j in range(n):
                z[i, j] = _sinhc(T * (w[i] - w[j])) * y[i, j]
        res = vecs @ z @ inv
        out.append(np.real(res) if spec.field == REAL else res)
    return Element(v.shape, out)


def vectorize_sinhc_ad(v: Element, T: float, basis: Sequence[Element]) -> VectorizedOperator:
    return vectorize(lambda x: sinhc_ad(v, T, x), basis, tol=1e-8)


def expm(a: Element) -> Element:
    blocks = [scipy.linalg.expm(np.asarray(b)) for b in a.blocks]
    return Element(a.shape, [np.real(b) if s.field == REAL else b for s, b in zip(a.shape, blocks)])


def _geo(p: Element, gen: Element) -> Element:
    u = expm(gen)
    return u @ p @ u.H


def fd_variation_check(state, X, Y, t: float, h: float = 1e-4) -> float:
    """``||d/ds nu_s(t) - mu(t)||`` with ``nu_s(t) = e^{sx} e^{t(v+sy)} P e^{-t(v+sy)} e^{-sx}``.

    The derivative in ``s`` at 0 is a central difference; ``mu`` is the
    closed-form Jacobi field.
    """
    from .jacobi import jacobi_field

    p = state.P.p
    v = state.v
    x, y = X.x @ p - p @ X.x, Y.x @ p - p @ Y.x

    def nu(s):
        a = expm(s * x) @ expm(t * (v + s * y))
        return a @ p @ a.H

    fd = (nu(h) - nu(-h)) / (2 * h)
    return (fd - jacobi_field(state, X, Y, t).x).norm()


def fd_dexp_check(state, T: float, Y, h: float = 1e-5) -> float:
    """``||(Exp(TV + hY) - Exp(TV - hY)) / 2h - dexp||``."""
    from .jacobi import dexp

    p = state.P.p
    y = Y.x @ p - p @ Y.x
    fd = (_geo(p, T * state.v + h * y) - _geo(p, T * state.v - h * y)) / (2 * h)
    return (fd - dexp(state, T, Y).x).norm()


def fd_lie_dexp_check(v: Element, w: Element, h: float = 1e-5) -> float:
    """Relative error of :func:`grassgeo.jacobi.lie_dexp` against central differences."""
    from .jacobi import lie_dexp

    fd = (expm(v + h * w) - expm(v - h * w)) / (2 * h)
    ref = lie_dexp(v, w)
    return (fd - ref).norm() / max(ref.norm(), 1e-300)


def discretized_epi_demo(N: int) -> tuple[float, int]:
    """Minimum singular value and nullity of ``L + R - 2`` on real skew ``N x N`` matrices.

    ``L, R`` multiply by ``diag(|x_i|)`` for the ``N`` midpoints ``x_i`` of a
    uniform partition of ``[-1, 1]``. No ``|x_i|`` equals 1, so the operator is
    injective, but its smallest singular value is ``2/N`` and tends to 0.
    """
    if int(N) != N or N < 2:
        raise ValidationError("N must be an integer >= 2")
    N = int(N)
    xs = -1.0 + (2.0 * np.arange(N) + 1.0) / N
    lam = np.abs(xs)
    basis = []
    shape = AlgebraShape.of((N, "R"))
    for i in range(N):
        for j in range(i + 1, N):
            e = np.zeros((N, N))
            e[i, j], e[j, i] = 1 / math.sqrt(2), -1 / math.sqrt(2)
            basis.append(Element(shape, [e]))
    d = Element(shape, [np.diag(lam)])

    def op(b):
        return d @ b + b @ d - 2.0 * b

    m = vectorize(op, basis).matrix
    s = np.linalg.svd(m, compute_uv=False)
    return float(s.min()), int(np.sum(s / s.max() < 1e-9))


def join_exists_bruteforce(p: Element, q: Element, restarts: int = 8, seed: int = 0,
                           tol: float = 1e-10) -> bool:
    """Search for a skew ``p``-co-diagonal ``x`` with ``e^x p e^{-x} = q`` by local optimization."""
    if any(abs(np.trace(a).real - np.trace(b).real) > 0.5 for a, b in zip(p.blocks, q.blocks)):
        return False
    basis = adapted_basis(p)
    if not basis:
        return (p - q).norm() < 1e-8
    rng = np.random.default_rng(seed)

    def loss(c):
        x = sum((ci * b for ci, b in zip(c, basis)), Element.zeros(p.shape))
        r = _geo(p, x) - q
        return _inner(r, r)

    best = math.inf
    for _ in range(restarts):
        c0 = rng.normal(scale=1.0, size=len(basis))
        res = scipy.optimize.minimize(loss, c0, method="BFGS", options={"gtol": 1e-12, "maxiter": 2000})
        best = min(best, res.fun)
        if best < tol:
            return True
    return best < tol

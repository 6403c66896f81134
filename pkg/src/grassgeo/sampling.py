"""Seeded random instances for tests, scenarios and the command line."""

from __future__ import annotations

import math
import os

import numpy as np

from .grassmann import GeodesicState, Projection, TangentVector, tangent
from .matcore import REAL, AlgebraShape, Block, Element, expm_skew

__all__ = [
    "rng_from_env",
    "haar_unitary",
    "random_shape",
    "random_element",
    "random_projection",
    "random_tangent",
    "random_unit_state",
    "planted_first_conjugate",
    "random_close_pair",
    "block_conjugate",
]

SEED_ENV = "GRASSGEO_SEED"


def rng_from_env(default: int = 0) -> np.random.Generator:
    """Generator seeded from ``GRASSGEO_SEED`` when set, else from ``default``."""
    raw = os.environ.get(SEED_ENV)
    return np.random.default_rng(int(raw) if raw not in (None, "") else default)


def haar_unitary(rng: np.random.Generator, n: int, field: str = "C") -> np.ndarray:
    """Haar-distributed unitary (orthogonal for ``field='R'``) via QR with phase fix."""
    z = rng.normal(size=(n, n))
    if field != REAL:
        z = (z + 1j * rng.normal(size=(n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_shape(rng: np.random.Generator, max_dim: int = 6, max_blocks: int = 3,
                 fields: str = "CR", min_dim: int = 2) -> AlgebraShape:
    nb = int(rng.integers(1, max_blocks + 1))
    return AlgebraShape(tuple(Block(int(rng.integers(min_dim, max_dim + 1)), str(rng.choice(list(fields))))
                              for _ in range(nb)))


def random_element(rng: np.random.Generator, shape: AlgebraShape) -> Element:
    blocks = []
    for b in shape:
        m = rng.normal(size=(b.dim, b.dim))
        if b.field != REAL:
            m = m + 1j * rng.normal(size=(b.dim, b.dim))
        blocks.append(m)
    return Element(shape, blocks)


def random_projection(rng: np.random.Generator, shape: AlgebraShape, ranks=None) -> Projection:
    """Random projection; ``ranks`` defaults to a random proper nonzero rank per block."""
    blocks = []
    for i, b in enumerate(shape):
        r = int(rng.integers(1, b.dim)) if ranks is None else int(ranks[i])
        u = haar_unitary(rng, b.dim, b.field)
        m = u[:, :r] @ u[:, :r].conj().T
        blocks.append(np.real(m) if b.field == REAL else m)
    return Projection(Element(shape, blocks))


def random_tangent(rng: np.random.Generator, P: Projection) -> TangentVector:
    return tangent(P, random_element(rng, P.shape))


def random_unit_state(rng: np.random.Generator, shape: AlgebraShape, ranks=None) -> GeodesicState:
    P = random_projection(rng, shape, ranks)
    return GeodesicState.from_tangent(random_tangent(rng, P), normalize=True)


def block_conjugate(u: Element, a: Element) -> Element:
    return u @ a @ u.H


def planted_first_conjugate(rng: np.random.Generator, m: int, field: str, d: int) -> GeodesicState:
    """Unit geodesic in ``M_m`` whose ``|lam|`` has eigenvalue 1 with multiplicity exactly ``d``.

    The rank ``r`` of ``P`` satisfies ``d <= r`` and ``d <= m - r``; the
    remaining singular values of ``lam`` are drawn from ``[0, 0.9]`` (some
    may be 0), and the whole configuration is rotated by a Haar unitary.
    """
    if m < 2 * d:
        raise ValueError("need m >= 2d")
    r = int(rng.integers(d, m - d + 1))
    k = min(r, m - r)
    svals = np.concatenate([np.ones(d), rng.uniform(0.0, 0.9, size=k - d)])
    if k - d > 0 and rng.random() < 0.3:
        svals[-1] = 0.0
    lam = np.zeros((r, m - r))
    lam[:k, :k] = np.diag(svals)
    lam = haar_unitary(rng, r, field) @ lam @ haar_unitary(rng, m - r, field).conj().T
    V = np.zeros((m, m), dtype=np.float64 if field == REAL else np.complex128)
    V[:r, r:] = lam
    V[r:, :r] = lam.conj().T
    P = np.diag(np.concatenate([np.ones(r), np.zeros(m - r)]))
    u = haar_unitary(rng, m, field)
    shape = AlgebraShape.of((m, field))
    fix = (lambda a: np.real(a)) if field == REAL else (lambda a: a)
    Pe = Element(shape, [fix(u @ P @ u.conj().T)])
    Ve = Element(shape, [fix(u @ V @ u.conj().T)])
    return GeodesicState.from_elements((Pe + Pe.H) * 0.5, (Ve + Ve.H) * 0.5)


def random_close_pair(rng: np.random.Generator, shape: AlgebraShape, max_angle: float = 1.4):
    """``(P, Q, x0)`` with ``Q = e^{x0} P e^{-x0}`` and ``x0`` skew co-diagonal, ``||x0|| < max_angle``."""
    P = random_projection(rng, shape)
    x0 = random_tangent(rng, P).generator
    n = x0.norm()
    if n > 0:
        x0 = x0 * (rng.uniform(0.05, max_angle) / n)
    e = expm_skew(x0)
    q = e @ P.p @ e.H
    return P, Projection((q + q.H) * 0.5), x0

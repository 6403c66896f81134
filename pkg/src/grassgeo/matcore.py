"""Block-matrix arithmetic and spectral calculus for finite direct sums
of full matrix algebras ``M_n1(K1) + ... + M_nr(Kr)`` with ``K`` real or complex.

Everything downstream works with :class:`Element`, an immutable tuple of
square blocks tagged with an :class:`AlgebraShape`. Real blocks are stored as
``float64`` and complex blocks as ``complex128``; spectral computations on
real blocks run on the complexification and are projected back, raising if an
imaginary residual survives.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import BranchCutError, CrossCheckError, ShapeMismatchError, ValidationError

__all__ = [
    "Block",
    "AlgebraShape",
    "Element",
    "Tolerances",
    "DEFAULT_TOL",
    "SpectralData",
    "multiply",
    "adjoint",
    "bracket",
    "hermitian_eig",
    "hermitian_fn",
    "expm_skew",
    "logm_unitary",
    "polar_rectangular",
    "spectral_projection",
    "norms",
    "trace_inner",
    "cluster_values",
    "element_to_json",
    "element_from_json",
    "element_to_dict",
    "element_from_dict",
]

REAL = "R"
COMPLEX = "C"


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds. All absolute; spectra here live in [-2, 2]."""

    structural: float = 1e-10
    rank: float = 1e-9
    cluster: float = 1e-8

    def __post_init__(self):
        if min(self.structural, self.rank, self.cluster) <= 0:
            raise ValidationError("tolerances must be strictly positive")
        if self.rank < self.structural:
            raise ValidationError("rank tolerance must be >= structural tolerance")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class Block:
    dim: int
    field: str = COMPLEX

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValidationError(f"block dimension must be a positive integer, got {self.dim!r}")
        if self.field not in (REAL, COMPLEX):
            raise ValidationError(f"block field must be 'R' or 'C', got {self.field!r}")

    @property
    def dtype(self):
        return np.float64 if self.field == REAL else np.complex128


@dataclass(frozen=True)
class AlgebraShape:
    """Ordered list of full matrix blocks; two elements compose iff shapes are equal."""

    blocks: tuple[Block, ...]

    def __post_init__(self):
        blocks = tuple(b if isinstance(b, Block) else Block(*b) for b in self.blocks)
        if not blocks:
            raise ValidationError("an algebra needs at least one block")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def of(cls, *specs) -> "AlgebraShape":
        """``AlgebraShape.of((2, "C"), (3, "R"))`` or ``AlgebraShape.of(2, 2)`` (complex)."""
        out = []
        for s in specs:
            if isinstance(s, (int, np.integer)):
                out.append(Block(int(s), COMPLEX))
            else:
                out.append(Block(*s))
        return cls(tuple(out))

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.dim for b in self.blocks)

    @property
    def all_complex(self) -> bool:
        return all(b.field == COMPLEX for b in self.blocks)

    @property
    def has_real(self) -> bool:
        return any(b.field == REAL for b in self.blocks)

    def complexified(self) -> "AlgebraShape":
        return AlgebraShape(tuple(Block(b.dim, COMPLEX) for b in self.blocks))

    def __str__(self):
        return " + ".join(f"M{b.dim}({'R' if b.field == REAL else 'C'})" for b in self.blocks)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Element:
    """Immutable member of the algebra: one dense square matrix per block.

    Arithmetic: ``a + b``, ``a - b``, ``-a``, ``c * a`` (scalar), ``a @ b``
    (algebra product), ``a.H`` (adjoint).
    """

    __slots__ = ("shape", "blocks")

    def __init__(self, shape: AlgebraShape, blocks: Sequence[np.ndarray]):
        if len(blocks) != len(shape):
            raise ShapeMismatchError(f"{len(blocks)} blocks given for a {len(shape)}-block algebra")
        out = []
        for spec, m in zip(shape.blocks, blocks):
            m = np.asarray(m)
            if m.shape != (spec.dim, spec.dim):
                raise ShapeMismatchError(f"block of shape {m.shape} does not match M{spec.dim}")
            if spec.field == REAL:
                if np.iscomplexobj(m):
                    if np.any(m.imag != 0):
                        raise ValidationError("complex entries in a real block; use realify() with a tolerance")
                    m = m.real
                m = np.array(m, dtype=np.float64)
            else:
                m = np.array(m, dtype=np.complex128)
            out.append(_freeze(m))
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "blocks", tuple(out))

    def __setattr__(self, name, value):
        raise AttributeError("Element is immutable")

    # -- constructors ---------------------------------------------------------
    @classmethod
    def zeros(cls, shape: AlgebraShape) -> "Element":
        return cls(shape, [np.zeros((b.dim, b.dim), b.dtype) for b in shape])

    @classmethod
    def identity(cls, shape: AlgebraShape) -> "Element":
        return cls(shape, [np.eye(b.dim, dtype=b.dtype) for b in shape])

    @classmethod
    def diag(cls, shape: AlgebraShape, *diagonals) -> "Element":
        return cls(shape, [np.diag(np.asarray(d, dtype=b.dtype)) for b, d in zip(shape, diagonals)])

    # -- structure ------------------------------------------------------------
    def _check(self, other: "Element"):
        if not isinstance(other, Element):
            raise TypeError(f"expected Element, got {type(other).__name__}")
        if other.shape != self.shape:
            raise ShapeMismatchError(f"shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other):
        self._check(other)
        return Element(self.shape, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._check(other)
        return Element(self.shape, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return Element(self.shape, [-a for a in self.blocks])

    def __mul__(self, c):
        if isinstance(c, Element):
            raise TypeError("use @ for the algebra product")
        c = complex(c)
        if c.imag != 0 and self.shape.has_real:
            raise ValidationError("non-real scalar acting on an algebra with real blocks")
        c = c.real if c.imag == 0 else c
        return Element(self.shape, [c * a for a in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def __matmul__(self, other):
        self._check(other)
        return Element(self.shape, [a @ b for a, b in zip(self.blocks, other.blocks)])

    @property
    def H(self) -> "Element":
        return Element(self.shape, [a.conj().T for a in self.blocks])

    def trace(self) -> complex:
        """Unnormalized trace: the sum of block traces."""
        return complex(sum(np.trace(a) for a in self.blocks))

    def norm(self) -> float:
        """Spectral norm (largest singular value over all blocks)."""
        return max(float(np.linalg.norm(a, 2)) if a.size else 0.0 for a in self.blocks)

    def fro(self) -> float:
        return float(np.sqrt(sum(np.sum(np.abs(a) ** 2) for a in self.blocks)))

    def complexify(self) -> "Element":
        if self.shape.all_complex:
            return self
        return Element(self.shape.complexified(), self.blocks)

    def realify(self, shape: AlgebraShape, tol: float = DEFAULT_TOL.structural) -> "Element":
        """Project a complexified element back onto ``shape``.

        Raises if a real block carries an imaginary residual above ``tol``.
        """
        if shape.complexified() != self.shape.complexified():
            raise ShapeMismatchError(f"cannot realify {self.shape} onto {shape}")
        out = []
        for spec, a in zip(shape.blocks, self.blocks):
            if spec.field == REAL:
                if a.size and np.max(np.abs(a.imag)) > tol:
                    raise CrossCheckError(
                        f"imaginary residual {np.max(np.abs(a.imag)):.3e} in a real block"
                    )
                a = a.real
            out.append(a)
        return Element(shape, out)

    def map_blocks(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Element":
        return Element(self.shape, [fn(a) for a in self.blocks])

    # -- predicates -------------------------------------------------------------
    def is_hermitian(self, tol: float = DEFAULT_TOL.structural) -> bool:
        return (self - self.H).norm() <= tol

    def is_skew(self, tol: float = DEFAULT_TOL.structural) -> bool:
        return (self + self.H).norm() <= tol

    def is_projection(self, tol: float = DEFAULT_TOL.structural) -> bool:
        return self.is_hermitian(tol) and (self @ self - self).norm() <= tol

    def is_unitary(self, tol: float = DEFAULT_TOL.structural) -> bool:
        return (self.H @ self - Element.identity(self.shape)).norm() <= tol

    def allclose(self, other: "Element", tol: float = DEFAULT_TOL.structural) -> bool:
        self._check(other)
        return (self - other).norm() <= tol

    def __repr__(self):
        return f"Element({self.shape}, norm={self.norm():.4g})"

    def __eq__(self, other):
        if not isinstance(other, Element) or other.shape != self.shape:
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks))

    __hash__ = None


def multiply(a: Element, b: Element) -> Element:
    return a @ b


def adjoint(a: Element) -> Element:
    return a.H


def bracket(a: Element, b: Element) -> Element:
    """Commutator ``ab - ba``."""
    return a @ b - b @ a


def norms(a: Element) -> tuple[float, float]:
    """(spectral, Frobenius) norms."""
    return a.norm(), a.fro()


def trace_inner(a: Element, b: Element) -> float:
    """``Re tau(a b*)`` with the unnormalized block trace."""
    a._check(b)
    return float(sum(np.real(np.vdot(y, x)) for x, y in zip(a.blocks, b.blocks)))


# ---------------------------------------------------------------------------
# spectral calculus


def cluster_values(values: Iterable[float], tol: float) -> list[list[float]]:
    """Group sorted reals into clusters whose consecutive gaps are <= tol."""
    vals = sorted(float(v) for v in values)
    groups: list[list[float]] = []
    for v in vals:
        if groups and v - groups[-1][-1] <= tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    return groups


def _normal_kind(h: Element, tol: Tolerances) -> str:
    if h.is_hermitian(tol.structural):
        return "hermitian"
    if h.is_skew(tol.structural):
        return "skew"
    raise ValidationError("input is neither Hermitian nor skew-adjoint")


def _block_eigh(h: Element, kind: str) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-block (eigenvalues, eigenvectors) of h (Hermitian) or of -i h (skew)."""
    out = []
    for spec, a in zip(h.shape, h.blocks):
        if kind == "hermitian":
            m = (a + a.conj().T) / 2
        else:
            m = -1j * (a - a.conj().T) / 2
            m = (m + m.conj().T) / 2
        w, u = np.linalg.eigh(m)
        out.append((w, u))
    return out


@dataclass(frozen=True)
class SpectralData:
    """Clustered spectral resolution ``h = sum_i value_i * projections[i]``.

    For skew input the values are the imaginary parts (``h = sum i*value*P``)
    and the projections live on the complexified shape whenever ``h`` has real
    blocks, since the eigenprojections of a real rotation generator are not real.
    """

    eigenvalues: tuple[float, ...]
    projections: tuple[Element, ...]
    cluster_tol: float
    kind: str = "hermitian"
    multiplicities: tuple[int, ...] = field(default=())

    def projection_for(self, value: float) -> Element | None:
        for lam, p in zip(self.eigenvalues, self.projections):
            if abs(lam - value) <= self.cluster_tol:
                return p
        return None

    def reconstruct(self) -> Element:
        shape = self.projections[0].shape
        c = 1.0 if self.kind == "hermitian" else 1j
        acc = Element.zeros(shape)
        for lam, p in zip(self.eigenvalues, self.projections):
            acc = acc + (c * lam) * p
        return acc


def hermitian_eig(h: Element, tol: Tolerances = DEFAULT_TOL) -> SpectralData:
    """Spectral resolution of a Hermitian or skew-adjoint element.

    Eigenvalues are clustered with the absolute ``tol.cluster`` threshold and
    each cluster is represented by its mean.
    """
    kind = _normal_kind(h, tol)
    eig = _block_eigh(h, kind)
    pairs = [(float(w), bi, k) for bi, (ws, _) in enumerate(eig) for k, w in enumerate(ws)]
    groups = cluster_values([p[0] for p in pairs], tol.cluster)
    out_shape = h.shape if kind == "hermitian" else h.shape.complexified()
    values, projs, mults = [], [], []
    for g in groups:
        lo, hi = g[0], g[-1]
        blocks = []
        count = 0
        for bi, (ws, us) in enumerate(eig):
            sel = (ws >= lo - 1e-300) & (ws <= hi)
            cols = us[:, sel]
            count += cols.shape[1]
            blocks.append(cols @ cols.conj().T)
        p = Element(out_shape.complexified(), blocks)
        if kind == "hermitian":
            p = p.realify(h.shape, max(tol.structural, 1e-12))
        values.append(float(np.mean(g)))
        projs.append(p)
        mults.append(count)
    sd = SpectralData(tuple(values), tuple(projs), tol.cluster, kind, tuple(mults))
    resid = (sd.reconstruct() - h.complexify() if kind == "skew" else sd.reconstruct() - h).norm()
    if resid > max(tol.structural, tol.cluster * len(values)):
        raise CrossCheckError(f"spectral reconstruction residual {resid:.3e}")
    return sd


def hermitian_fn(h: Element, fn: Callable[[np.ndarray], np.ndarray], tol: Tolerances = DEFAULT_TOL) -> Element:
    """``fn(h)`` for Hermitian ``h`` by eigendecomposition, block by block."""
    if not h.is_hermitian(tol.structural):
        raise ValidationError("hermitian_fn needs a Hermitian input")
    out = []
    for w, u in _block_eigh(h, "hermitian"):
        fw = np.asarray(fn(w))
        out.append((u * fw) @ u.conj().T)
    return Element(h.shape.complexified(), out).realify(h.shape, max(tol.structural, 1e-12)) \
        if h.shape.has_real else Element(h.shape, out)


def spectral_projection(h: Element, value: float, tol: Tolerances = DEFAULT_TOL) -> Element:
    """Orthogonal projection onto eigenvectors of Hermitian ``h`` with eigenvalue
    within ``tol.cluster`` of ``value``; zero if there are none."""
    if not h.is_hermitian(tol.structural):
        raise ValidationError("spectral_projection needs a Hermitian input")
    return hermitian_fn(h, lambda w: (np.abs(w - value) <= tol.cluster).astype(float), tol)


def expm_skew(x: Element, tol: Tolerances = DEFAULT_TOL) -> Element:
    """Exponential of a skew-adjoint element via its spectral decomposition."""
    if not x.is_skew(tol.structural):
        raise ValidationError("expm_skew needs a skew-adjoint input")
    out = []
    for theta, u in _block_eigh(x, "skew"):
        out.append((u * np.exp(1j * theta)) @ u.conj().T)
    return Element(x.shape.complexified(), out).realify(x.shape, max(tol.structural, 1e-12)) \
        if x.shape.has_real else Element(x.shape, out)


def logm_unitary(u: Element, tol: Tolerances = DEFAULT_TOL) -> Element:
    """Principal logarithm of a unitary, eigenphases in (-pi, pi).

    Raises :class:`BranchCutError` if ``u`` has an eigenvalue within
    ``tol.cluster`` of -1: the branch choice changes geodesics and is left to
    the caller.
    """
    if not u.is_unitary(max(tol.structural, 1e-9)):
        raise ValidationError("logm_unitary needs a unitary input")
    out = []
    for a in u.blocks:
        # complex Schur form of a normal matrix is diagonal up to rounding
        t, z = scipy.linalg.schur(np.asarray(a, dtype=np.complex128), output="complex")
        lam = np.diag(t)
        phase = np.angle(lam)
        if np.any(np.abs(lam + 1) <= tol.cluster):
            raise BranchCutError("unitary has eigenvalue -1; principal logarithm is ambiguous")
        out.append((z * (1j * phase)) @ z.conj().T)
    log = Element(u.shape.complexified(), out)
    log = (log - log.H) * 0.5
    log = log.realify(u.shape, max(tol.structural, 1e-9)) if u.shape.has_real else log
    if (expm_skew(log, tol) - u).norm() > max(tol.structural, 1e-9):
        raise CrossCheckError("expm(logm(u)) does not reproduce u")
    return log


def polar_rectangular(lam: Element, tol: Tolerances = DEFAULT_TOL) -> tuple[Element, Element]:
    """Polar decomposition ``lam = Omega |lam|`` of an off-diagonal block.

    ``lam`` is an element of the ambient algebra (typically ``P V (1-P)``);
    ``Omega`` is the partial isometry with initial projection the range
    projection of ``|lam|`` and ``|lam| = (lam* lam)^(1/2)``. Singular values
    at or below ``tol.rank`` count as zero.
    """
    omegas, absl = [], []
    for a in lam.blocks:
        w, s, zh = np.linalg.svd(a)
        keep = s > tol.rank
        wk, sk, zk = w[:, keep], s[keep], zh[keep, :].conj().T
        omegas.append(wk @ zk.conj().T)
        absl.append((zk * sk) @ zk.conj().T)
    return Element(lam.shape, omegas), Element(lam.shape, absl)


# ---------------------------------------------------------------------------
# JSON


def _block_to_list(spec: Block, a: np.ndarray):
    if spec.field == REAL:
        return [[float(x) for x in row] for row in a]
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def element_to_dict(a: Element) -> dict:
    return {
        "shape": [{"dim": b.dim, "field": b.field} for b in a.shape],
        "blocks": [_block_to_list(s, m) for s, m in zip(a.shape, a.blocks)],
    }


def shape_from_json(obj) -> AlgebraShape:
    try:
        return AlgebraShape(tuple(Block(int(b["dim"]), b["field"]) for b in obj))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed shape header: {exc}") from exc


def _complex_entry(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValidationError("complex entries must be numbers or [re, im] pairs")
        return complex(float(x[0]), float(x[1]))
    return complex(float(x))


def element_from_dict(obj: dict) -> Element:
    if not isinstance(obj, dict) or "shape" not in obj:
        raise ValidationError("element JSON needs a 'shape' header")
    shape = shape_from_json(obj["shape"])
    blocks = []
    try:
        raws = list(obj["blocks"])
        if len(raws) != len(shape):
            raise ValidationError(f"expected {len(shape)} blocks, got {len(raws)}")
        for spec, raw in zip(shape, raws):
            if spec.field == COMPLEX:
                # entries are numbers or [re, im] pairs, freely mixed
                arr = np.array([[_complex_entry(x) for x in row] for row in raw], dtype=np.complex128)
            else:
                arr = np.array(raw, dtype=np.float64)
            blocks.append(arr)
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed element blocks: {exc}") from exc
    return Element(shape, blocks)


def element_to_json(a: Element, **kwargs) -> str:
    # repr-based float formatting round-trips bit-for-bit
    return json.dumps(element_to_dict(a), **kwargs)


def element_from_json(text: str) -> Element:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from exc
    return element_from_dict(obj)

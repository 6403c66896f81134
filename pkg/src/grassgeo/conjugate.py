"""Candidate conjugate times and analytic kernels of the differential of ``Exp_P``.

For a unit speed ``V`` with spectrum ``sigma(V)``, the differential of
``Exp_P`` at ``TV`` can only be singular at ``T = k pi / |s - s'|`` with
``s != s'`` in ``sigma(V)``. At such a time its kernel splits as ``S + T``:

* ``S`` comes from the corner algebra ``A0`` (the ``P_|lam|`` corner, where
  ``|lam|`` is diagonal with eigenvalues ``s_i > 0``). A Hermitian ``a`` may
  use the ``(i, j)`` matrix unit when ``|s_i - s_j|`` is a resonant value
  ``mu``; a skew ``b`` may use it when ``s_i + s_j = mu``. The tangent vector is
  ``Omega (a + b) + (a - b) Omega*``.
* ``T`` is made of ``P_v``-co-diagonal generators joining eigenvectors of ``v``
  with resonant eigenphase to ``ker v``.

A value ``mu > 0`` is resonant at time ``T`` when ``mu`` is a difference of
two points of ``sigma(V)`` and ``T mu / pi`` is a positive integer.

In finite dimensions the differential is a square operator, so injectivity
fails exactly when surjectivity does; a point is either not conjugate or
monoconjugate (equivalently epiconjugate) of some order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import oracle
from .errors import CrossCheckError, ValidationError
from .grassmann import Corner, GeodesicState, TangentVector
from .jacobi import dexp
from .matcore import REAL, DEFAULT_TOL, Element, element_to_dict

__all__ = [
    "Classification",
    "ConjugateTime",
    "MuSet",
    "KernelBasis",
    "ConjugateReport",
    "ReferenceRow",
    "conjugate_times",
    "mu_set",
    "resonant_values",
    "kernel_H",
    "kernel_K",
    "kernel_S",
    "kernel_codiag",
    "classify",
    "classify_all",
    "projective_reference",
    "eigen_witness_kernel",
]

_UNIT_SPEED_TOL = 1e-9


class Classification(str, Enum):
    NOT_CONJUGATE = "NotConjugate"
    MONOCONJUGATE = "Monoconjugate"


@dataclass(frozen=True)
class ConjugateTime:
    """A candidate time and every ``(k, s, s')`` producing it (``T = k pi / |s - s'|``)."""

    T: float
    witnesses: tuple[tuple[int, float, float], ...]
    tolerance_resolved: bool = False

    def __post_init__(self):
        if not self.T > 0:
            raise ValidationError("conjugate times are positive")

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "witnesses": [{"k": k, "s": s, "s_prime": sp} for k, s, sp in self.witnesses],
            "tolerance_resolved": self.tolerance_resolved,
        }


@dataclass(frozen=True)
class MuSet:
    """Resonance indices ``j`` and values ``mu_j = (j / |k|) |s - s'|``."""

    js: tuple[int, ...]
    mus: tuple[float, ...]


@dataclass(frozen=True)
class KernelBasis:
    S_part: tuple[TangentVector, ...]
    T_part: tuple[TangentVector, ...]

    @property
    def total_dim(self) -> int:
        return len(self.S_part) + len(self.T_part)

    def vectors(self) -> list[TangentVector]:
        return list(self.S_part) + list(self.T_part)


@dataclass(frozen=True)
class ConjugateReport:
    time: ConjugateTime
    classification: Classification
    order: int
    kernel: KernelBasis
    oracle_nullity: int
    tolerance_resolved: bool = False
    mus: tuple[float, ...] = field(default=())

    def to_dict(self, include_kernel: bool = True) -> dict:
        out = {
            "time": self.time.T,
            "witnesses": self.time.to_dict()["witnesses"],
            "classification": self.classification.value,
            "order": self.order,
            "oracle_nullity": self.oracle_nullity,
            "tolerance_resolved": self.tolerance_resolved,
            "mus": list(self.mus),
        }
        if include_kernel:
            out["kernel_basis"] = [element_to_dict(w.x) for w in self.kernel.vectors()]
        return out

    def to_json(self, include_kernel: bool = True, **kwargs) -> str:
        return json.dumps(self.to_dict(include_kernel), **kwargs)


# ---------------------------------------------------------------------------
# resonances


def _spectrum(state: GeodesicState) -> list[float]:
    return sorted(state.spec_V.eigenvalues)


def _differences(state: GeodesicState) -> list[float]:
    sp = _spectrum(state)
    tol = state.tol.cluster
    diffs = [b - a for i, a in enumerate(sp) for b in sp[i + 1:] if b - a > tol]
    return [g[0] for g in _merge(sorted(diffs), 2 * tol)]


def _merge(vals: Sequence[float], tol: float) -> list[list[float]]:
    out: list[list[float]] = []
    for v in vals:
        if out and v - out[-1][0] <= tol:
            out[-1].append(v)
        else:
            out.append([v])
    return out


def _resonance(T: float, d: float, tol: float) -> tuple[int, bool] | None:
    """``(m, exact)`` when ``T d / pi`` is within tolerance of a positive integer ``m``."""
    m = round(T * d / math.pi)
    if m < 1:
        return None
    gap = abs(d - m * math.pi / T)
    if gap > 2 * tol:
        return None
    return m, gap <= 1e-12 * max(1.0, d)


def resonant_values(state: GeodesicState, T: float) -> tuple[tuple[float, ...], bool]:
    """Resonant ``mu`` at time ``T`` and whether any was matched only within tolerance."""
    mus, resolved = [], False
    for d in _differences(state):
        r = _resonance(T, d, state.tol.cluster)
        if r is not None:
            mus.append(d)
            resolved |= not r[1]
    return tuple(mus), resolved


def _require_unit(state: GeodesicState):
    if abs(state.speed - 1.0) > _UNIT_SPEED_TOL:
        raise ValidationError(f"conjugate-time enumeration needs ||V|| = 1 (got {state.speed!r}); normalize first")


def conjugate_times(state: GeodesicState, t_max: float) -> list[ConjugateTime]:
    """All candidate times ``0 < T <= t_max``, merged across spectral pairs, ascending."""
    _require_unit(state)
    sp = _spectrum(state)
    ctol = state.tol.cluster
    raw = []
    for i, s_lo in enumerate(sp):
        for s_hi in sp[i + 1:]:
            d = s_hi - s_lo
            if d <= ctol:
                continue
            k = 1
            while k * math.pi / d <= t_max + 1e-12:
                raw.append((k * math.pi / d, (k, s_hi, s_lo)))
                k += 1
    raw.sort(key=lambda r: r[0])
    out = []
    for group in _merge([r[0] for r in raw], ctol * 10):
        members = [r for r in raw if group[0] - 1e-300 <= r[0] <= group[-1]]
        times = [r[0] for r in members]
        # the smallest denominator gives the most accurate value
        T = min(members, key=lambda r: r[1][0])[0]
        resolved = max(times) - min(times) > 1e-12 * max(times)
        out.append(ConjugateTime(T, tuple(r[1] for r in members), resolved))
    return out


def mu_set(state: GeodesicState, k: int, s: float, s_prime: float) -> MuSet:
    """``Lambda = {j >= 1 : j |s - s'| = |k| |s1 - s2|}`` with the matching ``mu_j``."""
    d = abs(s - s_prime)
    if d <= state.tol.cluster:
        raise ValidationError("mu_set needs s != s'")
    if k == 0:
        raise ValidationError("k must be a nonzero integer")
    js = set()
    for D in _differences(state):
        j = round(abs(k) * D / d)
        if j >= 1 and abs(j * d - abs(k) * D) <= 2 * abs(k) * state.tol.cluster:
            js.add(j)
    js.add(abs(k))
    js_sorted = tuple(sorted(js))
    return MuSet(js_sorted, tuple(j * d / abs(k) for j in js_sorted))


# ---------------------------------------------------------------------------
# corner kernels


def _matches(x: float, mus: Sequence[float], tol: float) -> bool:
    return any(abs(x - m) <= 2 * tol for m in mus)


def _unit(r: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((r, r), dtype=np.complex128)
    e[i, j] = 1.0
    return e


def _corner_elements(corner: Corner, pieces) -> list[Element]:
    out = []
    for bi, z in pieces:
        blocks = [np.zeros((r, r), dtype=np.complex128) for r in corner.ranks]
        blocks[bi] = z
        el = corner.embed(blocks)
        if corner.shape.has_real:
            el = Element(corner.shape, [np.real(b) if s.field == REAL else b
                                        for s, b in zip(corner.shape, el.blocks)])
        out.append(el)
    return out


def kernel_H(corner: Corner, mus: Sequence[float], tol: float = DEFAULT_TOL.cluster) -> list[Element]:
    """Hermitian ``a`` in ``A0`` annihilated by ``prod_j ((L - R)^2 - mu_j^2)``.

    ``L, R`` multiply by ``|lam|``; the matrix unit ``e_ij`` of the eigenbasis
    has ``L - R`` eigenvalue ``s_i - s_j``, so only ``i != j`` with
    ``|s_i - s_j| = mu_j`` contribute.
    """
    pieces = []
    for bi, (spec, s) in enumerate(zip(corner.shape, corner.values)):
        r = len(s)
        for i in range(r):
            for j in range(i + 1, r):
                if _matches(abs(s[i] - s[j]), mus, tol):
                    pieces.append((bi, _unit(r, i, j) + _unit(r, j, i)))
                    if spec.field != REAL:
                        pieces.append((bi, 1j * (_unit(r, i, j) - _unit(r, j, i))))
    return _corner_elements(corner, pieces)


def kernel_K(corner: Corner, mus: Sequence[float], tol: float = DEFAULT_TOL.cluster) -> list[Element]:
    """Skew ``b`` in ``A0`` annihilated by ``prod_j (L + R - mu_j)``.

    The unit ``e_ij`` has ``L + R`` eigenvalue ``s_i + s_j``; diagonal units
    enter (as ``i e_ii``) only for complex blocks.
    """
    pieces = []
    for bi, (spec, s) in enumerate(zip(corner.shape, corner.values)):
        r = len(s)
        for i in range(r):
            if spec.field != REAL and _matches(2 * s[i], mus, tol):
                pieces.append((bi, 1j * _unit(r, i, i)))
            for j in range(i + 1, r):
                if _matches(s[i] + s[j], mus, tol):
                    pieces.append((bi, _unit(r, i, j) - _unit(r, j, i)))
                    if spec.field != REAL:
                        pieces.append((bi, 1j * (_unit(r, i, j) + _unit(r, j, i))))
    return _corner_elements(corner, pieces)


def _s_vectors(state: GeodesicState, hs: Sequence[Element], ks: Sequence[Element]) -> list[TangentVector]:
    om = state.omega
    out = []
    for a in hs:
        out.append(TangentVector(state.P, om @ a + a @ om.H))
    for b in ks:
        out.append(TangentVector(state.P, om @ b - b @ om.H))
    return out


def kernel_S(state: GeodesicState, T: float, mus: Sequence[float] | None = None) -> list[TangentVector]:
    """Kernel vectors coming from the ``A0`` corner, ``Omega (a + b) + (a - b) Omega*``."""
    if mus is None:
        mus = resonant_values(state, T)[0]
    tol = state.tol.cluster
    return _s_vectors(state, kernel_H(state.corner, mus, tol), kernel_K(state.corner, mus, tol))


def _range_basis(p: Element) -> list[np.ndarray]:
    out = []
    for m in p.blocks:
        w, u = np.linalg.eigh((m + m.conj().T) / 2)
        out.append(u[:, w > 0.5])
    return out


def _resonant_support(state: GeodesicState, T: float) -> Element:
    """Sum of spectral projections of ``V`` at points ``s`` with ``T |s| / pi`` a positive integer."""
    n = Element.zeros(state.shape)
    for val, proj in zip(state.spec_V.eigenvalues, state.spec_V.projections):
        if abs(val) > state.tol.cluster and _resonance(T, abs(val), state.tol.cluster) is not None:
            n = n + proj
    return n


def kernel_codiag(state: GeodesicState, T: float) -> list[TangentVector]:
    """``P_v``-co-diagonal kernel vectors.

    With ``N`` the resonant spectral projection of ``V`` (it commutes with
    ``P``), generators ``e f* - f e*`` (and ``i (e f* + f e*)`` on complex
    blocks) pair ``e`` in ``ran(NP)`` with ``f`` in ``ran((1 - P_v)(1 - P))``,
    and ``e`` in ``ran(N(1 - P))`` with ``f`` in ``ran((1 - P_v) P)``.
    """
    p = state.P.p
    one = Element.identity(state.shape)
    n = _resonant_support(state, T)
    qv = one - state.P_v
    pairs = [
        (_range_basis(n @ p), _range_basis(qv @ (one - p))),
        (_range_basis(n @ (one - p)), _range_basis(qv @ p)),
    ]
    out = []
    for es, fs in pairs:
        for bi, spec in enumerate(state.shape):
            e_cols, f_cols = es[bi], fs[bi]
            for i in range(e_cols.shape[1]):
                for j in range(f_cols.shape[1]):
                    outer = e_cols[:, i: i + 1] @ f_cols[:, j: j + 1].conj().T
                    gens = [outer - outer.conj().T]
                    if spec.field != REAL:
                        gens.append(1j * (outer + outer.conj().T))
                    for g in gens:
                        blocks = [np.zeros((s.dim, s.dim), dtype=s.dtype) for s in state.shape]
                        blocks[bi] = np.real(g) if spec.field == REAL else g
                        x = Element(state.shape, blocks)
                        X = x @ p - p @ x
                        out.append(TangentVector(state.P, (X + X.H) * 0.5))
    return out


# ---------------------------------------------------------------------------
# classification


def _witnesses_at(state: GeodesicState, T: float) -> tuple[tuple[int, float, float], ...]:
    sp = _spectrum(state)
    out = []
    for i, lo in enumerate(sp):
        for hi in sp[i + 1:]:
            r = _resonance(T, hi - lo, state.tol.cluster)
            if hi - lo > state.tol.cluster and r is not None:
                out.append((r[0], hi, lo))
    return tuple(out)


def classify(state: GeodesicState, T: float | ConjugateTime, tol_rank: float | None = None) -> ConjugateReport:
    """Analytic kernel at ``T``, cross-checked against the oracle's SVD nullity.

    Raises :class:`CrossCheckError` when the analytic order and the oracle
    nullity differ.
    """
    if isinstance(T, ConjugateTime):
        ct = T
    else:
        if not T > 0:
            raise ValidationError("T must be positive")
        ct = ConjugateTime(float(T), _witnesses_at(state, float(T)))
    mus, resolved = resonant_values(state, ct.T)
    S = tuple(kernel_S(state, ct.T, mus))
    Tp = tuple(kernel_codiag(state, ct.T))
    kernel = KernelBasis(S, Tp)
    rank_tol = state.tol.rank if tol_rank is None else tol_rank
    op = oracle.vectorize_sinhc_ad(state.v, ct.T, oracle.adapted_basis(state.P.p))
    null = oracle.nullity(op, rank_tol)[0]
    order = kernel.total_dim
    if order != null:
        raise CrossCheckError(
            f"analytic order {order} disagrees with oracle nullity {null} at T = {ct.T!r}"
        )
    cls = Classification.MONOCONJUGATE if order > 0 else Classification.NOT_CONJUGATE
    return ConjugateReport(ct, cls, order, kernel, null, resolved or ct.tolerance_resolved, mus)


def classify_all(state: GeodesicState, t_max: float) -> list[ConjugateReport]:
    return [classify(state, ct) for ct in conjugate_times(state, t_max)]


def kernel_residual(state: GeodesicState, T: float, W: TangentVector) -> float:
    """``||D(Exp_P)_{TV} W|| / ||W||``."""
    return dexp(state, T, W).norm() / max(W.norm(), 1e-300)


# ---------------------------------------------------------------------------
# reference table


@dataclass(frozen=True)
class ReferenceRow:
    """Times ``offset + k * period`` (``k >= 0``) all share ``order``."""

    label: str
    offset: float
    period: float
    order: int

    def contains(self, T: float, tol: float = 1e-9) -> bool:
        k = (T - self.offset) / self.period
        return k > -tol and abs(k - round(k)) <= tol


def projective_reference(n: int, field: str = "C") -> list[ReferenceRow]:
    """Orders at the conjugate families of projective space of dimension ``n - 1``.

    Unit geodesics through a rank-one ``P`` in ``M_n``. Complex: order 1 at
    odd multiples of ``pi/2`` and ``2n - 3`` at multiples of ``pi``. Real:
    order 0 at odd multiples of ``pi/2`` and ``n - 2`` at multiples of ``pi``
    (so the real projective line has no conjugate points). These values are
    the ones the analytic kernel and the SVD oracle both produce.
    """
    if int(n) != n or n < 2:
        raise ValidationError("projective_reference needs an integer n >= 2")
    if field not in ("C", "R"):
        raise ValidationError("field must be 'C' or 'R'")
    if field == "R" and n == 2:
        return []
    odd = ReferenceRow("(2k+1)pi/2", math.pi / 2, math.pi, 1 if field == "C" else 0)
    even = ReferenceRow("k pi", math.pi, math.pi, 2 * n - 3 if field == "C" else n - 2)
    return [odd, even]


# ---------------------------------------------------------------------------
# explicit witnesses


def _eigvecs(corner: Corner, s: float, tol: float) -> list[tuple[int, np.ndarray]]:
    out = []
    for bi, (u, w) in enumerate(zip(corner.vectors, corner.values)):
        for c in range(len(w)):
            if abs(w[c] - s) <= 2 * tol:
                out.append((bi, u[:, c]))
    return out


def eigen_witness_kernel(state: GeodesicState, k: int, s: float, s_prime: float) -> TangentVector | None:
    """An explicit kernel vector at ``T = k pi / |s - s'|`` built from eigenvectors.

    Same-sign ``s, s'`` use the Hermitian ``xi_s xi_s'* + xi_s' xi_s*`` and
    opposite signs the skew ``xi_s xi_s'* - xi_s' xi_s*`` (for ``s' = -s``:
    ``i xi xi*`` on complex blocks, two independent eigenvectors on real ones),
    all with ``xi`` eigenvectors of ``|lam|``. When one of the values is 0 the
    witness joins a resonant eigenvector to ``ker V`` across ``P`` instead.
    Returns ``None`` when the needed eigenvectors do not exist in one block.
    """
    tol = state.tol.cluster
    if abs(s - s_prime) <= tol or k == 0:
        raise ValidationError("need s != s' and k != 0")
    T = abs(k) * math.pi / abs(s - s_prime)
    spec = state.spec_V.eigenvalues
    if not all(any(abs(x - e) <= 2 * tol for e in spec) for x in (s, s_prime)):
        return None
    if abs(s) <= tol or abs(s_prime) <= tol:
        w = _zero_witness(state, T, s if abs(s_prime) <= tol else s_prime)
    else:
        w = _corner_witness(state, s, s_prime)
    if w is None:
        return None
    r = kernel_residual(state, T, w)
    if r > max(state.tol.rank, 1e-9) * 10:
        raise CrossCheckError(f"eigenvector witness is not in the kernel (residual {r:.2e})")
    return w


def _corner_witness(state: GeodesicState, s: float, s_prime: float) -> TangentVector | None:
    corner, tol = state.corner, state.tol.cluster
    shape = state.shape

    def lift(bi, m):
        blocks = [np.zeros((b.dim, b.dim), dtype=b.dtype) for b in shape]
        blocks[bi] = np.real(m) if shape.blocks[bi].field == REAL else m
        return Element(shape, blocks)

    xs, xps = _eigvecs(corner, abs(s), tol), _eigvecs(corner, abs(s_prime), tol)
    same_sign = (s > 0) == (s_prime > 0)
    om = state.omega
    for bi, xi in xs:
        for bj, xj in xps:
            if bi != bj:
                continue
            outer = np.outer(xi, xj.conj())
            if same_sign:
                a = lift(bi, outer + outer.conj().T)
                if a.norm() > 0.5:
                    return TangentVector(state.P, om @ a + a @ om.H)
            else:
                b = lift(bi, outer - outer.conj().T)
                if b.norm() > 0.5:
                    return TangentVector(state.P, om @ b - b @ om.H)
    if not same_sign and abs(abs(s) - abs(s_prime)) <= tol:
        for bi, xi in xs:
            if shape.blocks[bi].field != REAL:
                b = lift(bi, 1j * np.outer(xi, xi.conj()))
                return TangentVector(state.P, om @ b - b @ om.H)
    return None


def _zero_witness(state: GeodesicState, T: float, s: float) -> TangentVector | None:
    p = state.P.p
    one = Element.identity(state.shape)
    proj = state.spec_V.projection_for(s)
    neg = state.spec_V.projection_for(-s)
    n = proj + neg if neg is not None else proj
    qv = one - state.P_v
    for es, fs in ((_range_basis(n @ p), _range_basis(qv @ (one - p))),
                   (_range_basis(n @ (one - p)), _range_basis(qv @ p))):
        for bi, spec in enumerate(state.shape):
            if es[bi].shape[1] and fs[bi].shape[1]:
                outer = np.outer(es[bi][:, 0], fs[bi][:, 0].conj())
                g = outer - outer.conj().T
                blocks = [np.zeros((b.dim, b.dim), dtype=b.dtype) for b in state.shape]
                blocks[bi] = np.real(g) if spec.field == REAL else g
                x = Element(state.shape, blocks)
                X = x @ p - p @ x
                return TangentVector(state.P, (X + X.H) * 0.5)
    return None

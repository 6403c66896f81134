"""Projections, co-diagonal tangent calculus, geodesics, transport and curvature.

A point of the Grassmannian is a projection ``P``; tangent vectors at ``P`` are
Hermitian ``X`` with ``X = XP + PX`` and each has a unique skew, co-diagonal
generator ``x = [X, P]`` with ``[x, P] = X``. The geodesic with initial speed
``V`` is ``exp(tv) P exp(-tv)`` where ``v = [V, P]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CrossCheckError, ValidationError
from .matcore import (
    DEFAULT_TOL,
    Element,
    SpectralData,
    Tolerances,
    bracket,
    expm_skew,
    hermitian_eig,
    hermitian_fn,
    polar_rectangular,
    trace_inner,
)

__all__ = [
    "Projection",
    "TangentVector",
    "Corner",
    "GeodesicState",
    "codiagonal_projection",
    "diagonal_part",
    "tangent_from_skew",
    "skew_from_tangent",
    "tangent",
    "exp_map",
    "geodesic_eval",
    "geodesic_block_formula",
    "geodesic_velocity",
    "parallel_transport_geodesic",
    "horizontal_lift",
    "parallel_transport_path",
    "christoffel",
    "covariant_derivative",
    "curvature",
    "sectional",
    "complex_structure",
    "kks_form",
    "moment",
    "geodesic_symmetry",
    "grid_derivative",
]


def _scale_tol(tol: float, *els: Element) -> float:
    return tol * max([1.0] + [e.norm() for e in els])


@dataclass(frozen=True, eq=False)
class Projection:
    p: Element
    tol: Tolerances = DEFAULT_TOL

    def __post_init__(self):
        if isinstance(self.p, Projection):
            object.__setattr__(self, "p", self.p.p)
        if not self.p.is_projection(self.tol.structural):
            raise ValidationError("element is not an orthogonal projection (p^2 = p = p*)")

    @property
    def shape(self):
        return self.p.shape

    @property
    def symmetry(self) -> Element:
        """``2P - 1``: a self-adjoint unitary."""
        return 2.0 * self.p - Element.identity(self.shape)

    @property
    def complement(self) -> Element:
        return Element.identity(self.shape) - self.p

    def ranks(self) -> tuple[int, ...]:
        return tuple(int(round(np.trace(b).real)) for b in self.p.blocks)


def _as_element(p) -> Element:
    return p.p if isinstance(p, Projection) else p


def codiagonal_projection(a: Element, P: Projection | Element) -> Element:
    """``P A (1-P) + (1-P) A P``."""
    p = _as_element(P)
    q = Element.identity(p.shape) - p
    return p @ a @ q + q @ a @ p


def diagonal_part(a: Element, P: Projection | Element) -> Element:
    p = _as_element(P)
    q = Element.identity(p.shape) - p
    return p @ a @ p + q @ a @ q


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Hermitian, ``base``-co-diagonal element."""

    base: Projection
    x: Element

    def __post_init__(self):
        tol = _scale_tol(self.base.tol.structural, self.x)
        if not self.x.is_hermitian(tol):
            raise ValidationError("tangent vector must be Hermitian")
        p = self.base.p
        if (self.x @ p + p @ self.x - self.x).norm() > tol:
            raise ValidationError("tangent vector must be co-diagonal: X = XP + PX")

    @property
    def generator(self) -> Element:
        """The skew co-diagonal ``[X, P]``."""
        return bracket(self.x, self.base.p)

    def norm(self) -> float:
        return self.x.norm()

    def __add__(self, other: "TangentVector") -> "TangentVector":
        return TangentVector(self.base, self.x + other.x)

    def __sub__(self, other: "TangentVector") -> "TangentVector":
        return TangentVector(self.base, self.x - other.x)

    def __mul__(self, c: float) -> "TangentVector":
        return TangentVector(self.base, float(c) * self.x)

    __rmul__ = __mul__

    def __neg__(self):
        return TangentVector(self.base, -self.x)


def tangent(P: Projection, a: Element) -> TangentVector:
    """Tangent vector obtained by co-diagonal projection of the Hermitian part of ``a``."""
    h = (a + a.H) * 0.5
    return TangentVector(P, codiagonal_projection(h, P))


def tangent_from_skew(x: Element, P: Projection) -> TangentVector:
    """``x -> [x, P]`` from skew co-diagonal elements onto the tangent space."""
    tol = _scale_tol(P.tol.structural, x)
    if not x.is_skew(tol):
        raise ValidationError("generator must be skew-adjoint")
    if (codiagonal_projection(x, P) - x).norm() > tol:
        raise ValidationError("generator must be P-co-diagonal")
    return TangentVector(P, bracket(x, P.p))


def skew_from_tangent(V: TangentVector) -> Element:
    return V.generator


def exp_map(P: Projection, V: TangentVector | Element) -> Projection:
    """``Exp_P(V) = e^{[V,P]} P e^{-[V,P]}``."""
    x = V.x if isinstance(V, TangentVector) else V
    v = bracket(x, P.p)
    u = expm_skew(v, P.tol)
    return Projection(u @ P.p @ u.H, P.tol)


@dataclass(frozen=True, eq=False)
class Corner:
    """The corner algebra ``A0 = P_|lam| A P_|lam|`` made explicit.

    ``vectors[b]`` is an ``n_b x r_b`` isometry whose columns are eigenvectors
    of ``|lam|`` with nonzero eigenvalue ``values[b]`` (ascending), so in these
    coordinates ``|lam|`` is diagonal and every ``A0``-element is an
    ``r_b x r_b`` matrix per block.
    """

    shape: object
    vectors: tuple[np.ndarray, ...]
    values: tuple[np.ndarray, ...]

    @classmethod
    def from_abs(cls, abs_lam: Element, tol: Tolerances) -> "Corner":
        vecs, vals = [], []
        for spec, a in zip(abs_lam.shape, abs_lam.blocks):
            w, u = np.linalg.eigh((a + a.conj().T) / 2)
            keep = w > tol.rank
            vecs.append(u[:, keep])
            vals.append(w[keep])
        return cls(abs_lam.shape, tuple(vecs), tuple(vals))

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(v.shape[1] for v in self.vectors)

    def embed(self, blocks: Sequence[np.ndarray]) -> Element:
        return Element(self.shape, [b @ z @ b.conj().T for b, z in zip(self.vectors, blocks)])

    def compress(self, a: Element) -> list[np.ndarray]:
        return [b.conj().T @ m @ b for b, m in zip(self.vectors, a.blocks)]

    def identity(self) -> Element:
        return self.embed([np.eye(r) for r in self.ranks])


@dataclass(frozen=True, eq=False)
class GeodesicState:
    """Base point, speed, generator and the polar data of the speed.

    Build with :meth:`from_tangent`. ``lam = P V (1-P)`` is the upper-right
    block, ``lam = omega |lam|`` its polar decomposition, and
    ``P_v = P_|lam*| + P_|lam|`` the support projection of ``v``.
    """

    P: Projection
    V: TangentVector
    v: Element
    lam: Element
    omega: Element
    abs_lam: Element
    abs_lam_star: Element
    P_abs_lam: Element
    P_abs_lam_star: Element
    P_v: Element
    spec_V: SpectralData
    spec_v: SpectralData
    corner: Corner

    @property
    def tol(self) -> Tolerances:
        return self.P.tol

    @property
    def shape(self):
        return self.P.shape

    @property
    def speed(self) -> float:
        return self.V.norm()

    @classmethod
    def from_tangent(cls, V: TangentVector, normalize: bool = False) -> "GeodesicState":
        P = V.base
        tol = P.tol
        if normalize:
            n = V.norm()
            if n == 0:
                raise ValidationError("cannot normalize the zero tangent vector")
            V = TangentVector(P, V.x / n)
        p, q = P.p, P.complement
        v = bracket(V.x, p)
        lam = p @ V.x @ q
        omega, abs_lam = polar_rectangular(lam, tol)
        abs_lam_star = omega @ abs_lam @ omega.H
        P_abs_lam = omega.H @ omega
        P_abs_lam_star = omega @ omega.H
        P_v = P_abs_lam + P_abs_lam_star
        state = cls(
            P=P,
            V=V,
            v=v,
            lam=lam,
            omega=omega,
            abs_lam=abs_lam,
            abs_lam_star=abs_lam_star,
            P_abs_lam=P_abs_lam,
            P_abs_lam_star=P_abs_lam_star,
            P_v=P_v,
            spec_V=hermitian_eig(V.x, tol),
            spec_v=hermitian_eig(v, tol),
            corner=Corner.from_abs(abs_lam, tol),
        )
        state.check()
        return state

    @classmethod
    def from_elements(cls, P: Element, V: Element, tol: Tolerances = DEFAULT_TOL, normalize: bool = False):
        proj = Projection(P, tol)
        return cls.from_tangent(TangentVector(proj, V), normalize=normalize)

    def check(self):
        """Polar identities and support identities, within structural tolerance."""
        tol = _scale_tol(max(self.tol.structural, 1e-9), self.V.x)
        checks = {
            "lam = omega |lam|": (self.omega @ self.abs_lam - self.lam).norm(),
            "omega* omega = P_|lam|": (self.omega.H @ self.omega - self.P_abs_lam).norm(),
            "P_|lam| is a projection": (self.P_abs_lam @ self.P_abs_lam - self.P_abs_lam).norm(),
            "|lam*|^2 = lam lam*": (self.abs_lam_star @ self.abs_lam_star - self.lam @ self.lam.H).norm(),
            "P_v |v| = |v|": (self.P_v @ self.V.x - self.V.x).norm(),
        }
        for name, r in checks.items():
            if r > tol:
                raise CrossCheckError(f"geodesic state identity failed: {name} (residual {r:.2e})")

    def with_speed(self, c: float) -> "GeodesicState":
        return GeodesicState.from_tangent(TangentVector(self.P, c * self.V.x))

    def exp_tv(self, t: float) -> Element:
        return expm_skew(t * self.v, self.tol)


def geodesic_block_formula(state: GeodesicState, t: float) -> Element:
    """Closed block form of ``gamma(t)`` in terms of ``lam``, ``|lam|`` and ``|lam*|``."""
    p, q = state.P.p, state.P.complement
    tol = state.tol
    cos2_star = hermitian_fn(state.abs_lam_star, lambda s: np.cos(t * s) ** 2, tol)
    sin2 = hermitian_fn(state.abs_lam, lambda s: np.sin(t * s) ** 2, tol)

    def g(s):
        s = np.asarray(s, dtype=float)
        safe = np.where(np.abs(s) > 0, s, 1.0)
        return np.where(np.abs(s) > 0, np.cos(t * s) * np.sin(t * s) / safe, t)

    off = state.lam @ hermitian_fn(state.abs_lam, g, tol)
    return p @ cos2_star @ p + off + off.H + q @ sin2 @ q


def geodesic_eval(state: GeodesicState, t: float, check: bool = True) -> Projection:
    """``gamma(t) = e^{tv} P e^{-tv}``, cross-checked against the block formula."""
    u = state.exp_tv(t)
    g = u @ state.P.p @ u.H
    if check:
        b = geodesic_block_formula(state, t)
        r = (g - b).norm()
        if r > max(state.tol.structural, 1e-10) * (1 + abs(t) * state.speed):
            raise CrossCheckError(f"geodesic formulas disagree at t={t}: {r:.2e}")
    return Projection(g, state.tol)


def geodesic_velocity(state: GeodesicState, t: float) -> TangentVector:
    """``gamma'(t) = e^{tv} V e^{-tv}``."""
    u = state.exp_tv(t)
    return TangentVector(Projection(u @ state.P.p @ u.H, state.tol), u @ state.V.x @ u.H)


def parallel_transport_geodesic(state: GeodesicState, X: TangentVector, t: float) -> TangentVector:
    """Transport of ``X`` along the geodesic: ``e^{tv} X e^{-tv}``."""
    if X.base.p is not state.P.p and not X.base.p.allclose(state.P.p, state.tol.structural):
        raise ValidationError("X is not tangent at the geodesic's base point")
    u = state.exp_tv(t)
    base = Projection(u @ state.P.p @ u.H, state.tol)
    return TangentVector(base, u @ X.x @ u.H)


# ---------------------------------------------------------------------------
# sampled paths


def _uniform_step(times: np.ndarray) -> float:
    h = np.diff(times)
    if len(h) == 0 or np.any(h <= 0) or np.ptp(h) > 1e-9 * max(1.0, abs(h[0])):
        raise ValidationError("sample times must be strictly increasing and uniform")
    return float(h[0])


def grid_derivative(values: Sequence[Element], h: float) -> list[Element]:
    """Fourth-order centered differences on a uniform grid (one-sided at the ends)."""
    n = len(values)
    if n < 5:
        raise ValidationError("need at least 5 samples for fourth-order differences")
    f = values
    out = []
    for i in range(n):
        if 2 <= i <= n - 3:
            d = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12 * h)
        elif i == 0:
            d = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12 * h)
        elif i == 1:
            d = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12 * h)
        elif i == n - 2:
            d = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / (12 * h)
        else:
            d = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / (12 * h)
        out.append(d)
    return out


def _midpoints(a: Sequence[Element]) -> list[Element]:
    """Cubic Lagrange interpolation of grid values at interval midpoints."""
    n = len(a)
    out = []
    for i in range(n - 1):
        if i == 0:
            m = (5.0 * a[0] + 15.0 * a[1] - 5.0 * a[2] + a[3]) / 16
        elif i == n - 2:
            m = (a[n - 4] - 5.0 * a[n - 3] + 15.0 * a[n - 2] + 5.0 * a[n - 1]) / 16
        else:
            m = (-1.0 * a[i - 1] + 9.0 * a[i] + 9.0 * a[i + 1] - a[i + 2]) / 16
        out.append(m)
    return out


def _polar_unitary(u: Element) -> Element:
    out = []
    for m in u.blocks:
        w, _, zh = np.linalg.svd(m)
        out.append(w @ zh)
    return Element(u.shape, out)


def _path_elements(path) -> list[Element]:
    return [_as_element(p) for p in path]


def horizontal_lift(path: Sequence[Projection], times: Sequence[float] | None = None,
                    tol: Tolerances = DEFAULT_TOL) -> list[Element]:
    """Co-diagonal lifting ``U' = [P', P] U``, ``U(t0) = 1``, integrated by RK4.

    ``P'`` comes from fourth-order differences on the grid, midpoint values
    from cubic interpolation; ``U`` is re-unitarized by its polar factor every
    step.
    """
    ps = _path_elements(path)
    n = len(ps)
    times = np.linspace(0.0, 1.0, n) if times is None else np.asarray(times, dtype=float)
    if len(times) != n:
        raise ValidationError("times and path have different lengths")
    h = _uniform_step(times)
    for a, b in zip(ps, ps[1:]):
        if (a - b).norm() >= 0.1:
            raise ValidationError("path sampling too coarse: consecutive projections differ by >= 0.1")
    dps = grid_derivative(ps, h)
    gens = [bracket(dp, p) for dp, p in zip(dps, ps)]
    mids = _midpoints(gens)
    u = Element.identity(ps[0].shape)
    out = [u]
    for i in range(n - 1):
        a0, am, a1 = gens[i], mids[i], gens[i + 1]
        k1 = a0 @ u
        k2 = am @ (u + (h / 2) * k1)
        k3 = am @ (u + (h / 2) * k2)
        k4 = a1 @ (u + h * k3)
        u = u + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        defect = (u.H @ u - Element.identity(u.shape)).norm()
        if defect > 1e-6:
            raise CrossCheckError(f"lift lost unitarity ({defect:.2e}) at step {i}; refine the grid")
        u = _polar_unitary(u)
        out.append(u)
    return out


def parallel_transport_path(path: Sequence[Projection], X: TangentVector,
                            times: Sequence[float] | None = None) -> TangentVector:
    """Transport ``X`` (tangent at ``path[0]``) to the end of a sampled path."""
    ps = _path_elements(path)
    if not X.base.p.allclose(ps[0], X.base.tol.structural * 10):
        raise ValidationError("X is not tangent at the first sample of the path")
    u = horizontal_lift(path, times, X.base.tol)[-1]
    end = Projection(ps[-1], X.base.tol)
    raw = u @ X.x @ u.H
    # integration error leaves a small diagonal residue; strip it but refuse large ones
    clean = codiagonal_projection((raw + raw.H) * 0.5, end)
    defect = (raw - clean).norm()
    if defect > 1e-6 * max(1.0, X.norm()):
        raise CrossCheckError(f"transported vector is not tangent (defect {defect:.2e}); refine the grid")
    return TangentVector(end, clean)


# ---------------------------------------------------------------------------
# connection and curvature


def christoffel(P: Projection, X: TangentVector | Element, Y: TangentVector | Element) -> Element:
    """``Gamma_P(X, Y) = s_P (XY + YX) = [X, [Y, P]]``; both forms are evaluated and compared."""
    x = X.x if isinstance(X, TangentVector) else X
    y = Y.x if isinstance(Y, TangentVector) else Y
    a = P.symmetry @ (x @ y + y @ x)
    b = bracket(x, bracket(y, P.p))
    if (a - b).norm() > _scale_tol(1e-12, x @ y) * 10:
        raise CrossCheckError("the two Christoffel formulas disagree")
    return a


def covariant_derivative(path: Sequence[Projection], field: Sequence[TangentVector | Element],
                         times: Sequence[float] | None = None, presentation: str = "horizontal",
                         check: bool = __debug__, tol: float = 1e-6) -> list[Element]:
    """Covariant derivative of a sampled field along a sampled path.

    ``presentation="horizontal"`` projects the ordinary derivative onto the
    co-diagonal space; ``"reductive"`` conjugates by the co-diagonal lifting,
    differentiates, and conjugates back. With ``check`` (on unless Python runs
    with ``-O``) both are computed and must agree within ``tol``.
    """
    if presentation not in ("horizontal", "reductive"):
        raise ValidationError(f"unknown presentation {presentation!r}")
    ps = _path_elements(path)
    xs = [f.x if isinstance(f, TangentVector) else f for f in field]
    if len(xs) != len(ps):
        raise ValidationError("field and path have different lengths")
    times = np.linspace(0.0, 1.0, len(ps)) if times is None else np.asarray(times, dtype=float)
    h = _uniform_step(times)

    def horizontal():
        return [codiagonal_projection(d, p) for d, p in zip(grid_derivative(xs, h), ps)]

    def reductive():
        us = horizontal_lift(ps, times)
        pulled = [u.H @ x @ u for u, x in zip(us, xs)]
        return [u @ d @ u.H for u, d in zip(us, grid_derivative(pulled, h))]

    main = horizontal() if presentation == "horizontal" else reductive()
    if check:
        other = reductive() if presentation == "horizontal" else horizontal()
        worst = max((a - b).norm() for a, b in zip(main, other))
        if worst > tol:
            raise CrossCheckError(f"horizontal and reductive derivatives disagree by {worst:.2e}")
    return main


def curvature(P: Projection, X, Y, Z) -> Element:
    """``R_P(X, Y) Z = -[[X, Y], Z]``."""
    x, y, z = (a.x if isinstance(a, TangentVector) else a for a in (X, Y, Z))
    return -bracket(bracket(x, y), z)


def sectional(P: Projection, X, Y, tol: float = 1e-8) -> float:
    """Sectional curvature of the plane spanned by trace-orthonormal ``X, Y``.

    Returns ``2 (||XY||_2^2 - <XY, YX>) = ||[X, Y]||_2^2``. With the sign
    convention of :func:`curvature` this is ``<R(X,Y)X, Y>``; it vanishes
    exactly when ``X`` and ``Y`` commute.
    """
    x, y = (a.x if isinstance(a, TangentVector) else a for a in (X, Y))
    gram = np.array([[trace_inner(x, x), trace_inner(x, y)], [trace_inner(y, x), trace_inner(y, y)]])
    if np.max(np.abs(gram - np.eye(2))) > tol:
        raise ValidationError("sectional curvature needs trace-orthonormal X, Y")
    xy, yx = x @ y, y @ x
    sec = 2.0 * (trace_inner(xy, xy) - trace_inner(xy, yx))
    via_r = trace_inner(curvature(P, x, y, x), y)
    if abs(sec - via_r) > 1e-9 * max(1.0, abs(sec)):
        raise CrossCheckError("sectional curvature disagrees with the curvature tensor")
    return sec


def complex_structure(P: Projection, X: TangentVector) -> TangentVector:
    """``J X = i [P, X]``; only defined on all-complex algebras."""
    if P.shape.has_real:
        raise ValidationError("the complex structure needs all blocks complex")
    return TangentVector(P, 1j * bracket(P.p, X.x))


def kks_form(P: Projection, X: TangentVector, Y: TangentVector) -> float:
    """``omega_P(X, Y) = -<X, JY>``, cross-checked against ``-i tau(P [x, y])``."""
    w = -trace_inner(X.x, complex_structure(P, Y).x)
    x, y = X.generator, Y.generator
    alt = (-1j * (P.p @ bracket(x, y)).trace()).real
    if abs(w - alt) > 1e-9 * max(1.0, abs(w)):
        raise CrossCheckError("KKS form formulas disagree")
    return w


def moment(P: Projection, X: Element) -> float:
    """Moment map component ``mu^X(P) = <P, iX> = -Im tau(P X)`` for skew ``X``."""
    if not X.is_skew(_scale_tol(P.tol.structural, X)):
        raise ValidationError("moment map components are indexed by skew elements")
    return float(-(P.p @ X).trace().imag)


def geodesic_symmetry(P: Projection, Q: Projection | Element) -> Projection:
    """``S_P(Q) = s_P Q s_P``."""
    s = P.symmetry
    return Projection(s @ _as_element(Q) @ s, P.tol)

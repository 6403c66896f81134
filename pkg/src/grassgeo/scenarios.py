"""Built-in worked examples with PASS/FAIL assertions (used by ``grassgeo reproduce``).

Each scenario returns a list of :class:`Check`. Where a claimed closed-form
value disagrees with what the analytic kernel and the SVD oracle both
compute, the scenario asserts the claimed value anyway (and fails), next to
a passing check of the computed value, so the discrepancy stays visible.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import oracle
from .conjugate import Classification, classify, classify_all, conjugate_times, projective_reference
from .grassmann import GeodesicState, geodesic_eval
from .matcore import AlgebraShape, Element
from .metricpath import second_minimizing_geodesic, shortcut_past_cut
from .sampling import planted_first_conjugate, rng_from_env

__all__ = ["Check", "SCENARIOS", "run_scenario", "pocos_state", "projective_state", "scenario_names"]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (f"  [{self.detail}]" if self.detail else "")


def pocos_state(alpha: float) -> GeodesicState:
    """``P = e11 + e11`` and ``V = [[0,1],[1,0]] + [[0,a],[a,0]]`` in ``M2(C) + M2(C)``."""
    sh = AlgebraShape.of(2, 2)
    P = Element(sh, [np.diag([1.0, 0.0]), np.diag([1.0, 0.0])])
    V = Element(sh, [np.array([[0, 1.0], [1.0, 0]]), np.array([[0, alpha], [alpha, 0]])])
    return GeodesicState.from_elements(P, V)


def projective_state(n: int, field: str = "C") -> GeodesicState:
    """Unit geodesic through the rank-one ``e11`` in ``M_n`` with speed ``e12 + e21``."""
    sh = AlgebraShape.of((n, field))
    P = np.zeros((n, n))
    P[0, 0] = 1.0
    V = np.zeros((n, n))
    V[0, 1] = V[1, 0] = 1.0
    return GeodesicState.from_elements(Element(sh, [P]), Element(sh, [V]))


def _family_of(T: float, alpha: float) -> list[str]:
    fams = []
    for name, d in (("T1", 2.0), ("T2", 1 + alpha), ("T3", 1 - alpha), ("T4", 2 * alpha)):
        k = T * d / math.pi
        if abs(k - round(k)) < 1e-8 and round(k) >= 1:
            fams.append(name)
    return fams


def scenario_pocos(alphas=(0.4, 1 / 3, 0.7), t_max: float = 3 * math.pi) -> list[Check]:
    out = []
    st = pocos_state(0.4)
    firsts = sorted({round(ct.T, 9) for ct in conjugate_times(st, 10.0)})
    expected = sorted({round(x, 9) for x in (math.pi / 2, 5 * math.pi / 7, 5 * math.pi / 3, 5 * math.pi / 4)})
    out.append(Check("alpha=2/5: first members of the four families are pi/2, 5pi/7, 5pi/3, 5pi/4",
                     all(e in firsts for e in expected)))
    for a in alphas:
        st = pocos_state(a)
        reports = classify_all(st, t_max)
        out.append(Check(f"alpha={a:.4g}: analytic order = oracle nullity at every candidate",
                         all(r.order == r.oracle_nullity for r in reports)))
        for fam in ("T1", "T2", "T3", "T4"):
            rows = [r for r in reports if fam in _family_of(r.time.T, a)]
            if fam == "T1":
                ok = all(r.classification is Classification.MONOCONJUGATE for r in rows)
                out.append(Check(f"alpha={a:.4g}: every k pi/2 is monoconjugate", ok,
                                 f"{len(rows)} times"))
                continue
            # times shared with k pi/2 are conjugate through the first family
            rows = [r for r in rows if "T1" not in _family_of(r.time.T, a)]
            bad = [r for r in rows if r.classification is not Classification.NOT_CONJUGATE]
            detail = ", ".join(f"T={r.time.T / math.pi:.4g}pi order {r.order}" for r in bad) or f"{len(rows)} times"
            out.append(Check(f"alpha={a:.4g}: family {fam} is not conjugate", not bad, detail))
    return out


def scenario_projective(n: int, field: str, t_max: float = 3 * math.pi) -> list[Check]:
    st = projective_state(n, field)
    reports = classify_all(st, t_max)
    table = projective_reference(n, field)
    out = [Check(f"{field}P^{n - 1}: analytic order = oracle nullity at every candidate",
                 all(r.order == r.oracle_nullity for r in reports))]
    for r in reports:
        want = next((row.order for row in table if row.contains(r.time.T)), 0)
        out.append(Check(f"T={r.time.T / math.pi:.4g}pi: order {r.order} matches reference {want}",
                         r.order == want))
    claimed_even = 2 * (2 * n - 3) if field == "C" else 2 * n - 3
    for r in reports:
        k = r.time.T / math.pi
        if abs(k - round(k)) < 1e-9 and n >= 2 and not (field == "R" and n == 2):
            out.append(Check(f"T={k:.4g}pi: claimed order {claimed_even}", r.order == claimed_even,
                             f"computed {r.order}"))
    return out


def scenario_dimension_order(ds=(1, 2, 3), fields="CR", instances: int = 3, m_max: int = 8) -> list[Check]:
    rng = rng_from_env(7)
    out = []
    for field in fields:
        for d in ds:
            want = d * d if field == "C" else (d * d - d) // 2
            for _ in range(instances):
                m = int(rng.integers(2 * d, m_max + 1))
                st = planted_first_conjugate(rng, m, field, d)
                rep = classify(st, math.pi / 2)
                out.append(Check(f"M{m}({field}), d={d}: order at pi/2 is {want}",
                                 rep.order == want and len(rep.kernel.T_part) == 0,
                                 f"order {rep.order}, co-diagonal part {len(rep.kernel.T_part)}"))
    return out


def scenario_noesmono_grid(Ns=(8, 16, 32, 64)) -> list[Check]:
    res = [(N, *oracle.discretized_epi_demo(N)) for N in Ns]
    out = [Check(f"N={N}: L+R-2 injective", null == 0, f"min singular {ms:.4g}") for N, ms, null in res]
    mins = [ms for _, ms, _ in res]
    out.append(Check("min singular value decreases with N", all(b < a for a, b in zip(mins, mins[1:]))))
    out.append(Check(f"min singular value at N={Ns[-1]} below 0.05", mins[-1] < 0.05, f"{mins[-1]:.4g}"))
    out.append(Check("min singular value equals 2/N", all(abs(ms - 2 / N) < 1e-9 for N, ms, _ in res)))
    return out


def scenario_second_geodesic(eps: float = 0.1) -> list[Check]:
    sh = AlgebraShape.of(2)
    st = GeodesicState.from_elements(Element(sh, [np.diag([1.0, 0.0])]),
                                     Element(sh, [np.array([[0, 1.0], [1.0, 0]])]))
    scaled = st.with_speed(math.pi / 2)
    other = second_minimizing_geodesic(scaled)
    end = (geodesic_eval(scaled, 1.0).p - geodesic_eval(other, 1.0).p).norm()
    e22 = (geodesic_eval(other, 1.0).p - Element(sh, [np.diag([0.0, 1.0])])).norm()
    sc = shortcut_past_cut(scaled, eps)
    return [
        Check("second geodesic shares the endpoint", end < 1e-9, f"{end:.2e}"),
        Check("the endpoint is e22", e22 < 1e-9),
        Check("both geodesics have length pi/2", abs(other.speed - math.pi / 2) < 1e-12
              and abs(scaled.speed - math.pi / 2) < 1e-12),
        Check("the second geodesic rotates the other way", (other.v + scaled.v).norm() < 1e-12),
        Check(f"shortcut length {(1 - eps) / 2:.4g}pi < {(1 + eps) / 2:.4g}pi",
              abs(sc.length - (1 - eps) * math.pi / 2) < 1e-12
              and abs(sc.original_length - (1 + eps) * math.pi / 2) < 1e-12 and sc.length < sc.original_length),
        Check("shortcut endpoint equals gamma(1 + eps)", sc.endpoint_residual < 1e-9, f"{sc.endpoint_residual:.2e}"),
    ]


SCENARIOS: dict[str, Callable[[], list[Check]]] = {
    "pocos": scenario_pocos,
    "dimension-order": scenario_dimension_order,
    "noesmono-grid": scenario_noesmono_grid,
    "second-geodesic": scenario_second_geodesic,
}

_PROJECTIVE = re.compile(r"^projective-(complex|real)-(\d+)$")


def scenario_names() -> list[str]:
    return sorted(SCENARIOS) + ["projective-complex-N", "projective-real-N"]


def run_scenario(name: str) -> list[Check]:
    m = _PROJECTIVE.match(name)
    if m:
        n = int(m.group(2))
        return scenario_projective(n, "C" if m.group(1) == "complex" else "R")
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(scenario_names())}")
    return SCENARIOS[name]()

"""Command-line front end.

Problem files are single JSON documents::

    {
      "algebra": [{"dim": 2, "field": "C"}],
      "P": [[[1, 0], [0, 0]]],
      "V": [[[0, 1], [1, 0]]],
      "X": ..., "Y": ..., "Q": ...,
      "options": {"structural": 1e-10, "rank": 1e-9, "cluster": 1e-8}
    }

Each element is either a list of blocks (interpreted in ``algebra``) or a full
element object ``{"shape": [...], "blocks": [...]}``. Complex entries may be
plain numbers or ``[re, im]`` pairs.

Exit codes: 0 success, 1 a ``reproduce`` assertion failed, 2 invalid input,
3 an internal cross-check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from typing import Any

import numpy as np

from . import oracle
from .conjugate import classify_all
from .errors import CrossCheckError, GrassgeoError, ValidationError
from .grassmann import (
    GeodesicState,
    Projection,
    TangentVector,
    geodesic_eval,
    parallel_transport_geodesic,
    parallel_transport_path,
)
from .jacobi import dexp, dexp_matrix, jacobi_field
from .matcore import DEFAULT_TOL, Element, Tolerances, element_from_dict, element_to_dict, shape_from_json
from .metricpath import geodesic_join
from .scenarios import run_scenario, scenario_names

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_CROSSCHECK = 0, 1, 2, 3


class Problem:
    def __init__(self, doc: dict, tol_rank: float | None = None):
        if not isinstance(doc, dict):
            raise ValidationError("problem file must hold a JSON object")
        self.doc = doc
        self.shape = shape_from_json(doc["algebra"]) if "algebra" in doc else None
        opts = dict(doc.get("options", {}))
        unknown = set(opts) - {"structural", "rank", "cluster"}
        if unknown:
            raise ValidationError(f"unknown options: {sorted(unknown)}")
        tol = Tolerances(**{k: float(v) for k, v in opts.items()}) if opts else DEFAULT_TOL
        if tol_rank is not None:
            tol = replace(tol, rank=float(tol_rank))
        self.tol = tol

    def element(self, key: str, required: bool = True) -> Element | None:
        if key not in self.doc:
            if required:
                raise ValidationError(f"problem file has no {key!r} entry")
            return None
        raw = self.doc[key]
        if isinstance(raw, dict):
            return element_from_dict(raw)
        if self.shape is None:
            raise ValidationError(f"{key!r} is given as bare blocks but the file has no 'algebra'")
        return element_from_dict({"shape": self.doc["algebra"], "blocks": raw})

    def projection(self, key: str = "P") -> Projection:
        return Projection(self.element(key), self.tol)

    def state(self, normalize: bool) -> GeodesicState:
        P = self.projection()
        return GeodesicState.from_tangent(TangentVector(P, self.element("V")), normalize=normalize)

    def tangent(self, key: str, P: Projection) -> TangentVector:
        el = self.element(key, required=False)
        return TangentVector(P, el if el is not None else Element.zeros(P.shape))


def _load(path: str, tol_rank: float | None) -> Problem:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    return Problem(doc, tol_rank)


def _fmt_element(a: Element) -> str:
    with np.printoptions(precision=6, suppress=True, linewidth=120):
        return "\n".join(f"  block {i} ({s.dim}x{s.dim} {s.field}):\n" + "\n".join("    " + ln for ln in str(b).splitlines())
                         for i, (s, b) in enumerate(zip(a.shape, a.blocks)))


def _emit(args, payload: Any, human: str):
    if args.json:
        print(json.dumps(payload))
    else:
        print(human)


def cmd_geodesic(args) -> int:
    st = _load(args.file, args.tol_rank).state(args.normalize)
    items, lines = [], []
    for t in args.t:
        g = geodesic_eval(st, t)
        items.append({"t": t, "P": element_to_dict(g.p)})
        lines.append(f"t = {t!r}\n{_fmt_element(g.p)}")
    _emit(args, {"speed": st.speed, "points": items}, "\n".join(lines))
    return EXIT_OK


def cmd_transport(args) -> int:
    prob = _load(args.file, args.tol_rank)
    st = prob.state(args.normalize)
    X = prob.tangent("X", st.P)
    items, lines = [], []
    for t in args.t:
        out = parallel_transport_geodesic(st, X, t)
        rec = {"t": t, "X": element_to_dict(out.x)}
        line = f"t = {t!r}\n{_fmt_element(out.x)}"
        if args.verify:
            ts = np.linspace(0.0, t, max(201, int(abs(t) * 200) + 1))
            path = [geodesic_eval(st, s, check=False) for s in ts]
            num = parallel_transport_path(path, X, ts)
            r = (num.x - out.x).norm()
            rec["verify_residual"] = r
            line += f"\n  RK4 transport residual {r:.3e}"
            if r > 1e-6 * max(1.0, X.norm()):
                raise CrossCheckError(f"closed-form and RK4 transport differ by {r:.3e}")
        items.append(rec)
        lines.append(line)
    _emit(args, {"transported": items}, "\n".join(lines))
    return EXIT_OK


def cmd_jacobi(args) -> int:
    prob = _load(args.file, args.tol_rank)
    st = prob.state(args.normalize)
    X, Y = prob.tangent("X", st.P), prob.tangent("Y", st.P)
    items, lines = [], []
    for t in args.t:
        mu = jacobi_field(st, X, Y, t)
        rec = {"t": t, "mu": element_to_dict(mu.x)}
        line = f"t = {t!r}\n{_fmt_element(mu.x)}"
        if args.verify:
            r = oracle.fd_variation_check(st, X, Y, t, h=1e-4)
            rel = r / max(mu.norm(), 1.0)
            rec["verify_residual"] = r
            line += f"\n  finite-difference residual {r:.3e}"
            if rel > 1e-6:
                raise CrossCheckError(f"Jacobi field disagrees with the variation by {r:.3e}")
        items.append(rec)
        lines.append(line)
    _emit(args, {"jacobi": items}, "\n".join(lines))
    return EXIT_OK


def cmd_dexp(args) -> int:
    prob = _load(args.file, args.tol_rank)
    st = prob.state(args.normalize)
    Y = prob.tangent("Y", st.P)
    items, lines = [], []
    for T in args.t:
        out = dexp(st, T, Y)
        rec = {"T": T, "dexp": element_to_dict(out.x)}
        line = f"T = {T!r}\n{_fmt_element(out.x)}"
        if args.verify:
            r = oracle.fd_dexp_check(st, T, Y)
            rec["verify_residual"] = r
            line += f"\n  finite-difference residual {r:.3e}"
            if r > 1e-6 * max(1.0, out.norm()):
                raise CrossCheckError(f"dexp disagrees with finite differences by {r:.3e}")
        items.append(rec)
        lines.append(line)
    _emit(args, {"dexp": items}, "\n".join(lines))
    return EXIT_OK


def cmd_conjugate(args) -> int:
    st = _load(args.file, args.tol_rank).state(args.normalize)
    reports = classify_all(st, args.tmax)
    if args.json:
        print(json.dumps({"reports": [r.to_dict(include_kernel=args.kernel) for r in reports]}))
        return EXIT_OK
    if not reports:
        print(f"no candidate conjugate times in (0, {args.tmax!r}]")
    for r in reports:
        flag = " (tolerance-resolved)" if r.tolerance_resolved else ""
        print(f"T = {r.time.T:.12g} = {r.time.T / math.pi:.6g} pi  {r.classification.value:<14} "
              f"order {r.order}  oracle nullity {r.oracle_nullity}{flag}")
        if args.kernel:
            for w in r.kernel.vectors():
                print(_fmt_element(w.x))
    return EXIT_OK


def _pair(args) -> tuple[Element, Element, Tolerances]:
    prob = _load(args.file, args.tol_rank)
    P = prob.element("P")
    if args.q_file:
        Q = _load(args.q_file, args.tol_rank).element("P")
    else:
        Q = prob.element("Q")
    return P, Q, prob.tol


def cmd_join(args) -> int:
    P, Q, tol = _pair(args)
    res = geodesic_join(P, Q, tol)
    human = (f"exists: {res.exists}\nunique: {res.unique}\n"
             f"dim(P meet ker Q) = {res.mismatch_dims[0]}, dim(Q meet ker P) = {res.mismatch_dims[1]}")
    if res.exists:
        human += f"\nlength: {res.length!r}\ngenerator:\n{_fmt_element(res.x)}"
    _emit(args, res.to_dict(), human)
    return EXIT_OK


def cmd_distance(args) -> int:
    P, Q, tol = _pair(args)
    res = geodesic_join(P, Q, tol)
    gap = (P - Q).norm()
    # joining generators have norm <= pi/2, so the joining geodesic is minimizing
    payload = {"exists": res.exists, "unique": res.unique, "norm_P_minus_Q": gap,
               "distance": res.length if res.exists else None}
    human = f"distance: {res.length!r} (unique geodesic: {res.unique})" if res.exists else "no joining geodesic"
    _emit(args, payload, human)
    return EXIT_OK


def cmd_sweep(args) -> int:
    st = _load(args.file, args.tol_rank).state(args.normalize)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["T", "min_singular", "nullity"])
    for T in np.linspace(args.tmax / args.steps, args.tmax, args.steps):
        s = np.linalg.svd(dexp_matrix(st, float(T)), compute_uv=False)
        w.writerow([repr(float(T)), repr(float(s.min()) if s.size else 1.0),
                    int(np.sum(s / max(s.max(), 1e-300) < st.tol.rank)) if s.size else 0])
    return EXIT_OK


def cmd_reproduce(args) -> int:
    try:
        checks = run_scenario(args.name)
    except KeyError as exc:
        raise ValidationError(str(exc.args[0])) from None
    if args.json:
        print(json.dumps({"scenario": args.name,
                          "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]}))
    else:
        for c in checks:
            print(c.line())
        failed = sum(not c.passed for c in checks)
        print(f"{len(checks) - failed}/{len(checks)} passed")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--tol-rank", type=float, default=None, help="rank tolerance override")
    common.add_argument("--normalize", action="store_true", help="rescale V to unit norm")
    common.add_argument("--verify", action="store_true", help="cross-check against finite differences")

    p = argparse.ArgumentParser(prog="grassgeo", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def with_file(name, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("--file", "-f", required=True, help="problem JSON")
        return sp

    for name, fn, help_ in (("geodesic", cmd_geodesic, "evaluate gamma(t)"),
                            ("transport", cmd_transport, "parallel transport of X along gamma"),
                            ("jacobi", cmd_jacobi, "Jacobi field with mu(0)=X, D mu(0)=Y"),
                            ("dexp", cmd_dexp, "differential of Exp_P at tV applied to Y")):
        sp = with_file(name, help_)
        sp.add_argument("--t", type=float, nargs="+", default=[1.0], help="times")
        sp.set_defaults(func=fn)

    sp = with_file("conjugate", "candidate conjugate times with orders")
    sp.add_argument("--tmax", type=float, default=3 * math.pi)
    sp.add_argument("--kernel", action="store_true", help="print kernel bases")
    sp.set_defaults(func=cmd_conjugate)

    sp = with_file("sweep", "CSV of the smallest singular value of the differential of Exp")
    sp.add_argument("--tmax", type=float, default=3 * math.pi)
    sp.add_argument("--steps", type=int, default=200)
    sp.set_defaults(func=cmd_sweep)

    for name, fn, help_ in (("join", cmd_join, "geodesic joining P and Q"),
                            ("distance", cmd_distance, "geodesic distance between P and Q")):
        sp = with_file(name, help_)
        sp.add_argument("--q-file", default=None, help="take Q as the 'P' entry of this file")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("reproduce", parents=[common], help="run a built-in worked example")
    sp.add_argument("name", help="one of: " + ", ".join(scenario_names()))
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CrossCheckError as exc:
        print(f"cross-check failed: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK
    except (ValidationError, KeyError, TypeError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except GrassgeoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK


if __name__ == "__main__":
    sys.exit(main())

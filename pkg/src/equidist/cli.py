"""Command-line entry point.

Exit status: 0 on success, 1 for usage or input errors, 2 when a numerical
step fails (the module's error is printed).  Output files go to ``--outdir``
or, failing that, to ``$EQUIDIST_OUTPUT_DIR`` or the current directory.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import extgeom, grassmann, output
from .config import DEFAULT, Tolerances
from .contact import classify_chord
from .exprparse import ExprSyntaxError, SurfaceFileError
from .parallel import make_chord
from .surface import OutOfDomain, SurfacePatch
from .torus import builtin_torus, family_point, resolve_surface
from .tracer import (DEFAULT_WINDOW, DeltaField, contour, sample_equidistant, trace_wp,
                     umbrella_section, wp_family)

OUTPUT_ENV = "EQUIDIST_OUTPUT_DIR"
FORMATS = ("csv", "json", "svg")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    surface: str | None = None
    lam: float | None = None
    grid: int = 200
    grid4: int = 20
    tolerances: Tolerances = DEFAULT
    outdir: Path = Path(".")
    formats: tuple = ("csv", "svg")

    def validate(self):
        if self.grid < 8 or self.grid4 < 8:
            raise UsageError("grid resolutions must be at least 8")
        if self.lam is not None and (self.lam in (0.0, 1.0) or not math.isfinite(self.lam)):
            raise UsageError("--lambda must be finite and differ from 0 and 1")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise UsageError(f"unknown output format(s): {', '.join(sorted(bad))}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _tol_overrides(items) -> Tolerances:
    kw = {}
    names = set(Tolerances.__dataclass_fields__)
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or key not in names:
            raise UsageError(f"bad tolerance override {item!r}; known: {', '.join(sorted(names))}")
        try:
            kw[key] = float(val)
        except ValueError:
            raise UsageError(f"tolerance {key} needs a number") from None
    return DEFAULT.with_overrides(**kw)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="equidist", description="Extrinsic geometry of surfaces in R^4.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--outdir", type=Path, default=None)
    common.add_argument("--format", default="csv,svg", help="comma list of csv,json,svg")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE")
    common.add_argument("--s", type=float, default=0.0, help="value of the surface parameter s")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify-point", parents=[common])
    c.add_argument("surface")
    c.add_argument("u", type=float)
    c.add_argument("v", type=float)

    for name in ("pair-info", "classify-chord"):
        c = sub.add_parser(name, parents=[common])
        c.add_argument("surface")
        for a in ("u_plus", "v_plus", "u_minus", "v_minus"):
            c.add_argument(a, type=float)
        c.add_argument("--lambda", dest="lam", type=float, default=0.5)

    c = sub.add_parser("wp-trace", parents=[common])
    c.add_argument("surface")
    c.add_argument("u", type=float)
    c.add_argument("v", type=float)
    c.add_argument("--grid", type=int, default=200)
    c.add_argument("--window", type=float, default=None,
                   help="half-width of a box around the point (default: whole domain)")

    c = sub.add_parser("equidistant", parents=[common])
    c.add_argument("surface")
    c.add_argument("--lambda", dest="lam", type=float, required=True)
    c.add_argument("--grid4", type=int, default=20)

    c = sub.add_parser("umbrella", parents=[common])
    c.add_argument("--t", type=float, required=True)
    c.add_argument("--grid", type=int, default=201)

    c = sub.add_parser("torus-demo", parents=[common])
    c.add_argument("--figure", type=int, choices=(1, 2, 3, 4, 5), default=1)
    c.add_argument("--grid", type=int, default=400)

    sub.add_parser("grassmann-check", parents=[common])
    return p


def _config(ns) -> RunConfig:
    outdir = ns.outdir or Path(os.environ.get(OUTPUT_ENV, "."))
    formats = tuple(f for f in ns.format.split(",") if f)
    cfg = RunConfig(
        command=ns.command,
        surface=getattr(ns, "surface", None),
        lam=getattr(ns, "lam", None),
        grid=getattr(ns, "grid", 200),
        grid4=getattr(ns, "grid4", 20),
        tolerances=_tol_overrides(ns.tol),
        outdir=outdir,
        formats=formats,
    )
    cfg.validate()
    return cfg


def _surface(cfg: RunConfig, s: float) -> SurfacePatch:
    try:
        return resolve_surface(cfg.surface, s)
    except FileNotFoundError:
        raise UsageError(f"surface file not found: {cfg.surface}") from None
    except (SurfaceFileError, ExprSyntaxError) as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _check_point(patch: SurfacePatch, q):
    try:
        patch.reduce(*q)
    except OutOfDomain as exc:
        raise UsageError(str(exc)) from None


# -- commands ------------------------------------------------------------------

def _cmd_classify_point(ns, cfg, out):
    patch = _surface(cfg, ns.s)
    _check_point(patch, (ns.u, ns.v))
    form = extgeom.second_form(patch, (ns.u, ns.v), cfg.tolerances)
    pc = extgeom.classify_point(form, cfg.tolerances)
    out(str(pc))
    out(f"delta {output.fmt(pc.delta)}")
    out(f"gauss {output.fmt(pc.gauss)}")
    out(f"rank {pc.rank}")
    for pair in extgeom.contact_pairs(form, cfg.tolerances):
        out(f"asymptotic {output.fmt(pair.u[0])} {output.fmt(pair.u[1])} "
            f"binormal {output.fmt(pair.v[0])} {output.fmt(pair.v[1])}")


def _pair_points(ns, cfg):
    patch = _surface(cfg, ns.s)
    qp, qm = (ns.u_plus, ns.v_plus), (ns.u_minus, ns.v_minus)
    _check_point(patch, qp)
    _check_point(patch, qm)
    return patch, qp, qm


def _cmd_pair_info(ns, cfg, out):
    patch, qp, qm = _pair_points(ns, cfg)
    pair = make_chord(patch, qp, patch, qm, cfg.lam, cfg.tolerances)
    out(f"degree {pair.degree}")
    out("singular_values " + " ".join(output.fmt(s) for s in pair.info.singular_values))
    out(f"low_margin {str(pair.info.low_margin).lower()}")
    out("lambda_point " + " ".join(output.fmt(x) for x in pair.x))


def _cmd_classify_chord(ns, cfg, out):
    patch, qp, qm = _pair_points(ns, cfg)
    res = classify_chord(patch, qp, patch, qm, cfg.lam, 6, cfg.tolerances)
    out(str(res.label))
    out(f"degree {res.pair.degree}")
    out(f"margin {output.fmt(res.label.margin)}")
    if "json" in cfg.formats:
        doc = {"q_plus": qp, "q_minus": qm, "lambda": cfg.lam, "degree": res.pair.degree,
               "x": res.pair.x, "label": res.label.to_dict()}
        path = output.atomic_write(cfg.outdir / "chord.json", output.to_json(doc))
        out(f"wrote {path}")


def _report_trace(tr, out):
    out(f"base {output.fmt(tr.base_point[0])} {output.fmt(tr.base_point[1])} {tr.point_class}")
    out(f"polylines {len(tr.polylines)}")
    for m in tr.markers:
        out(f"marker {m.kind.value} {output.fmt(m.point[0])} {output.fmt(m.point[1])}")


def _cmd_wp_trace(ns, cfg, out):
    patch = _surface(cfg, ns.s)
    _check_point(patch, (ns.u, ns.v))
    tr = trace_wp(patch, (ns.u, ns.v), cfg.grid, ns.window, cfg.tolerances)
    _report_trace(tr, out)
    for path in output.write_trace(tr, cfg.outdir, "wp_trace", cfg.formats):
        out(f"wrote {path}")


def _cmd_equidistant(ns, cfg, out):
    patch = _surface(cfg, ns.s)
    cloud = sample_equidistant(patch, cfg.lam, cfg.grid4, tol=cfg.tolerances)
    counts: dict = {}
    for r in cloud.records:
        key = (r.degree, str(r.label))
        counts[key] = counts.get(key, 0) + 1
    out(f"records {len(cloud)}")
    for (deg, lab), cnt in sorted(counts.items()):
        out(f"degree {deg} {lab} {cnt}")
    path = output.atomic_write(cfg.outdir / "equidistant.json", output.cloud_json(cloud))
    out(f"wrote {path}")


def _cmd_umbrella(ns, cfg, out):
    sec = umbrella_section(ns.t, cfg.grid, cfg.tolerances)
    out(sec.topology.value)
    if "svg" in cfg.formats or "csv" in cfg.formats:
        stem = f"umbrella_t{output.fmt(ns.t)}"
        for path in output.write_trace(sec.trace, cfg.outdir, stem, cfg.formats):
            out(f"wrote {path}")


_FAMILY_S = {2: 0.085, 3: 0.0, 4: -0.085}


def _cmd_torus_demo(ns, cfg, out):
    torus = builtin_torus(ns.s)
    fig = ns.figure
    if fig == 1:
        tr = trace_wp(torus, (math.pi, math.pi), cfg.grid, None, cfg.tolerances)
        _report_trace(tr, out)
        for path in output.write_trace(tr, cfg.outdir, "figure1", cfg.formats):
            out(f"wrote {path}")
    elif fig in _FAMILY_S:
        s = _FAMILY_S[fig]
        (member,) = wp_family(torus, family_point, [s], min(cfg.grid, 201), DEFAULT_WINDOW,
                              cfg.tolerances)
        _report_trace(member.trace, out)
        out(f"at_p {None if member.kind is None else member.kind.value}")
        parabolic, _ = contour(DeltaField(torus, member.trace.box), min(cfg.grid, 201),
                               cfg.tolerances)
        out(f"parabolic_lines {len(parabolic)}")
        paths = output.write_trace(member.trace, cfg.outdir, f"figure{fig}", cfg.formats,
                                   dashed=parabolic)
        for path in paths:
            out(f"wrote {path}")
    else:
        for t in (-0.5, 0.0, 0.5):
            sec = umbrella_section(t, 201, cfg.tolerances)
            out(f"t {output.fmt(t)} {sec.topology.value}")
            for path in output.write_trace(sec.trace, cfg.outdir,
                                           f"figure5_t{output.fmt(t)}", cfg.formats):
                out(f"wrote {path}")


def _cmd_grassmann_check(ns, cfg, out):
    rng = np.random.default_rng(0)
    ok = True
    worst_rel = 0.0
    agree = 0
    n = 1000
    for _ in range(n):
        u = rng.standard_normal((4, 4))
        if rng.random() < 0.5:  # force a shared direction
            u[2] = u[0] * rng.standard_normal() + u[1] * rng.standard_normal()
        P = grassmann.plucker(u[0], u[1])
        Q = grassmann.plucker(u[2], u[3])
        worst_rel = max(worst_rel, abs(P.relation_residual()), abs(Q.relation_residual()))
        w = grassmann.weak_form(grassmann.bivector(u[0], u[1]), grassmann.bivector(u[2], u[3]))
        d = np.linalg.det(u.T)
        agree += abs(w - d) <= 1e-12 * max(1.0, abs(d))
    ok &= worst_rel < 1e-12 and agree == n
    out(f"plucker_relation_max {output.fmt(worst_rel)}")
    out(f"weak_form_equals_det {agree}/{n}")
    P = grassmann.plucker([1, 0, 0, 0], [0, 1, 0, 0])
    Q = grassmann.plucker([1, 0, 0, 0], [0, 0, 1, 0])
    r_pq = grassmann.w_jacobian_rank(P, Q)
    r_pp = grassmann.w_jacobian_rank(P, P)
    ok &= r_pq == 3 and r_pp == 2
    out(f"jacobian_rank_distinct {r_pq}")
    out(f"jacobian_rank_equal {r_pp}")
    out("ok" if ok else "FAILED")
    if not ok:
        raise ArithmeticError("Grassmannian self-check failed")


COMMANDS = {
    "classify-point": _cmd_classify_point,
    "pair-info": _cmd_pair_info,
    "classify-chord": _cmd_classify_chord,
    "wp-trace": _cmd_wp_trace,
    "equidistant": _cmd_equidistant,
    "umbrella": _cmd_umbrella,
    "torus-demo": _cmd_torus_demo,
    "grassmann-check": _cmd_grassmann_check,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr

    def out(line):
        print(line, file=stdout)

    try:
        ns = build_parser().parse_args(argv)
        cfg = _config(ns)
        COMMANDS[ns.command](ns, cfg, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 1
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

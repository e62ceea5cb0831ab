"""Command line interface: ``gaussharm <gen|geom|ghf|spectrum|verify> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import GaussHarmError
from .families import FAMILIES, family_weight, generate
from .meshio import read_mesh, read_provenance, write_mesh


def _dump(obj, path) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load(path):
    mesh = read_mesh(path)
    prov = read_provenance(path) if str(path).lower().endswith((".off", ".obj")) else None
    weight = family_weight(prov.get("generator"), prov.get("params", {}), mesh) if prov else None
    return mesh, prov, weight


def _level(args):
    from .harness import Level

    mesh, prov, weight = _load(args.mesh)
    return Level(mesh, weight, args.seed), prov


def cmd_gen(args) -> int:
    keys = {"level": args.level, "R": args.R, "n": args.n, "half_length": args.half_length,
            "n_angular": args.n_angular, "m": args.m, "amplitude": args.amplitude}
    allowed = FAMILIES[args.family].defaults
    given = {k: v for k, v in keys.items() if v is not None}
    extra = sorted(set(given) - set(allowed))
    if extra:
        print(f"error: {args.family} does not take {', '.join('--' + e.replace('_', '-') for e in extra)}", file=sys.stderr)
        return 2
    mesh, prov = generate(args.family, **given)
    write_mesh(mesh, args.output, prov)
    print(f"{args.family}: V={mesh.n_vertices} F={mesh.n_faces} hash={mesh.hash()} -> {args.output}")
    return 0


def cmd_geom(args) -> int:
    from .geometry import shrinker_residual

    lv, prov = _level(args)
    c = lv.cache
    out = {
        "mesh_hash": lv.mesh.hash(),
        "provenance": prov,
        "topology": lv.topo.as_dict(),
        "embedded": lv.embedded,
        "geometry": c.to_json_dict(),
    }
    if lv.embedded:
        res = shrinker_residual(lv.mesh, c)
        out["shrinker_residual"] = [None if not np.isfinite(r) else float(r) for r in res]
        out["shrinker_residual_sup"] = float(np.nanmax(res))
    _dump(out, args.output)
    return 0


def cmd_ghf(args) -> int:
    lv, _ = _level(args)
    if lv.basis is None:
        print("error: GHF basis needs a closed connected mesh", file=sys.stderr)
        return 1
    out = lv.basis.to_json_dict()
    out["generators"] = lv.gens.to_json_dict()
    _dump(out, args.output)
    return 0


def cmd_spectrum(args) -> int:
    lv, _ = _level(args)
    spec = lv.spectrum(args.k)
    out = spec.to_json_dict()
    out["mesh_hash"] = lv.mesh.hash()
    out["morse_index"] = lv.index
    out["dirichlet"] = bool(lv.pencil.size < lv.mesh.n_vertices)
    _dump(out, args.output)
    return 0


def cmd_verify(args) -> int:
    from .harness import HarnessConfig, run_checks

    mesh, prov, weight = _load(args.mesh)
    cfg = HarnessConfig(seed=args.seed, tol_scale=args.tol_scale, refine=args.refine)
    report = run_checks(mesh, cfg, prov, weight=weight)
    if args.output:
        report.write_json(args.output)
    print(report.table())
    if args.figures:
        from .plotting import render_report

        for p in render_report(report, report.level, args.figures):
            print(f"wrote {p}")
    return report.exit_code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="eigensolver start-vector seed")
    common.add_argument("--tol-scale", type=float, default=1.0, help="multiply all tolerances")

    p = argparse.ArgumentParser(prog="gaussharm", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a mesh")
    g.add_argument("family", choices=sorted(FAMILIES))
    g.add_argument("--level", type=int)
    g.add_argument("--R", type=float)
    g.add_argument("--n", type=int)
    g.add_argument("--half-length", type=float)
    g.add_argument("--n-angular", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--amplitude", type=float, help="flat torus weight 1 + a sin(2 pi u)")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)

    for name, func, helptext in (
        ("geom", cmd_geom, "curvatures and shrinker residual"),
        ("ghf", cmd_ghf, "Gaussian harmonic one-form basis"),
    ):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("mesh")
        s.add_argument("-o", "--output", default="-")
        s.set_defaults(func=func)

    s = sub.add_parser("spectrum", parents=[common], help="lowest eigenvalues of the stability pencil")
    s.add_argument("mesh")
    s.add_argument("-k", type=int, default=1)
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(func=cmd_spectrum)

    v = sub.add_parser("verify", parents=[common], help="run all checks")
    v.add_argument("mesh")
    v.add_argument("--refine", type=int, default=1, help="coarser levels used for refinement trends")
    v.add_argument("-o", "--output")
    v.add_argument("--figures", metavar="DIR", help="write PNG figures and CSV tables here")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return int(args.func(args))
    except (GaussHarmError, ValueError, KeyError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line pipeline: plan, build, certify, orbit, export-tree, classify.

All state lives in files; every command is a pure function of its inputs
and the seed, so reruns are byte-identical.  Exit codes: 0 success,
1 certification failure, 2 usage/config error.  Floats print with 17
significant digits throughout.  Commands that write an artifact also
render a companion PNG figure next to it (disable with --no-figures).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .action import ActionError, DiskTree, orbit_to_csv, tree_to_json
from .certify import CertifyError, run_certification
from .classify import (ClassifyError, CoveringDegrees, SupernaturalNumber,
                       baer_equivalent, cech_invariant, covering_degrees,
                       discard_witness)
from .lattice import LatticeError, dumps_canonical
from .plan import (PlanError, SolenoidPlan, build, plan_from_json, plan_table,
                   plan_to_json)
from .profile import ProfileError

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

_ERRORS = (PlanError, LatticeError, ActionError, ClassifyError, ProfileError,
           CertifyError, OSError, json.JSONDecodeError, ValueError)


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write_text(path: str, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _load_plan(path: str | None) -> SolenoidPlan:
    if not path:
        raise PlanError("this command needs --plan")
    return plan_from_json(_load_json(path))


def _figure_path(out: str) -> str:
    return str(Path(out).with_suffix(".png"))


def _emit(out: str | None, text: str) -> None:
    if out:
        _write_text(out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def _build_from_config(args) -> SolenoidPlan:
    if not args.config:
        raise PlanError("this command needs --config")
    config = _load_json(args.config)
    if args.seed is not None:
        config["seed"] = args.seed
    return build(config)


def cmd_plan(args) -> int:
    plan = _build_from_config(args)
    if args.out:
        _write_text(args.out, dumps_canonical(plan_to_json(plan)))
    print(plan_table(plan))
    return EXIT_OK


def cmd_example5(args) -> int:
    ns = [int(x) for x in args.ns.split(",") if x.strip()]
    config = {"mode": "example5", "k": 1, "q": 2, "r": 1,
              "delta": args.delta, "levels": len(ns), "ns": ns,
              "seed": args.seed if args.seed is not None else 0}
    plan = build(config)
    if args.out:
        _write_text(args.out, dumps_canonical(plan_to_json(plan)))
    print(plan_table(plan))
    return EXIT_OK


def cmd_build(args) -> int:
    plan = _load_plan(args.plan) if args.plan else _build_from_config(args)
    tree = DiskTree(plan)
    print(plan_table(plan))
    for lv in range(plan.levels + 1):
        count = len(tree.level_disks(lv))
        print(f"level {lv}: {count} disk{'s' if count != 1 else ''} expanded")
    if args.out:
        _write_text(args.out, dumps_canonical(plan_to_json(plan)))
        if not args.no_figures:
            from .viz import save_disk_figure
            save_disk_figure(tree, plan.levels, _figure_path(args.out))
    return EXIT_OK


def cmd_certify(args) -> int:
    plan = _load_plan(args.plan)
    report = run_certification(
        plan, seed=args.seed if args.seed is not None else 0,
        order=args.order, tolerance_scale=args.tolerance_scale,
        jobs=args.jobs)
    _emit(args.out, dumps_canonical(report))
    if args.out and not args.no_figures:
        from .viz import save_report_figure
        save_report_figure(report, _figure_path(args.out))
    asserted = [c for c in report["checks"] if c["asserted"]]
    failed = [c for c in asserted if not c["pass"]]
    verdict = "PASS" if report["passed"] else "FAIL"
    print(f"certification {verdict}: {len(asserted) - len(failed)}/{len(asserted)} "
          f"asserted checks passed")
    for c in failed:
        where = f" level={c['level']}" if c["level"] is not None else ""
        print(f"  FAIL {c['name']}{where}: measured {_fmt(c['measured'])} "
              f"vs bound {_fmt(c['bound'])}")
    return EXIT_OK if report["passed"] else EXIT_FAILED


def cmd_orbit(args) -> int:
    plan = _load_plan(args.plan)
    tree = DiskTree(plan)
    if args.point:
        z = np.array([float(x) for x in args.point.split(",")])
        if len(z) != plan.q:
            raise PlanError(f"--point needs {plan.q} comma-separated coordinates")
    elif plan.levels:
        z = plan.seed_point(1)
    else:
        z = np.zeros(plan.q)
    depth = args.depth if args.depth is not None else plan.levels
    samples = tree.orbit_sample(depth, z, args.word_radius)
    _emit(args.out, orbit_to_csv(samples, plan.k, plan.q))
    if args.out and not args.no_figures:
        from .viz import save_orbit_figure
        save_orbit_figure(samples, _figure_path(args.out))
    return EXIT_OK


def cmd_export_tree(args) -> int:
    plan = _load_plan(args.plan)
    tree = DiskTree(plan)
    depth = args.depth if args.depth is not None else plan.levels
    doc = tree_to_json(tree, depth)
    _emit(args.out, dumps_canonical(doc))
    if args.out and not args.no_figures:
        from .viz import save_disk_figure
        save_disk_figure(tree, depth, _figure_path(args.out))
    return EXIT_OK


def _load_invariant(path: str) -> SupernaturalNumber:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ClassifyError(f"{path}: expected a JSON object")
    fmt = doc.get("format")
    if fmt == "soldisk-plan-1":
        return cech_invariant(covering_degrees(plan_from_json(doc)))
    if fmt == "soldisk-degrees-1":
        return cech_invariant(CoveringDegrees.from_json(doc))
    raise ClassifyError(f"{path}: not a plan or degree-sequence document")


def cmd_classify(args) -> int:
    left = _load_invariant(args.inputs[0])
    right = _load_invariant(args.inputs[1])
    equivalent = baer_equivalent(left, right)
    print("equivalent" if equivalent else "inequivalent")
    print(f"left:  {left}")
    print(f"right: {right}")
    witness = discard_witness(left, right)
    if witness is not None:
        print(f"witness: discard {witness['discard_left'] or '{}'} from left, "
              f"{witness['discard_right'] or '{}'} from right")
    doc = {
        "format": "soldisk-verdict-1",
        "equivalent": equivalent,
        "left": left.to_json(),
        "right": right.to_json(),
        "witness": witness,
    }
    if args.out:
        _write_text(args.out, dumps_canonical(doc))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config JSON path")
    common.add_argument("--plan", help="plan JSON path")
    common.add_argument("--out", help="output artifact path (stdout if omitted)")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    common.add_argument("--jobs", type=int, default=1,
                        help="parallel workers for certification sweeps")
    common.add_argument("--tolerance-scale", type=float, default=1.0,
                        help="multiply every check tolerance by this factor")
    common.add_argument("--no-figures", action="store_true",
                        help="skip companion PNG figures")

    parser = argparse.ArgumentParser(
        prog="soldisk",
        description="Plan, build, certify, and classify nested-disk actions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", parents=[common], help="build a plan from a config")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("example5", parents=[common],
                       help="one-generator preset plan from a degree list")
    p.add_argument("--ns", default="2,3,4", help="comma-separated degrees")
    p.add_argument("--delta", default="1", help="nominal closeness (record only)")
    p.set_defaults(fn=cmd_example5)

    p = sub.add_parser("build", parents=[common],
                       help="build and fully expand the disk tree")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("certify", parents=[common], help="run the certification suite")
    p.add_argument("--order", type=int, default=None,
                   help="derivative order to certify (default: plan order)")
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("orbit", parents=[common], help="sample an orbit to CSV")
    p.add_argument("--point", help="comma-separated start coordinates")
    p.add_argument("--word-radius", type=int, default=1)
    p.add_argument("--depth", type=int, default=None)
    p.set_defaults(fn=cmd_orbit)

    p = sub.add_parser("export-tree", parents=[common],
                       help="export the nested disk tree as JSON")
    p.add_argument("--depth", type=int, default=None)
    p.set_defaults(fn=cmd_export_tree)

    p = sub.add_parser("classify", parents=[common],
                       help="compare the fiber invariants of two plans/degree files")
    p.add_argument("inputs", nargs=2, help="two plan or degree-sequence JSON files")
    p.set_defaults(fn=cmd_classify)

    return parser


def main(argv=None) -> int:
    parser = _make_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

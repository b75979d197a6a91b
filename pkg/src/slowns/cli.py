"""Command-line entry point.

Subcommands: run25d, run3d, remainder, sweep, norms, wiegner, verify.
Exit codes: 0 success, 1 validation error, 2 numerical divergence.
Flags override config-file keys (``--set section.key=value`` wins over the
file; ``--out`` wins over ``output.dir``).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import campaign as camp
from . import diagnostics as diag
from . import fldio
from .errors import DivergedError
from .grid import ScalarField, VectorField
from .ns25d import CSV_COLUMNS, SliceStackState, run
from .ns3d import CoupledRemainderRun, lift_initial_data, run3d


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for divergence here
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slowns", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="campaign config file")
    common.add_argument(
        "--set",
        dest="overrides",
        metavar="KEY=VALUE",
        action="append",
        default=[],
        help="override a config key (section.key=value); repeatable",
    )
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--quiet", action="store_true", help="suppress the summary line")

    sub.add_parser("run25d", parents=[common], help="integrate the slice-stack system")
    sub.add_parser("run3d", parents=[common], help="integrate the full 3-D system from lifted data")
    sub.add_parser("remainder", parents=[common], help="integrate the remainder system for one eps")
    sweep = sub.add_parser("sweep", parents=[common], help="run the eps scaling sweep")
    sweep.add_argument("--resume", action="store_true", help="complete a persisted sweep")
    norms = sub.add_parser("norms", parents=[common], help="norm battery for a checkpoint")
    norms.add_argument("--in", dest="infile", metavar="FLD", required=True)
    sub.add_parser("wiegner", parents=[common], help="frequency-split decay monitor")
    sub.add_parser("verify", parents=[common], help="run the invariant battery")
    return parser


def _load_spec(args) -> camp.CampaignSpec:
    import dataclasses

    if args.config:
        spec = camp.CampaignSpec.from_file(args.config, args.overrides)
    elif args.overrides:
        spec = camp.CampaignSpec.from_file(_write_default_cfg(), args.overrides)
    else:
        spec = camp.CampaignSpec()
    if args.out:
        spec = dataclasses.replace(spec, out_dir=args.out)
    return spec


def _write_default_cfg() -> Path:
    import tempfile

    path = Path(tempfile.mkstemp(suffix=".cfg")[1])
    camp.CampaignSpec().write_resolved(path)
    return path


def _ic_state(spec: camp.CampaignSpec, eps: float) -> SliceStackState:
    descr = dict(spec.ic)
    descr.setdefault("seed", spec.seed)
    u0 = camp.make_initial_data(descr, spec.grid())
    return SliceStackState.from_velocity(u0, eps)


def _cmd_run25d(spec: camp.CampaignSpec, quiet: bool) -> int:
    state0 = _ic_state(spec, spec.eps_list[0])
    traj = run(
        state0,
        spec.t_end,
        spec.dt,
        sample_every=spec.sample_every,
        store_states=False,
        track_identities=spec.track_identities,
        dealias_vertical=spec.dealias_vertical,
    )
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    camp.write_csv(out / "timeseries.csv", traj.rows, CSV_COLUMNS)
    spec.write_resolved(out / "resolved_config.cfg")
    final = run(
        state0, spec.t_end, spec.dt, sample_every=int(round(spec.t_end / spec.dt)),
        store_states=True, track_identities=False,
        dealias_vertical=spec.dealias_vertical, check_invariants=False,
    ).states[-1]
    fldio.save_field(out / "final_state.fld", final.omega, time=final.t, eps=final.eps)
    with open(out / "manifest.json", "w") as fh:
        json.dump({"config": spec.to_flat_dict(), "config_hash": spec.config_hash(),
                   "final_linf_v_l2_h": traj.rows[-1]["linf_v_l2_h"]}, fh, indent=2)
        fh.write("\n")
    if not quiet:
        r = traj.rows[-1]
        print(
            f"run25d done: t={r['t']:g} linf_v_l2_h={r['linf_v_l2_h']:.6g} "
            f"l2={r['l2_global']:.6g} -> {out}"
        )
    return 0


def _cmd_run3d(spec: camp.CampaignSpec, quiet: bool) -> int:
    eps = spec.eps_list[0]
    state0 = _ic_state(spec, eps)
    u3 = lift_initial_data(state0, eps)
    traj = run3d(u3, spec.t_end, spec.dt, sample_every=spec.sample_every)
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    camp.write_csv(out / "timeseries3d.csv", traj.rows)
    spec.write_resolved(out / "resolved_config.cfg")
    with open(out / "manifest.json", "w") as fh:
        json.dump({"config": spec.to_flat_dict(), "config_hash": spec.config_hash(),
                   "final_l2": traj.rows[-1]["l2"]}, fh, indent=2)
        fh.write("\n")
    if not quiet:
        print(f"run3d done: t={traj.times[-1]:g} l2={traj.rows[-1]['l2']:.6g} -> {out}")
    return 0


def _cmd_remainder(spec: camp.CampaignSpec, quiet: bool) -> int:
    eps = spec.eps_list[0]
    state0 = _ic_state(spec, eps)
    coupled = CoupledRemainderRun(state0, eps, spec.dt, spec.dealias_vertical)
    n_steps = int(round(spec.t_end / spec.dt))
    rows = [coupled.row()]
    for i in range(n_steps):
        coupled.advance()
        if (i + 1) % spec.sample_every == 0 or i + 1 == n_steps:
            rows.append(coupled.row())
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    camp.write_csv(out / "remainder.csv", rows)
    spec.write_resolved(out / "resolved_config.cfg")
    summary = {
        "eps": eps,
        "f_l2t_h_minus_half": math.sqrt(coupled.int_f2),
        "sup_r_h_half": max(r["r_h_half"] for r in rows),
        "config_hash": spec.config_hash(),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not quiet:
        print(
            f"remainder done: eps={eps:g} ||F||={summary['f_l2t_h_minus_half']:.4e} "
            f"sup||R||_H1/2={summary['sup_r_h_half']:.4e} -> {out}"
        )
    return 0


def _cmd_sweep(spec: camp.CampaignSpec, quiet: bool, do_resume: bool) -> int:
    if do_resume:
        manifest = camp.resume(spec.out_dir, spec)
    else:
        manifest = camp.run_sweep(spec)
        camp.persist(manifest, spec.out_dir, spec)
    if not quiet:
        slope = manifest.slope_forcing
        stext = f"{slope:.3f}" if slope is not None else "n/a"
        print(
            f"sweep done: eps={list(spec.eps_list)} forcing slope={stext} "
            f"flags={manifest.flags} -> {spec.out_dir}"
        )
    if any(v.get("status") == "failed" for v in manifest.entries.values()):
        return 2
    return 0


def _cmd_norms(spec: camp.CampaignSpec, infile: str, quiet: bool) -> int:
    field, t, eps = fldio.load_field(infile)
    if isinstance(field, ScalarField):
        # vorticity checkpoint: reconstruct the velocity
        state = SliceStackState.from_vorticity(field.to_real(), eps or 0.0, t)
        u = state.velocity
    elif isinstance(field, VectorField) and len(field) == 2:
        u = field
    else:
        print("norms expects a scalar vorticity or 2-component checkpoint", file=sys.stderr)
        return 1
    rep = diag.norm_report(u, delta=spec.delta, eps=eps or spec.eps_list[0], t=t)
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "norms.json", "w") as fh:
        json.dump(rep.to_row(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not quiet:
        parts = " ".join(f"{k}={v:.6g}" for k, v in rep.values.items())
        print(f"norms t={t:g}: {parts}")
    return 0


def _cmd_wiegner(spec: camp.CampaignSpec, quiet: bool) -> int:
    summary = camp.run_wiegner_monitor(spec)
    if not quiet:
        cs = {
            name: rep["smallest_viable_C"]
            for name, rep in summary["reports"].items()
            if "smallest_viable_C" in rep
        }
        print(f"wiegner done: smallest viable constants {cs} -> {spec.out_dir}")
    return 0


def _cmd_verify(spec: camp.CampaignSpec, quiet: bool) -> int:
    results = camp.verify_suite(quick=True)
    ok = True
    for name, passed, detail in results:
        ok &= passed
        if not quiet or not passed:
            print(f"[{'ok' if passed else 'FAIL'}] {name}: {detail}")
    if not quiet:
        print(f"verify: {sum(p for _, p, _ in results)}/{len(results)} checks passed")
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _load_spec(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"slowns: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "run25d":
            return _cmd_run25d(spec, args.quiet)
        if args.command == "run3d":
            return _cmd_run3d(spec, args.quiet)
        if args.command == "remainder":
            return _cmd_remainder(spec, args.quiet)
        if args.command == "sweep":
            return _cmd_sweep(spec, args.quiet, args.resume)
        if args.command == "norms":
            return _cmd_norms(spec, args.infile, args.quiet)
        if args.command == "wiegner":
            return _cmd_wiegner(spec, args.quiet)
        if args.command == "verify":
            return _cmd_verify(spec, args.quiet)
    except DivergedError as exc:
        print(f"slowns: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError) as exc:
        print(f"slowns: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    raise SystemExit(main())

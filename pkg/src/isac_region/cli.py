"""``isac-region`` command line front end.

Exit codes: 0 success or affirmative finding, 1 negative finding, 2 usage or
I/O error. Human-readable tables go to stdout; machine output goes to the
files named by ``--out`` with the run manifest embedded.
"""

import argparse
import json
import os
import sys

from . import __version__
from ._validation import SpecError
from .channel import check_degraded, check_spec, validate
from .fbl import FblQuery, fbl_rates, sensitivity_sweep
from .io import RunManifest, dumps, load_aux, load_sim_config, load_spec
from .osrb import run as run_simulation
from .region import SecrecyRegionSearch

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


def _threads(args):
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("ISAC_REGION_THREADS")
    return int(env) if env else None


def _manifest(args, command, inputs, params, seed=None):
    return RunManifest(
        command=command,
        inputs=[str(p) for p in inputs],
        params=params,
        output=getattr(args, "out", None),
        seed=seed,
        version=__version__,
    )


def _write_json(path, manifest, result):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps({"manifest": manifest.as_dict(), "result": result}))


def _write_csv(path, manifest, body):
    header = "# manifest " + json.dumps(manifest.as_dict(), sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + body)


def _table(rows, columns):
    cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) if cells else len(c) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6f}"
    return "" if v is None else str(v)


def cmd_validate(args):
    spec = load_spec(args.spec)
    diags = validate(spec)
    for d in diags:
        print(json.dumps(d.as_dict(), sort_keys=True), file=sys.stderr)
    print("valid" if not diags else f"{len(diags)} diagnostic(s)")
    return EXIT_OK if not diags else EXIT_NEGATIVE


def cmd_degraded(args):
    spec = check_spec(load_spec(args.spec))
    report = check_degraded(spec, tol=args.tol)
    payload = report.as_dict()
    print(dumps(payload), end="")
    if args.out:
        manifest = _manifest(args, "degraded", [args.spec], {"tol": args.tol}).finish()
        _write_json(args.out, manifest, payload)
    return EXIT_OK if report.is_degraded else EXIT_NEGATIVE


def cmd_region(args):
    spec = load_spec(args.spec)
    search = SecrecyRegionSearch(
        restarts=args.restarts, iterations=args.iters, seed=args.seed, n_jobs=_threads(args)
    )
    manifest = _manifest(args, "region", [args.spec], search.search_config(), seed=args.seed)
    frontier = search.fit(spec).frontier_
    manifest.finish()
    rows = [p.as_dict(with_aux=False) for p in frontier.points]
    print(_table(rows, ["r1_plus_r2", "r2", "d1", "d2", "restart"]))
    if args.out:
        _write_csv(args.out + ".csv", manifest, frontier.to_csv())
        _write_json(args.out + ".json", manifest, frontier.as_dict())
    return EXIT_OK


def _parse_grid(text):
    try:
        return [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad n-grid {text!r}") from None


def _parse_gammas(text):
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad gammas {text!r}") from None
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("gammas are three comma-separated numbers")
    return vals


def cmd_fbl(args):
    spec = check_spec(load_spec(args.spec))
    aux = load_aux(spec, args.aux)
    grid = args.n_grid or [args.n]
    q = FblQuery(
        n=grid[0],
        delta_r=args.delta_r,
        delta_sec=args.delta_sec,
        theta=args.theta,
        epsilon_d=args.eps_d,
        mode=args.mode,
        third_order_c=args.c,
        variant=args.variant,
        gammas=args.gammas,
    )
    params = {k: v for k, v in vars(q).items()}
    params["n_grid"] = grid
    manifest = _manifest(args, "fbl", [args.spec, args.aux], params)
    results = sensitivity_sweep(spec, aux, grid, q) if args.n_grid else [fbl_rates(spec, aux, q)]
    manifest.finish()
    rows = [r.as_row() for r in results]
    print(_table(rows, ["n", "mode", "r1_plus_r2", "r2", "delta_D1", "delta_D2"]))
    if args.out:
        header = list(rows[0])
        body = ",".join(header) + "\n" + "".join(",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in header) + "\n" for r in rows)
        _write_csv(args.out + ".csv", manifest, body)
        _write_json(args.out + ".json", manifest, [r.as_dict() for r in results])
    return EXIT_OK


def cmd_simulate(args):
    config = load_sim_config(
        args.config,
        trials=args.trials,
        master_seed=args.seed,
        exact_secrecy=args.exact_secrecy,
    )
    config.n_jobs = _threads(args)
    config.trace = bool(args.trace)
    manifest = _manifest(args, "simulate", [args.config], config.summary(), seed=config.master_seed)
    report = run_simulation(config)
    manifest.finish()
    payload = report.as_dict()
    print(_table([payload], ["error_rate", "secrecy_tv", "distortion_1", "distortion_2", "f_star"]))
    print(f"error 95% CI: [{report.error_ci[0]:.6f}, {report.error_ci[1]:.6f}]  secrecy: {report.secrecy_method}")
    if args.out:
        _write_json(args.out, manifest, payload)
    if args.trace:
        cols = ["trial", "m1", "m2", "f", "error", "encode_failure", "decode_failure", "d1", "d2"]
        body = ",".join(cols) + "\n" + "".join(
            ",".join(str(int(r[c]) if isinstance(r[c], bool) else r[c]) for c in cols) + "\n" for r in report.trace
        )
        _write_csv(args.trace, manifest, body)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="isac-region", description="Secrecy-distortion region toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--threads", type=int, default=None, help="worker cap (default $ISAC_REGION_THREADS or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a channel spec")
    p.add_argument("spec")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("degraded", help="test physical degradedness")
    p.add_argument("spec")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_degraded)

    p = sub.add_parser("region", help="sweep the asymptotic frontier")
    p.add_argument("spec")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--iters", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output prefix for .csv and .json")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("fbl", help="finite-blocklength rates")
    p.add_argument("spec")
    p.add_argument("aux")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--n-grid", type=_parse_grid, default=None, help="comma-separated blocklengths")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--delta-r", type=float, default=1e-3)
    p.add_argument("--delta-sec", type=float, default=1e-3)
    p.add_argument("--eps-d", type=float, default=0.0)
    p.add_argument("--mode", choices=["normal", "explicit"], default="normal")
    p.add_argument("--variant", choices=["conditional", "unconditional"], default="conditional")
    p.add_argument("--gammas", type=_parse_gammas, default=None)
    p.add_argument("--c", type=float, default=0.0, help="third-order coefficient")
    p.add_argument("--out", help="output prefix for .csv and .json")
    p.set_defaults(func=cmd_fbl)

    p = sub.add_parser("simulate", help="random-binning simulation")
    p.add_argument("config")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--exact-secrecy", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--out", help="output JSON path")
    p.add_argument("--trace", help="optional per-trial CSV path")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        for d in exc.diagnostics:
            print(json.dumps(d.as_dict(), sort_keys=True), file=sys.stderr)
        print(f"error: invalid spec ({len(exc.diagnostics)} diagnostic(s))", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface: ``fairsched {gen,eval,frontier,verify,bounds}``.

Exit codes: 0 success, 1 usage error, 2 invalid input or parameters,
3 exact computation infeasible, 4 verification mismatch.  Diagnostics go to
stderr; data goes to ``--out`` or stdout.

Every JSON report carries a ``manifest`` block.  Its timestamps honour
``SOURCE_DATE_EPOCH`` so that reruns can be byte-identical.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import core, frontier, mechanisms as mech, metrics, multimachine, oracle
from .errors import DegenerateInstanceError, FairSchedError, InfeasibleError

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_MISMATCH = 0, 1, 2, 3, 4

EXACT_RTOL = 1e-9
EXACT_ATOL = 1e-12
MC_SIGMAS = 4.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _now_iso() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    ts = int(epoch) if epoch else time.time()
    return datetime.fromtimestamp(ts, tz=timezone.utc).isoformat()


def _manifest(subcommand: str, params: dict, seed=None, data: bytes | None = None, started=None) -> dict:
    return {
        "subcommand": subcommand,
        "parameters": params,
        "seed": seed,
        "tool_version": __version__,
        "input_digest": None if data is None else "sha256:" + hashlib.sha256(data).hexdigest(),
        "timestamps": {"started": started or _now_iso(), "finished": _now_iso()},
    }


def _write(out: str | None, payload: bytes) -> None:
    """Atomic write to ``out`` (temp file + rename), or stdout when absent."""
    if out is None or out == "-":
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
        return
    path = Path(out)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, allow_nan=False) + "\n").encode()


def _read_instance(path: str) -> tuple[core.Instance, bytes]:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise FairSchedError(f"cannot read instance {path}: {exc.strerror}") from None
    return core.load_instance(data), data


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    def need(*names):
        missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
        if missing:
            raise UsageError(f"--kind {args.kind} requires {', '.join(missing)}")

    if args.kind == "example-i":
        need("n", "large")
        inst = core.gen_example_i(args.n, args.large)
    elif args.kind == "lower-bound":
        need("eps", "d")
        inst = core.gen_lower_bound(args.eps, args.d)
    elif args.kind == "powers":
        need("p")
        inst = core.gen_powers(args.p)
    else:
        need("n", "max_size")
        inst = core.gen_uniform(args.n, args.max_size, args.seed)
    payload = core.serialize(inst, "json")
    _write(args.out, payload)
    summary = f"n={inst.n} D={inst.D!r}"
    if args.out and args.out != "-":
        print(summary)
    else:
        _info(summary)
    return EXIT_OK


def cmd_eval(args) -> int:
    started = _now_iso()
    inst, data = _read_instance(args.instance)
    spec = metrics.parse_mechanism(args.mechanism)
    cfg = oracle.OracleConfig(mc_samples=args.samples, seed=args.seed)
    if args.machines == 1:
        report = metrics.evaluate(inst, spec)
    else:
        if spec.kind != "target":
            raise FairSchedError("multi-machine evaluation needs --mechanism target:EPS")
        report = multimachine.evaluate_multi(inst, args.machines, spec.eps, args.mode, cfg)
    out = report.to_dict()
    params = {
        "instance": args.instance,
        "mechanism": str(spec),
        "machines": args.machines,
        "mode": args.mode if args.machines > 1 else "exact",
    }
    if args.machines > 1 and args.mode == "mc":
        params["samples"] = args.samples
    out["manifest"] = _manifest("eval", params, args.seed, data, started)
    _write(args.out, _json_bytes(out))
    return EXIT_OK


def cmd_frontier(args) -> int:
    started = _now_iso()
    inst, data = _read_instance(args.instance)
    points = frontier.frontier_points(inst)
    _write(args.out, frontier.export_frontier_csv(points))
    if args.out and args.out != "-":
        manifest = _manifest("frontier", {"instance": args.instance}, None, data, started)
        _write(args.out + ".manifest.json", _json_bytes(manifest))
    return EXIT_OK


def _parse_oracle(text: str) -> tuple[str, int | None]:
    if text in ("exact", "auto"):
        return text, None
    kind, _, n = text.partition(":")
    if kind == "mc":
        try:
            samples = int(n) if n else 10_000
        except ValueError:
            raise UsageError(f"bad --oracle {text!r}") from None
        if samples < 2:
            raise UsageError("--oracle mc:N needs N >= 2")
        return "mc", samples
    raise UsageError(f"--oracle must be exact, auto or mc:N, got {text!r}")


def _compare(ids, closed, ref, se, mode) -> tuple[list[dict], bool, float]:
    rows, ok, worst = [], True, 0.0
    for j, c, o, s in zip(ids, closed, ref, se):
        abs_dev = abs(c - o)
        rel_dev = abs_dev / abs(o) if o != 0 else (0.0 if abs_dev == 0 else math.inf)
        if mode == "exact":
            passed = abs_dev <= max(EXACT_RTOL * abs(o), EXACT_ATOL)
        else:
            passed = abs_dev <= MC_SIGMAS * s + EXACT_ATOL
        ok &= passed
        worst = max(worst, rel_dev)
        row = {
            "id": int(j),
            "closed_form": float(c),
            "oracle": float(o),
            "abs_dev": float(abs_dev),
            "rel_dev": float(rel_dev),
            "pass": bool(passed),
        }
        if mode == "mc":
            row["std_error"] = float(s)
        rows.append(row)
    return rows, ok, worst


def cmd_verify(args) -> int:
    started = _now_iso()
    inst, data = _read_instance(args.instance)
    spec = metrics.parse_mechanism(args.mechanism)
    requested, samples = _parse_oracle(args.oracle)
    cfg = oracle.OracleConfig(mc_samples=samples or 10_000, seed=args.seed)
    mode = "exact" if requested in ("exact", "auto") else "mc"
    fallback_reason = None

    if args.machines == 1:
        sched = mech.pareto_schedule(inst, metrics.resolve_k(inst, spec))
        closed = mech.expected_completions(inst, sched)
        ids = inst.ids
        reference = None
        if mode == "exact":
            try:
                reference = oracle.exact_completions_by_enumeration(inst, sched, cfg)
                se = np.zeros(inst.n)
            except InfeasibleError as exc:
                if requested == "exact":
                    raise
                mode, fallback_reason = "mc", str(exc)
        if reference is None:
            reference, se = oracle.mc_completions(inst, sched, cfg)
    else:
        if spec.kind != "target":
            raise FairSchedError("multi-machine verification needs --mechanism target:EPS")
        fm = multimachine.fair_multi_mechanism(inst, args.machines, spec.eps)
        res = oracle.exact_multi_evaluation(inst, args.machines, fm.machine_rule, cfg)
        keep = res.real_mask
        ids = [j for j, kp in zip(res.instance.ids, keep) if kp]
        closed = res.completions[keep]
        reference = None
        if mode == "exact":
            try:
                reference = oracle.brute_multi_completions(inst, args.machines, fm.machine_rule, cfg)[keep]
                se = np.zeros(len(ids))
            except InfeasibleError as exc:
                if requested == "exact":
                    raise
                mode, fallback_reason = "mc", str(exc)
        if reference is None:
            _, mean, err = oracle.mc_multi_brute(inst, args.machines, fm.machine_rule, cfg)
            reference, se = mean[keep], err[keep]

    rows, ok, worst = _compare(ids, closed, reference, se, mode)
    out = {
        "mechanism": str(spec),
        "machines": args.machines,
        "mode": mode,
        "criterion": (
            f"relative deviation <= {EXACT_RTOL:g}" if mode == "exact" else f"|dev| <= {MC_SIGMAS:g} standard errors"
        ),
        "pass": bool(ok),
        "max_rel_dev": worst,
        "per_job": rows,
    }
    if mode == "mc":
        out["samples"] = cfg.mc_samples
    if fallback_reason:
        out["fallback_reason"] = fallback_reason
    params = {
        "instance": args.instance,
        "mechanism": str(spec),
        "machines": args.machines,
        "oracle": args.oracle,
    }
    out["manifest"] = _manifest("verify", params, args.seed, data, started)
    _write(args.out, _json_bytes(out))
    if not ok:
        _info("verification failed: closed form and oracle disagree")
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_bounds(args) -> int:
    try:
        eps_list = [float(x) for x in args.eps_list.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--eps-list must be comma separated numbers, got {args.eps_list!r}") from None
    if not eps_list or any(not (math.isfinite(e) and e > 0) for e in eps_list):
        raise UsageError("every eps in --eps-list must be positive")
    lines = [f"{'eps':>10} {'lower':>12} {'upper':>12} {'gap':>10}"]
    for e in eps_list:
        lo = metrics.bound_lower(e, clamp=True)
        up = metrics.bound_upper(e)
        gap = up - metrics.bound_lower(e)
        lines.append(f"{e:>10.6g} {lo:>12.6g} {up:>12.6g} {gap:>10.6g}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fairsched", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"fairsched {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("--kind", required=True, choices=["example-i", "lower-bound", "powers", "uniform"])
    g.add_argument("--n", type=int)
    g.add_argument("--large", type=float)
    g.add_argument("--eps", type=float)
    g.add_argument("--d", type=float, help="target total size for lower-bound")
    g.add_argument("--p", type=int)
    g.add_argument("--max-size", type=float)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("eval", help="evaluate a mechanism on an instance")
    e.add_argument("--instance", required=True)
    e.add_argument("--mechanism", required=True)
    e.add_argument("--machines", type=int, default=1)
    e.add_argument("--mode", choices=["exact", "mc"], default="exact")
    e.add_argument("--samples", type=int, default=10_000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    f = sub.add_parser("frontier", help="export the Pareto-schedule frontier as CSV")
    f.add_argument("--instance", required=True)
    f.add_argument("--out")
    f.set_defaults(func=cmd_frontier)

    v = sub.add_parser("verify", help="check closed forms against an oracle")
    v.add_argument("--instance", required=True)
    v.add_argument("--mechanism", required=True)
    v.add_argument("--machines", type=int, default=1)
    v.add_argument("--oracle", default="auto", help="exact, mc:N, or auto (exact, else mc)")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bounds", help="tabulate the efficacy bounds")
    b.add_argument("--eps-list", required=True)
    b.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if getattr(args, "machines", 1) < 1:
        _info("fairsched: error: --machines must be >= 1")
        return EXIT_USAGE
    if getattr(args, "samples", 2) < 1:
        _info("fairsched: error: --samples must be >= 1")
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        _info(f"fairsched: error: {exc}")
        return EXIT_USAGE
    except InfeasibleError as exc:
        _info(f"fairsched: infeasible: {exc}")
        if args.command == "eval":
            _info("hint: rerun with --mode mc")
        return EXIT_INFEASIBLE
    except (FairSchedError, DegenerateInstanceError) as exc:
        _info(f"fairsched: invalid input: {exc}")
        return EXIT_INPUT
    except OSError as exc:
        _info(f"fairsched: write error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

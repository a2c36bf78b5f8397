"""Command-line surface.

Subcommands: run, audit, adversary, bound, cor2.  A line-oriented
``key = value`` config file can pre-set any flag; flags given on the command
line override the file.
"""

from __future__ import annotations

import argparse
import sys

from . import bounds, comparators, harness
from .game import GameTranscript
from .kernels import parse_kernel


def load_config(path) -> dict:
    """Parse a `key = value` config file; keys mirror the long flag names."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, ln in enumerate(fh, start=1):
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            if "=" not in ln:
                raise ValueError(f"{path}:{lineno}: expected `key = value`, got {ln!r}")
            key, _, value = ln.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(args: argparse.Namespace, argv) -> None:
    if not getattr(args, "config", None):
        return
    conf = load_config(args.config)
    explicit = {a.split("=")[0].lstrip("-").replace("-", "_")
                for a in argv if a.startswith("--")}
    for key, raw in conf.items():
        if key in explicit or not hasattr(args, key):
            continue
        current = getattr(args, key)
        if isinstance(current, bool):
            setattr(args, key, raw.lower() in ("1", "true", "yes"))
        elif isinstance(current, int) and not isinstance(current, bool):
            setattr(args, key, int(raw))
        elif isinstance(current, float):
            setattr(args, key, float(raw))
        else:
            setattr(args, key, raw)


def _reality(args):
    if args.input:
        return harness.ingest_csv(args.input)
    if args.synth:
        kernel = parse_kernel(args.kernel)
        return harness.synth_iid(args.synth, args.n, args.seed, args.Y, kernel)
    raise SystemExit("run: need --input FILE or --synth SPEC")


def cmd_run(args) -> int:
    reality = _reality(args)
    t = harness.run_game(args.algorithm, args.kernel, args.Y, reality, seed=args.seed)
    if args.out:
        t.save(args.out)
        print(f"wrote {len(t)} rounds to {args.out} (cumloss={t.cumloss:.6g})")
    else:
        sys.stdout.write(t.to_csv())
    return 0


def cmd_audit(args) -> int:
    t = GameTranscript.load(args.transcript, algorithm=args.algorithm,
                            kernel=args.kernel, Y=args.Y)
    battery = None
    if args.comparators:
        with open(args.comparators, encoding="utf-8") as fh:
            battery = [comparators.comparator_from_text(fh.read())]
    report = harness.audit(t, args.kernel, args.Y, battery, master_seed=args.seed)
    print(report.table())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
    if not report.ok:
        print(f"VIOLATIONS: {', '.join(report.violations)}", file=sys.stderr)
        return 1
    return 0


def cmd_adversary(args) -> int:
    t, D, record = harness.adversary_thm4(args.algorithm, args.c, args.Y, args.n, args.d)
    for key, value in record.items():
        print(f"{key} = {value}")
    if args.out:
        t.save(args.out)
    return 0 if (record["loss_floor_ok"] and record["excess_ok"]) else 1


def cmd_bound(args) -> int:
    if args.figure1:
        dest = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
        dest.write("N,d,f\n")
        for N, d, f in bounds.figure1_grid():
            dest.write(f"{N},{d:.2f},{f!r}\n")
        if args.out:
            dest.close()
            print(f"wrote Figure-1 grid to {args.out}")
        return 0
    name = args.name
    if name == "thm1":
        v = bounds.regret_thm1(args.Y, args.c, args.d, args.n)
    elif name == "thm2":
        v = bounds.regret_thm2(args.Y, args.c, args.d, args.lossD)
    elif name == "thm3-exact":
        v = bounds.regret_thm3_exact(args.Y, args.c, args.d, args.n)
    elif name == "thm3-asymptotic":
        v = bounds.regret_thm3_asymptotic(args.Y, args.c, args.d, args.n, args.delta)
        print("(asymptotic, not asserted)", file=sys.stderr)
    elif name == "thm4-lower":
        v = bounds.lower_bound_thm4(args.Y, args.c, args.d, args.n)
    elif name == "cor2":
        v = bounds.risk_bound_cor2(args.Y, args.c, args.d, args.n, args.delta)
    else:
        raise SystemExit(f"unknown bound name {name!r}")
    print(repr(v))
    return 0


def cmd_cor2(args) -> int:
    summary = harness.cor2_experiment(args.algorithm, args.kernel, args.Y, args.synth,
                                      args.n, args.trials, args.delta,
                                      master_seed=args.seed)
    for key, value in summary.items():
        print(f"{key} = {value}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="okreg",
                                description="competitive online kernel regression")
    p.add_argument("--config", help="key = value config file; flags override it")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--algorithm", default="aln")
        sp.add_argument("--kernel", default="fermi-sobolev")
        sp.add_argument("--Y", type=float, default=1.0)
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("run", help="play a game and write the transcript")
    common(sp)
    sp.add_argument("--input", help="CSV file with header x1,...,xm,y")
    sp.add_argument("--synth", help="synthetic spec: uniform-smooth | sign-noise")
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("audit", help="audit a transcript against the bounds")
    common(sp)
    sp.add_argument("--transcript", required=True)
    sp.add_argument("--comparators", help="comparator file (text expansion format)")
    sp.add_argument("--out", help="write the report as CSV here")
    sp.set_defaults(func=cmd_audit)

    sp = sub.add_parser("adversary", help="run the lower-bound adversary")
    common(sp)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=float, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_adversary)

    sp = sub.add_parser("bound", help="evaluate a regret/risk bound")
    sp.add_argument("--name",
                    choices=["thm1", "thm2", "thm3-exact", "thm3-asymptotic",
                             "thm4-lower", "cor2"])
    sp.add_argument("--figure1", action="store_true",
                    help="emit the (N, d) -> f grid as CSV")
    sp.add_argument("--Y", type=float, default=1.0)
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--d", type=float, default=1.0)
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--lossD", type=float, default=0.0)
    sp.add_argument("--delta", type=float, default=0.25)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("cor2", help="averaged-rule risk experiment")
    common(sp)
    sp.add_argument("--synth", default="uniform-smooth")
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--delta", type=float, default=0.1)
    sp.set_defaults(func=cmd_cor2)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(argv)
    _apply_config(args, argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

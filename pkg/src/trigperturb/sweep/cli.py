"""
Command line entry point: ``trigperturb <command> [options]``.

Exit status is 0 when every asserted check passes, 1 when a check fails and
2 for usage, I/O or numerical errors.
"""
import argparse
import logging
import sys
from typing import List, Optional

from trigperturb.core.grid import StrategyTag
from trigperturb.sweep.runner import COMMANDS, DEFAULT_N_LIST, SweepConfig, SweepRunner, run_sweep


def parse_n_list(text: str) -> List[int]:
    """``8,16,32`` or a powers-of-two range ``8..256``."""
    text = text.strip()
    if ".." in text:
        lo_text, _, hi_text = text.partition("..")
        try:
            lo, hi = int(lo_text), int(hi_text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad N range: {text}")
        if lo < 1 or hi < lo:
            raise argparse.ArgumentTypeError(f"N range needs 1 <= lo <= hi, got {text}")
        values = []
        n = lo
        while n <= hi:
            values.append(n)
            n *= 2
        return values
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad N list: {text}")


def parse_alphas(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha list: {text}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trigperturb",
        description="Lebesgue constant, quadrature and convergence sweeps on perturbed periodic grids",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    strategies = [t.value for t in StrategyTag if t is not StrategyTag.EXPLICIT]
    default_n = ",".join(str(n) for n in DEFAULT_N_LIST)
    for command in COMMANDS:
        p = sub.add_parser(command)
        p.add_argument("--alpha", type=parse_alphas, action="extend", required=True, help="comma-separated perturbation sizes in [0, 1/2); repeatable")
        p.add_argument("--n", type=parse_n_list, default=list(DEFAULT_N_LIST), help=f"N list or lo..hi range (default {default_n})")
        p.add_argument("--trials", type=int, default=1)
        p.add_argument("--strategy", choices=strategies, default="uniform_random")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output path (default $TRIGPERTURB_OUTPUT_DIR/<command>.csv)")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--no-certify", action="store_true", help="skip density doubling in maximum searches")
        p.add_argument("--metrics-port", type=int, default=None, help="serve Prometheus metrics on this port")
        p.add_argument("--verbose", "-v", action="store_true")
        if command == "converge":
            p.add_argument("--function", required=True, help="smooth:<sigma> or analytic:<b>")
            p.add_argument("--runge-demo", action="store_true", help="use fully scattered nodes instead of perturbed ones")
            p.add_argument("--shift-half-spacing", action="store_true", help="move the singularity of f half a spacing off the grid")
    return parser


def config_from_args(args: argparse.Namespace) -> SweepConfig:
    return SweepConfig(
        command=args.command,
        alphas=args.alpha,
        n_list=args.n,
        trials=args.trials,
        strategy=args.strategy,
        seed=args.seed,
        out_path=args.out,
        function=getattr(args, "function", None),
        workers=args.workers,
        runge_demo=getattr(args, "runge_demo", False),
        shift_half_spacing=getattr(args, "shift_half_spacing", False),
        certify=not args.no_certify,
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(message)s",
    )
    try:
        cfg = config_from_args(args)
    except ValueError as e:
        logging.error(f"Invalid arguments: {e}")
        return 2

    runner_cls = SweepRunner
    if args.metrics_port:
        try:
            from trigperturb.metrics.prometheus import PrometheusSweepRunner, serve_metrics
        except ImportError:
            logging.error("--metrics-port needs prometheus-client (pip install trig-perturb[metrics])")
            return 2
        serve_metrics(args.metrics_port)
        runner_cls = PrometheusSweepRunner
    return run_sweep(cfg, runner_cls)


if __name__ == "__main__":
    sys.exit(main())

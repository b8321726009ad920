"""Command line entry point, installed as `ppclab`."""
from __future__ import annotations
from pathlib import Path
import argparse
import sys

from .core.errors import DomainError, MissingSequenceFile, SequenceFileError
from .core.harmonic import check_selberg, stream
from .core.sequences import build_sequence, load_sequence, save_sequence
from .experiment.config import ExperimentConfig, ValidationException, load_config
from .experiment.encoding import CsvEncoder, selberg_table
from .experiment.runner import run_experiment
from .log import full_stack, logger

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_TASK = 2
EXIT_IO = 3


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors are validation errors, not task failures."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _list(kind):
    def parse(text: str) -> list:
        try:
            return [kind(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a comma separated list, got {text!r}")

    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="ppclab", description="Pair correlation laboratory.")
    common = _ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed of every random stream")
    common.add_argument("--threads", type=int, default=None, help="worker count (default: all cpus)")
    common.add_argument("--out-dir", type=str, default=None, help="output directory")

    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run an experiment configuration")
    run.add_argument("config", type=str)

    gen = sub.add_parser("gen", parents=[common], help="generate a sequence file")
    gen.add_argument("--family", choices=["power", "nlog"], required=True)
    gen.add_argument("--theta", type=_list(float), default=[], help="power exponents")
    gen.add_argument("--A", type=float, default=1.0, help="log exponent of the nlog family")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--n0", type=int, default=None)
    gen.add_argument("--out", type=str, required=True)

    energy = sub.add_parser("energy", parents=[common], help="energy exponent of a sequence file")
    energy.add_argument("--seq", type=str, required=True)
    energy.add_argument("--gamma", type=_list(float), default=[])
    energy.add_argument("--n-grid", type=_list(int), required=True)
    energy.add_argument("--subset", type=_list(int), default=None, help="0-based column indices")
    energy.add_argument("--window", choices=["prefix", "block"], default="prefix")

    pc = sub.add_parser("paircorr", parents=[common], help="pair correlation of a sequence file")
    pc.add_argument("--seq", type=str, required=True)
    pc.add_argument("--alpha-samples", type=int, default=20)
    pc.add_argument("--alpha", type=_list(float), default=None, help="one fixed dilation vector")
    pc.add_argument("--s-grid", type=_list(float), default=[0.5, 1.0, 2.0])
    pc.add_argument("--n-grid", type=_list(int), default=None, help="default: all rows")
    pc.add_argument("--norm", choices=["sup", "euclid"], default="sup")

    sc = sub.add_parser("selberg-check", parents=[common], help="check one majorant/minorant pair")
    sc.add_argument("--k", type=int, required=True)
    sc.add_argument("--s", type=float, required=True)
    sc.add_argument("--scale", type=float, required=True)
    sc.add_argument("--grid", type=int, default=10_000)
    sc.add_argument("--tensor-points", type=int, default=1_000)
    return parser


def _finish(manifest) -> int:
    if not manifest.succeeded:
        for task, error in manifest.errors.items():
            print(f"{task}: {error}", file=sys.stderr)
        return EXIT_TASK
    return EXIT_OK


def _run(args) -> int:
    overrides = {"seed": args.seed} if args.seed is not None else None
    config = load_config(args.config, overrides)
    return _finish(run_experiment(config, args.threads, args.out_dir))


def _gen(args) -> int:
    params = {"thetas": args.theta} if args.family == "power" else {"A": args.A}
    x = build_sequence(args.family, args.n, args.n0, **params)
    save_sequence(x, args.out)
    logger.info(f"wrote {x.N} rows of {x.d} columns to {args.out}")
    return EXIT_OK


def _file_config(args, task: str, **fields) -> ExperimentConfig:
    raw = {
        "sequence": {"family": "file", "path": args.seq},
        "tasks": [task],
        "output": {"directory": args.out_dir or "out"},
        **fields,
    }
    if args.seed is not None:
        raw["seed"] = args.seed
    return ExperimentConfig.from_dict(raw)


def _energy(args) -> int:
    x = load_sequence(args.seq)
    fields = {"N_grid": args.n_grid, "d": x.d, "window": args.window}
    if args.gamma:
        fields["gamma"] = args.gamma
    if args.subset is not None:
        fields["subset"] = args.subset
    config = _file_config(args, "energy", **fields)
    return _finish(run_experiment(config, args.threads))


def _paircorr(args) -> int:
    x = load_sequence(args.seq)
    if args.alpha is not None:
        alpha = {"measure": "fixed", "values": [args.alpha]}
    else:
        alpha = {"measure": "mu", "samples": args.alpha_samples}
    fields = {
        "N_grid": args.n_grid or [x.N],
        "d": x.d,
        "s_grid": args.s_grid,
        "norm": args.norm,
        "alpha": alpha,
    }
    config = _file_config(args, "paircorr", **fields)
    return _finish(run_experiment(config, args.threads))


def _selberg_check(args) -> int:
    rng = stream(args.seed or 0, 0)
    check = check_selberg(args.k, args.s, args.scale, args.grid, args.tensor_points, rng=rng)
    text = CsvEncoder.encode(selberg_table([check]))
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "selberg.csv").write_text(text, encoding="utf-8", newline="\n")
    sys.stdout.write(text)
    return EXIT_OK if check.passed() else EXIT_TASK


COMMANDS = {
    "run": _run,
    "gen": _gen,
    "energy": _energy,
    "paircorr": _paircorr,
    "selberg-check": _selberg_check,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ValidationException as e:
        print(e, file=sys.stderr)
        return EXIT_VALIDATION
    except MissingSequenceFile as e:
        print(e, file=sys.stderr)
        return EXIT_IO
    except (DomainError, SequenceFileError) as e:
        print(e, file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        logger.error(f"I/O error: {e}")
        logger.debug(full_stack())
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

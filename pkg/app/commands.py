import logging
from pathlib import Path

from netcoding.config import load_config
from netcoding.errors import ConfigError, InvariantViolation
from netcoding.harness import dump_trial, run
from netcoding.selftest import run_selftest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INVARIANT = 4


def _add_experiment_arguments(parser):
    parser.add_argument("--config", required=True, help="path of the JSON experiment config")
    parser.add_argument("--seed", type=int, help="master seed (overrides the config)")
    parser.add_argument("--trials", type=int, help="trials per point (overrides the config)")
    parser.add_argument("--out", help="output file (overrides output_path)")
    parser.add_argument("--format", choices=["csv", "json"], help="output format (overrides the config)")
    parser.add_argument("--workers", type=int, default=1, help="size of the trial worker pool")
    parser.add_argument("--no-timing", action="store_true", help="write zero wall times for byte-identical output")
    parser.add_argument("--dump-trial", type=int, metavar="INDEX",
                        help="also write the network or dissemination graph of this trial next to the output")


def run_experiment(args) -> int:
    """Validate the config, run every trial and write rows plus summary"""
    overrides = {"seed": args.seed, "trials": args.trials, "output_path": args.out, "format": args.format}
    try:
        config = load_config(args.config, overrides)
        if config.kind != args.command:
            logger.error("kind: config describes a %r experiment, not %r", config.kind, args.command)
            return EXIT_CONFIG
        summary = run(config, workers=args.workers, timing=not args.no_timing)
        if args.dump_trial is not None:
            path = dump_trial(config, args.dump_trial, Path(config.output_path).parent)
            logger.info("trial %d dumped to %s", args.dump_trial, path)
    except ConfigError as exc:
        for diagnostic in exc.diagnostics:
            logger.error("%s", diagnostic)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        logger.error("invariant violated: %s", exc)
        return EXIT_INVARIANT
    except OSError as exc:
        logger.error("I/O error: %s", exc)
        return EXIT_IO

    logger.info("finished %s experiment with %d point(s)", summary["kind"], len(summary["points"]))
    return EXIT_OK


def selftest(args) -> int:
    """Field and matrix oracle suite"""
    results = run_selftest()
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error("selftest failed: %s", ", ".join(failed))
        return EXIT_INVARIANT
    logger.info("selftest passed (%d checks)", len(results))
    return EXIT_OK


def register_commands(subparsers):
    for name, help_text in (
        ("storage", "decentralized erasure code: disseminate, query any k, decode"),
        ("fountain", "distributed fountain code with peeling decoder"),
        ("radio", "network coding vs blind forwarding over untuned radios"),
    ):
        parser = subparsers.add_parser(name, help=help_text)
        _add_experiment_arguments(parser)
        parser.set_defaults(handler=run_experiment)

    parser = subparsers.add_parser("selftest", help="exhaustive field and matrix checks")
    parser.set_defaults(handler=selftest)

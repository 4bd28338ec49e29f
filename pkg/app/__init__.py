import argparse
import logging
import sys
from typing import List, Optional


def configure_logging(verbose: bool = False):
    """Timestamped one-line log records on stderr"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="[%(asctime)s] %(message)s",
        datefmt="%H:%M:%S",
        stream=sys.stderr,
        force=True,
    )


def create_app() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netcoding",
        description="Monte Carlo studies of decentralized erasure codes, distributed fountain codes "
                    "and network coding over untuned radios",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-trial detail")
    subparsers = parser.add_subparsers(dest="command", required=True)

    from app.commands import register_commands
    register_commands(subparsers)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = create_app()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    return args.handler(args)

#!/usr/bin/env python3
"""
Main entry point for the pseudo-Boolean to CNF encoder
"""
import sys
import argparse
from typing import List, Optional
from loguru import logger

from src.commands import ALL_FAMILIES, EXIT_FAILED, cmd_compare, cmd_encode, cmd_verify
from config import settings


def setup_logging():
    """Configure logging"""
    logger.remove()
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>",
        level=settings.log_level
    )
    if settings.log_file:
        logger.add(
            settings.log_file,
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}",
            level="DEBUG",
            rotation="10 MB",
            retention="7 days"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Translate pseudo-Boolean constraints into CNF")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Log level")
    commands = parser.add_subparsers(dest="command", required=True)

    encode = commands.add_parser("encode", help="Write the DIMACS CNF of an OPB file")
    encode.add_argument("--in", dest="input", required=True, help="OPB input file")
    encode.add_argument("--out", dest="output", required=True, help="DIMACS output file")
    encode.add_argument("--encoder", required=True, choices=ALL_FAMILIES, help="Encoder family")
    encode.add_argument("--moduli", help="primes, naturals, primepowers or list:2,3,5 (modular encoders)")
    encode.add_argument("--radix", type=int, help="Digit radix of the sortnet encoder")
    encode.add_argument("--assert-root", action="store_true", help="Add the root as a unit clause")
    encode.add_argument("--stats", help="Write per-constraint size statistics to this JSON file")
    encode.set_defaults(handler=cmd_encode)

    verify = commands.add_parser("verify", help="Check that every translation is valid")
    verify.add_argument("--in", dest="input", required=True, help="OPB input file")
    verify.add_argument("--encoder", required=True, choices=ALL_FAMILIES, help="Encoder family")
    verify.add_argument("--moduli", help="primes, naturals, primepowers or list:2,3,5 (modular encoders)")
    verify.add_argument("--radix", type=int, help="Digit radix of the sortnet encoder")
    verify.add_argument("--limit-vars", type=int, help=f"Largest input count to check (default {settings.verify_limit_vars})")
    verify.set_defaults(handler=cmd_verify)

    compare = commands.add_parser("compare", help="Compare encoder sizes and propagation strength")
    compare.add_argument("--in", dest="input", required=True, help="OPB input file")
    compare.add_argument("--encoders", help="Comma-separated encoder families (default: all)")
    compare.add_argument("--report", required=True, help="JSON report file")
    compare.set_defaults(handler=cmd_compare)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function"""
    args = build_parser().parse_args(argv)

    # Override settings with command line arguments
    if args.log_level:
        settings.log_level = args.log_level

    setup_logging()

    try:
        return args.handler(args)
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())

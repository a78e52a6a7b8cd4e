import argparse
import logging
import sys
from pathlib import Path

from semitoric.commands import COMMANDS, CommandOptions, execute
from semitoric.settings import EngineSettings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semitoric",
        description="Exact computations with monoids and fans with attached groups or monoids.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("files", nargs="+", help="JSON documents; '-' reads standard input")
    parser.add_argument("--cone", help="cone key (comma-joined ray indices) or alias from the document")
    parser.add_argument("--window", help="plot box: N for [0,N]^2 or xmin,xmax,ymin,ymax")
    parser.add_argument("--out", type=Path, help="write the output here instead of standard output")
    parser.add_argument("--workers", type=int, help="threads for per-cone work")
    parser.add_argument("--certification-factor", type=int, help="certification box as a multiple of the largest generator degree")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--table", action="store_true", help="also print validation failures as a table on standard error")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = EngineSettings.from_env().with_overrides(
            workers=args.workers,
            certification_factor=args.certification_factor,
            log_level=args.log_level,
        )
    except ValueError as exc:
        print(f"semitoric: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(
        level=settings.log_level.upper(),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    result = execute(args.command, args.files, CommandOptions(args.cone, args.window, settings))
    if args.table and result.report is not None and result.report.failures:
        print(result.report.to_frame().to_string(index=False), file=sys.stderr)

    data = result.render()
    if args.out is not None:
        args.out.write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())

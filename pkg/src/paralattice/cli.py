"""``paralattice <command> --config f.json [--out report.json] [--points points.csv]``.

Exit codes: 0 when the verdict is certified-* or evidence-only, 1 for
rejected/unknown, 2 for configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import sys

from .config import COMMANDS, load_config
from .errors import ConfigError
from .report import dumps, emit_points, execute

EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="paralattice",
        description="Construct and certify exponential bases on parallelepipeds.",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--points", help="CSV target for plot points (emit-points)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.command)
        if args.command == "emit-points" and not args.points:
            raise ConfigError("--points", "emit-points needs a CSV target")
        report = execute(cfg)
        if args.command == "emit-points" and report.exit_code == 0:
            emit_points(cfg, args.points)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        print(dumps({"command": args.command, "verdict": "rejected",
                     "errors": [{"type": "ConfigError", "path": exc.path, "message": str(exc)}]}),
              end="", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = report.dumps()
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        sys.stdout.write(text)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())

"""noteflow-capture command line entry point."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .capture import CaptureConfig, capture, load_replay


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="noteflow-capture")
    parser.add_argument("--notebook", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--replay", default=None,
                        help="JSON array of cell positions (or objects with "
                             "cell_pos and edited source) driving re-runs")
    parser.add_argument("--sample-cap", type=int, default=10000)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--variables", nargs="*", default=None,
                        help="capture only these variable names")
    args = parser.parse_args(argv)

    notebook = Path(args.notebook)
    if not notebook.is_file():
        print(f"error: notebook not found: {notebook}", file=sys.stderr)
        return 2
    replay = load_replay(Path(args.replay)) if args.replay else None
    config = CaptureConfig(notebook=notebook, out_dir=Path(args.out),
                           sample_cap=args.sample_cap, seed=args.seed,
                           variables=args.variables, replay=replay)
    result = capture(config)
    for err in result.errors:
        print(f"warning: {err}", file=sys.stderr)
    print(f"captured {len(result.entries)} snapshots over {len(result.log)} executions "
          f"-> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

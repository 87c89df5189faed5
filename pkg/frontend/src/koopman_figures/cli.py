"""render_figures: turn a pipeline artifact directory into fig2-5 images."""

from __future__ import annotations

import argparse
import sys

from .figures import SchemaError, default_specs, render

__all__ = ["main", "console_main"]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figures",
        description="render fig2_sim/fig3_err/fig4_constant/fig5_sine CSVs "
        "into fig{2,3,4,5}.{svg,png}",
    )
    parser.add_argument("artifact_dir", help="directory holding the pipeline CSVs")
    parser.add_argument(
        "--out", default=None, help="output directory (default: the artifact directory)"
    )
    args = parser.parse_args(argv)

    written = []
    for spec in default_specs(args.artifact_dir, args.out):
        if not spec.input_csv.exists():
            print(f"missing artifact: {spec.input_csv}", file=sys.stderr)
            return 1
        try:
            written.extend(render(spec))
        except SchemaError as exc:
            print(f"schema mismatch: {exc}", file=sys.stderr)
            return 2
    for path in written:
        print(f"wrote {path}")
    return 0


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()

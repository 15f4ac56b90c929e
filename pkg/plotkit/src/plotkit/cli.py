"""plotkit CLI: ``plotkit plot <spec-file>`` renders one plot spec."""

from __future__ import annotations

import argparse
import sys

from .render import PlotError, load_plot_spec, render


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # accept both `plotkit plot spec.yaml` and `plotkit spec.yaml`
    if argv and argv[0] == "plot":
        argv = argv[1:]
    ap = argparse.ArgumentParser(prog="plotkit",
                                 description="Render modcw spectrum artifacts to vector figures")
    ap.add_argument("spec", help="plot spec YAML file")
    args = ap.parse_args(argv)
    try:
        info = render(load_plot_spec(args.spec))
    except PlotError as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return 2
    print(info.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())

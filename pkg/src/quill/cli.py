"""Command-line entry point: ``quill figure2|figure3|sweep|validate|asymptote``.

Exit codes: 0 success, 1 usage or parse error, 2 validation failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .errors import ParameterError, QuillError
from .experiments import (
    FIGURE3_NOTE,
    Grid,
    SweepSpec,
    SweepTable,
    figure2_spec,
    figure3_spec,
    figure3_plots,
    ratio_plot,
    run_sweep,
)
from .model import asymptote_from_counts
from .montecarlo import MCConfig, PER_SHOT_COUNTER, STREAM_MODES
from .validation import run_validation

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 1, 2, 3
SEED_ENV = "QUILL_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def resolve_seed(flag: Optional[int]) -> int:
    """Seed precedence: command-line flag, then $QUILL_SEED, then 0."""
    if flag is not None:
        seed = flag
    else:
        raw = os.environ.get(SEED_ENV)
        if raw is None or raw.strip() == "":
            return 0
        try:
            seed = int(raw.strip(), 10)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be a decimal integer, got {raw!r}") from None
    if not 0 <= seed < 2**64:
        raise UsageError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def _grid(text: str) -> Grid:
    try:
        return Grid.parse(text)
    except ParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--format", choices=("csv", "csv+svg"), default="csv+svg")
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (overrides ${SEED_ENV})")


def _add_scenario_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=_grid, default=None, metavar="MIN:MAX:COUNT",
                   help="log-spaced N_beta grid")
    p.add_argument("--N", type=float)
    p.add_argument("--M", type=int)
    p.add_argument("--M_beta", "--M-beta", dest="M_beta", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--eta_beta", "--eta-beta", dest="eta_beta", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--N_pix", "--N-pix", dest="N_pix", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quill", description="Quantum illumination: effective two-mode analysis.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("figure2", help="R_SNR and R_MI versus N_beta, equal source brightness")
    _add_output_flags(p)
    _add_scenario_overrides(p)

    p = sub.add_parser("figure3", help="SNR, MI and ratio theory curves at the measured settings")
    _add_output_flags(p)
    _add_scenario_overrides(p)
    p.add_argument("--n-twb", dest="N_twb", type=float)
    p.add_argument("--n-thb", dest="N_thb", type=float)

    p = sub.add_parser("sweep", help="generic sweep from a JSON spec")
    p.add_argument("spec", help="path to a sweep spec JSON file")
    p.add_argument("-o", "--output", default=None, help="CSV file (default: stdout)")
    p.add_argument("--svg", default=None, help="also write a ratio plot to this path")

    p = sub.add_parser("validate", help="Monte Carlo cross-check of the analytic results")
    p.add_argument("--shots", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--batches", type=int, default=40)
    p.add_argument("--stream-mode", choices=STREAM_MODES, default=PER_SHOT_COUNTER)
    p.add_argument("--out", default=None, help="directory for validate.csv (optional)")
    p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("asymptote", help="large-bath enhancement |c_TWB/c_THB|^2")
    p.add_argument("--n-twb", type=float, required=True)
    p.add_argument("--n-thb", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    return parser


def _overrides(args, names) -> dict:
    return {k: getattr(args, k) for k in names if getattr(args, k, None) is not None}


def _write(path: Path, text: str) -> None:
    path.write_bytes(text.encode("utf-8"))


def _emit(table: SweepTable, out: Path, stem: str, svgs: dict, fmt: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    table.write_csv(out / f"{stem}.csv")
    if fmt == "csv+svg":
        for name, text in svgs.items():
            _write(out / name, text)


def cmd_figure2(args) -> int:
    resolve_seed(args.seed)
    spec = figure2_spec(args.grid, **_overrides(args, ("N", "M", "M_beta", "eta", "eta_beta", "tau", "N_pix")))
    table = run_sweep(spec)
    svgs = {"figure2.svg": ratio_plot(table, "TWB / THB enhancement versus bath")} if args.format == "csv+svg" else {}
    _emit(table, Path(args.out), "figure2", svgs, args.format)
    last = table.rows[-1]
    print(f"figure2: {len(table.rows)} points written to {args.out}; asymptote = {last[-1]:.6f}, "
          f"R_SNR = {last[5]:.6f}, R_MI = {last[6]:.6f} at N_beta = {last[0]:.4g}")
    return EXIT_OK


def cmd_figure3(args) -> int:
    resolve_seed(args.seed)
    spec = figure3_spec(args.grid, **_overrides(
        args, ("N", "N_twb", "N_thb", "M", "M_beta", "eta", "eta_beta", "tau", "N_pix")))
    table = run_sweep(spec)
    svgs = figure3_plots(table) if args.format == "csv+svg" else {}
    _emit(table, Path(args.out), "figure3", svgs, args.format)
    print(f"figure3: {FIGURE3_NOTE}")
    print(f"figure3: asymptotic enhancement = {table.rows[0][-1]:.4f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        text = Path(args.spec).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"quill: cannot read {args.spec}: {exc}", file=sys.stderr)
        return EXIT_IO
    spec = SweepSpec.from_json(text)
    table = run_sweep(spec)
    if args.output is None:
        sys.stdout.write(table.to_csv())
    else:
        table.write_csv(args.output)
    if args.svg:
        if not {"N_beta", "R_SNR", "R_MI", "asymptote"} <= set(table.columns):
            raise ParameterError("--svg needs the N_beta, R_SNR, R_MI and asymptote columns")
        _write(Path(args.svg), ratio_plot(table, "TWB / THB enhancement versus bath"))
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = MCConfig(seed=resolve_seed(args.seed), shots=args.shots, pixels=1,
                   stream_mode=args.stream_mode, batches=args.batches, workers=args.workers)
    progress = None if args.quiet else (lambda name: print(f"  running {name}", file=sys.stderr))
    start = time.perf_counter()
    report = run_validation(cfg, progress=progress)
    sys.stdout.write(report.to_text())
    print(f"seed {cfg.seed}, {cfg.shots} shots per instance, {time.perf_counter() - start:.1f} s")
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "validate.csv", report.to_csv())
    return report.exit_code


def cmd_asymptote(args) -> int:
    print(f"{asymptote_from_counts(args.n_twb, args.n_thb, args.eta, args.m):.6f}")
    return EXIT_OK


COMMANDS = {
    "figure2": cmd_figure2,
    "figure3": cmd_figure3,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "asymptote": cmd_asymptote,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, QuillError) as exc:
        print(f"quill: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"quill: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

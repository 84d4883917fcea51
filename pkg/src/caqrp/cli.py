"""Command-line driver: ``caqrp run``, ``caqrp compare`` and ``caqrp mcdm``.

Exit codes: 0 success, 1 validation error (bad config, flags or input file),
2 runtime failure. Relative output paths are resolved against
``$CAQRP_OUT_DIR`` when it is set.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ScenarioConfig, load_config
from .errors import ValidationError
from .mcdm import parse_matrix_text, topsis_rank
from .metrics import CSV_HEADER, aggregate, write_csv
from .netsim import run as run_simulation
from .protocol import STRATEGIES

log = logging.getLogger("caqrp")

OUT_DIR_ENV = "CAQRP_OUT_DIR"
EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # bad flags are a validation problem, not a runtime one
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def out_path(path: str | os.PathLike) -> Path:
    p = Path(path)
    base = os.environ.get(OUT_DIR_ENV)
    return p if p.is_absolute() or not base else Path(base) / p


def _int_list(text: str, what: str) -> list[int]:
    try:
        values = [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise ValidationError(f"{what}: expected comma-separated integers, got {text!r}") from None
    if not values:
        raise ValidationError(f"{what}: empty list")
    return values


def _protocols(text: str) -> list[str]:
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    unknown = [t for t in tokens if t not in STRATEGIES]
    if unknown or not tokens:
        raise ValidationError(f"--protocols: unknown protocol {', '.join(unknown) or '(none)'}; valid: {', '.join(STRATEGIES)}")
    return tokens


# -- simulation jobs ----------------------------------------------------------


def _job(args):
    config, seed, trace = args
    result = run_simulation(config, seed, trace=trace)
    return result.report, result.trace_text if trace else None


def run_jobs(jobs: list[tuple[ScenarioConfig, int, bool]], workers: int = 1):
    """Run ``(config, seed, trace)`` jobs; results come back sorted by (protocol, n_peers, seed)."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    return sorted(results, key=lambda r: (r[0].protocol, r[0].n_peers, r[0].seed))


def write_reports(reports, path: Path | None, append: bool) -> None:
    if path is None:
        write_csv(reports, sys.stdout)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    if append and path.exists() and path.stat().st_size > 0:
        with path.open() as fh:
            first = fh.readline().rstrip("\r\n")
        if first != CSV_HEADER:
            raise ValidationError(f"{path}: existing header does not match; refusing to append")
        with path.open("a", newline="") as fh:
            write_csv(reports, fh, header=False)
    else:
        with path.open("w", newline="") as fh:
            write_csv(reports, fh)


def _trace_path(csv_path: Path | None, report) -> Path:
    name = f"{report.protocol}-n{report.n_peers}-seed{report.seed}.trace"
    if csv_path is None:
        return out_path(f"caqrp-{name}")
    return csv_path.with_name(f"{csv_path.stem}-{name}")


# -- commands -------------------------------------------------------------


def cmd_run(args) -> int:
    if args.append and not args.out:
        raise ValidationError("--append needs --out")
    config = load_config(args.config)
    seeds = _int_list(args.seed, "--seed") if args.seed else list(config.run.seeds)
    if any(s < 0 for s in seeds):
        raise ValidationError("--seed: seeds must be >= 0")
    csv_path = out_path(args.out) if args.out else None
    results = run_jobs([(config, s, args.trace) for s in seeds], args.jobs)
    write_reports([r for r, _ in results], csv_path, args.append)
    if args.trace:
        for report, text in results:
            p = _trace_path(csv_path, report)
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text)
            log.info("trace written to %s", p)
    return EXIT_OK


def summary_table(reports) -> str:
    agg = aggregate(reports)
    header = f"{'protocol':<10} {'peers':>5} {'seeds':>5} {'hit_rate':>15} {'recall':>15} {'delay_s':>17}"
    lines = [header, "-" * len(header)]

    def cell(s, width, digits):
        if s.mean is None:
            return f"{'-':>{width}}"
        sd = f"{s.std:.{digits}f}" if s.std is not None else "-"
        return f"{f'{s.mean:.{digits}f} +/- {sd}':>{width}}"

    for (proto, n), m in agg.items():
        count = sum(1 for r in reports if r.protocol == proto and r.n_peers == n)
        lines.append(
            f"{proto:<10} {n:>5} {count:>5} {cell(m['hit_rate'], 15, 3)} {cell(m['recall_mean'], 15, 3)} "
            f"{cell(m['delay_mean_s'], 17, 4)}"
        )
    return "\n".join(lines)


def cmd_compare(args) -> int:
    protocols = _protocols(args.protocols)
    sizes = _int_list(args.sizes, "--sizes")
    if any(n < 1 for n in sizes):
        raise ValidationError("--sizes: network sizes must be >= 1")
    base = load_config(args.config)
    if args.seeds is not None:
        if args.seeds < 1:
            raise ValidationError("--seeds must be >= 1")
        seeds = list(range(1, args.seeds + 1))
    else:
        seeds = list(base.run.seeds)
    jobs = []
    for proto in protocols:
        for n in sizes:
            config = base.replace(protocol={"strategy": proto}, network={"n_peers": n}).check()
            jobs.extend((config, s, False) for s in seeds)
    reports = [r for r, _ in run_jobs(jobs, args.jobs)]
    csv_path = out_path(args.out)
    write_reports(reports, csv_path, append=False)
    print(summary_table(reports))
    log.info("%d rows written to %s", len(reports), csv_path)
    return EXIT_OK


def format_ranking(result) -> str:
    lines = [f"{'alt':<6} {'S+':>7} {'S-':>7} {'RC':>7} {'rank':>5}"]
    for alt, sp, sm, rc, rank in result.rows():
        lines.append(f"{alt!s:<6} {sp:>7.3f} {sm:>7.3f} {rc:>7.3f} {rank:>5d}")
    return "\n".join(lines)


def cmd_mcdm(args) -> int:
    path = Path(args.matrix)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read matrix file {path}: {exc.strerror}") from exc
    parsed = parse_matrix_text(text, str(path))
    if parsed.pairwise is not None:
        w = parsed.matrix.weights
        log.info("AHP-derived weights: (%s)", ", ".join(f"{x:.3f}" for x in w))
    result = topsis_rank(parsed.matrix, prenormalized=args.prenormalized)
    print(format_ranking(result))
    print("top-3: " + ", ".join(str(a) for a in result.top(3)))
    return EXIT_OK


# -- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="caqrp", description="Context-aware query routing simulator and MCDM tools.")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings and errors")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one scenario for one or more seeds")
    p.add_argument("config", help="scenario INI file")
    p.add_argument("--seed", help="seed or comma-separated seeds (default: run.seeds from the config)")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--append", action="store_true", help="append rows to an existing CSV instead of overwriting")
    p.add_argument("--trace", action="store_true", help="write one event trace per seed next to the CSV")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes (default 1)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="sweep protocols x network sizes x seeds")
    p.add_argument("config", help="base scenario INI file")
    p.add_argument("--protocols", default=",".join(STRATEGIES), help="comma-separated: " + ", ".join(STRATEGIES))
    p.add_argument("--sizes", default="25,50,75,100", help="comma-separated peer counts")
    p.add_argument("--seeds", type=int, help="use seeds 1..N (default: run.seeds from the config)")
    p.add_argument("--out", default="compare.csv", help="CSV output path (default: compare.csv)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes (default 1)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("mcdm", help="rank alternatives in a matrix file with TOPSIS")
    p.add_argument("matrix", help="matrix file (m n / kinds / weights or ahp / rows)")
    p.add_argument("--prenormalized", action="store_true", help="rows are already vector-normalized")
    p.set_defaults(func=cmd_mcdm)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr)
    if getattr(args, "jobs", 1) < 1:
        print("caqrp: error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except ValidationError as exc:
        for problem in exc.problems:
            print(f"caqrp: error: {problem}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - report anything else as a runtime failure
        print(f"caqrp: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

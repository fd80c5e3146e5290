"""Command-line front end.

Exit codes: 0 on success, 1 on a domain error (a violated precondition or a
failed verification), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import re
import sys
from pathlib import Path

from .elliptic import supersingular_lambdas
from .localfield import DEFAULT_PRECISION, LocalFieldError
from .scholten import build_spans, diagonal_point, good_span, span_diagnostics
from .search import (
    ENGINES,
    SCHEMA,
    PairResult,
    SearchConfig,
    SearchError,
    ext_tag,
    field_for,
    replay_result,
    run_pair,
    run_table,
    table_csv,
)

CACHE_ENV = "SOMEKAWA_CACHE"

log = logging.getLogger("somekawa")


class DomainError(Exception):
    pass


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "somekawa"


_SCALAR_LIST = re.compile(r"\[\s*([^\[\]{}]*?)\s*\]", re.S)


def dumps(obj) -> str:
    """Indented JSON with lists of scalars kept on one line."""
    text = json.dumps(obj, indent=1, sort_keys=True)
    return _SCALAR_LIST.sub(lambda m: "[" + ", ".join(x.strip() for x in m.group(1).split(",") if x.strip()) + "]", text)


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj) + "\n")


def _field_args(sp: argparse.ArgumentParser, pair: bool = True) -> None:
    sp.add_argument("--p", type=int, required=True, help="prime, p = 3 mod 4 for table runs")
    sp.add_argument("--ext", choices=["+", "-"], required=True, help="uniformizer with pi^2 = +p or -p")
    if pair:
        sp.add_argument("--lambda", dest="lam", type=int, required=True)
        sp.add_argument("--mu", type=int, required=True)
    sp.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="p-adic digits per coordinate")


def _search_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--budget", type=int, default=0, help="candidates per pair, 0 for all of them")
    sp.add_argument("--no-early-exit", action="store_true", help="keep scanning after every signature is found")
    sp.add_argument("--rows", type=lambda s: tuple(int(x) for x in s.split(",")), default=None,
                    help="comma-separated span rows to use (default: all nondegenerate)")
    sp.add_argument("--engine", choices=ENGINES, default="reference")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="somekawa", description="Search for vanishing K/K-symbols on E_lam x E_mu.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("supersingular", help="supersingular Legendre parameters mod p")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--plain", action="store_true", help="space-separated output instead of JSON")

    sp = sub.add_parser("spans", help="the six span rows with diagnostics")
    _field_args(sp)

    sp = sub.add_parser("signatures", help="search one pair")
    _field_args(sp)
    _search_args(sp)

    sp = sub.add_parser("diagonal", help="certified point of signature (N, N)")
    _field_args(sp)
    sp.add_argument("--n", type=int, required=True)

    sp = sub.add_parser("table", help="success rate over all supersingular pairs")
    _field_args(sp, pair=False)
    _search_args(sp)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--cache-dir", type=Path, default=None, help=f"overrides ${CACHE_ENV}")
    sp.add_argument("--no-cache", action="store_true")
    sp.add_argument("--csv", type=Path, default=None, help="also write the CSV report here")

    sp = sub.add_parser("replay", help="re-verify cached witnesses at doubled precision")
    sp.add_argument("--file", type=Path, required=True, help="pair JSON, or a table CSV next to its pair files")
    sp.add_argument("--factor", type=int, default=2)
    return ap


def _config(args, jobs: int = 1) -> SearchConfig:
    if args.budget < 0:
        raise DomainError("precondition: budget must be nonnegative")
    if jobs < 1:
        raise DomainError("precondition: jobs must be positive")
    return SearchConfig(
        budget=args.budget,
        rows=args.rows,
        precision=args.precision,
        jobs=jobs,
        early_exit=not args.no_early_exit,
        engine=args.engine,
    )


def cmd_supersingular(args) -> int:
    lams = supersingular_lambdas(args.p)
    if args.plain:
        print(" ".join(map(str, lams)))
    else:
        _emit(lams)
    return 0


def cmd_spans(args) -> int:
    fd = field_for(args.p, args.ext, args.precision)
    rows = []
    for row in build_spans(fd(args.lam), fd(args.mu)):
        diag = span_diagnostics(row) if row.usable else None
        rows.append(row.to_json(diag))
    _emit({"schema": SCHEMA, "p": args.p, "ext": args.ext, "lambda": args.lam, "mu": args.mu, "rows": rows})
    return 0


def cmd_signatures(args) -> int:
    fd = field_for(args.p, args.ext, args.precision)
    result = run_pair(args.lam, args.mu, fd, _config(args))
    _emit(result.to_json())
    return 0


def cmd_diagonal(args) -> int:
    fd = field_for(args.p, args.ext, args.precision)
    row, w = good_span(fd(args.lam), fd(args.mu))
    wit = diagonal_point(row, w, args.n)
    _emit({"p": args.p, "ext": args.ext, "lambda": args.lam, "mu": args.mu, **wit.to_json()})
    return 0


def cmd_table(args) -> int:
    cfg = _config(args, args.jobs)
    cache = None if args.no_cache else (args.cache_dir or default_cache_dir())

    def progress(res: PairResult) -> None:
        log.info("(%d, %d): %s after %d candidates", res.lam, res.mu,
                 "success" if res.success else "failure", res.candidates_examined)

    row, results = run_table(args.p, args.ext, cfg, cache, progress)
    text = table_csv(results)
    if cache is not None:
        out = Path(cache) / cfg.hash() / f"table_p{args.p}_{ext_tag(args.ext)}.csv"
        out.write_text(text)
    if args.csv is not None:
        args.csv.write_text(text)
    sys.stdout.write(text)
    print(row, file=sys.stderr)
    return 0


def _pair_files(path: Path) -> list[Path]:
    if path.suffix == ".csv":
        with path.open() as fh:
            reader = csv.DictReader(fh)
            files = []
            for rec in reader:
                tag = ext_tag(rec["ext"])
                files.append(path.parent / f"p{rec['p']}_{tag}_{rec['lambda']}_{rec['mu']}.json")
        return files
    return [path]


def cmd_replay(args) -> int:
    if not args.file.exists():
        raise DomainError(f"precondition: {args.file} does not exist")
    ok = True
    reports = []
    for path in _pair_files(args.file):
        try:
            result = PairResult.from_json(json.loads(path.read_text()))
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise DomainError(f"precondition: {path} is not a readable pair result ({exc})") from exc
        checks = replay_result(result, args.factor)
        good = all(c[2] for c in checks)
        ok &= good
        reports.append({
            "file": str(path),
            "p": result.p,
            "ext": result.ext,
            "lambda": result.lam,
            "mu": result.mu,
            "verified": good,
            "witnesses": {k: {"replayed": _sig_out(got), "match": m} for k, got, m in checks},
        })
    _emit({"schema": SCHEMA, "verified": ok, "pairs": reports})
    return 0 if ok else 1


def _sig_out(sig):
    if sig is None:
        return None
    return [s if s != float("inf") else "inf" for s in sig]


COMMANDS = {
    "supersingular": cmd_supersingular,
    "spans": cmd_spans,
    "signatures": cmd_signatures,
    "diagonal": cmd_diagonal,
    "table": cmd_table,
    "replay": cmd_replay,
}


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (DomainError, SearchError, LocalFieldError, ValueError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Search for vanishing K/K-symbols of every signature over the six spans.

For a supersingular pair (lam, mu) the candidate abscissae x0 run through the
truncated Laurent series ``B``; each x0 with F(x0) a square gives a point
P = (x0, sqrt(F(x0))) and the symbol {sigma1(P), sigma2(P)} vanishes modulo p.
A pair succeeds once the symbols found cover every signature in {1..e}^2.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator

from .elliptic import INF, LegendreCurve, is_supersingular_deuring, supersingular_lambdas
from .localfield import DEFAULT_PRECISION, FieldDesc, LocalElement, PrecisionError, lf_sqrt
from .scholten import SpanRow, build_spans, sigma_maps

__all__ = [
    "PairResult",
    "SearchConfig",
    "TableRow",
    "candidate_order",
    "is_success",
    "quadratic_point",
    "replay_result",
    "run_pair",
    "run_table",
    "symbol_signature",
]

log = logging.getLogger(__name__)

SCHEMA = 1
CSV_HEADER = ["p", "ext", "lambda", "mu", "success", "n_signatures", "candidates_examined", "exhausted"]
MAX_DOUBLINGS = 2
ENGINES = ("reference", "compiled")
CHUNK = 1 << 15


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    budget: int = 0
    rows: tuple[int, ...] | None = None
    precision: int = DEFAULT_PRECISION
    jobs: int = 1
    early_exit: bool = True
    engine: str = "reference"

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise SearchError(f"engine must be one of {', '.join(ENGINES)}")

    def key(self) -> dict:
        # parallelism and engine never change results, so they stay out of the cache key
        return {
            "budget": self.budget,
            "rows": list(self.rows) if self.rows else None,
            "precision": self.precision,
            "early_exit": self.early_exit,
        }

    def hash(self) -> str:
        blob = json.dumps(self.key(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def _sig_key(sig) -> str:
    return ",".join("inf" if s == INF else str(s) for s in sig)


def _sig_from_key(key: str) -> tuple:
    return tuple(INF if s == "inf" else int(s) for s in key.split(","))


@dataclass
class Witness:
    row: int
    x0_digits: tuple[int, ...]
    point: dict

    def to_json(self) -> dict:
        return {"row": self.row, "x0": list(self.x0_digits), "point": self.point}


@dataclass
class PairResult:
    p: int
    ext: str
    e: int
    lam: int
    mu: int
    signatures_found: list[tuple[int, int]] = field(default_factory=list)
    witnesses: dict[str, Witness] = field(default_factory=dict)
    tally: dict[str, int] = field(default_factory=dict)
    candidates_examined: int = 0
    points_generated: int = 0
    rows_used: list[int] = field(default_factory=list)
    success: bool = False
    exhausted: bool = False
    config: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "p": self.p,
            "ext": self.ext,
            "e": self.e,
            "lambda": self.lam,
            "mu": self.mu,
            "lift": {"lambda": self.lam, "mu": self.mu, "rule": "least nonnegative representative"},
            "includes_valuation_zero": True,
            "signatures_found": [list(s) for s in self.signatures_found],
            "witnesses": {k: w.to_json() for k, w in self.witnesses.items()},
            "tally": dict(self.tally),
            "candidates_examined": self.candidates_examined,
            "points_generated": self.points_generated,
            "rows_used": self.rows_used,
            "success": self.success,
            "exhausted": self.exhausted,
            "config": self.config,
        }

    @classmethod
    def from_json(cls, obj: dict) -> PairResult:
        if obj.get("schema") != SCHEMA:
            raise SearchError(f"unsupported schema {obj.get('schema')!r}")
        return cls(
            p=obj["p"],
            ext=obj["ext"],
            e=obj["e"],
            lam=obj["lambda"],
            mu=obj["mu"],
            signatures_found=[tuple(s) for s in obj["signatures_found"]],
            witnesses={k: Witness(w["row"], tuple(w["x0"]), w["point"]) for k, w in obj["witnesses"].items()},
            tally=dict(obj["tally"]),
            candidates_examined=obj["candidates_examined"],
            points_generated=obj["points_generated"],
            rows_used=list(obj["rows_used"]),
            success=obj["success"],
            exhausted=obj["exhausted"],
            config=dict(obj["config"]),
        )

    def csv_row(self) -> list:
        return [
            self.p,
            self.ext,
            self.lam,
            self.mu,
            int(self.success),
            len(self.signatures_found),
            self.candidates_examined,
            int(self.exhausted),
        ]


@dataclass
class TableRow:
    p: int
    ext: str
    successes: int
    total: int

    @property
    def rate(self) -> float:
        return self.successes / self.total if self.total else 0.0

    def __str__(self) -> str:
        return f"p={self.p} ext={self.ext}: {self.successes}/{self.total} = {100 * self.rate:.2f}%"

    def to_json(self) -> dict:
        return {"schema": SCHEMA, **asdict(self), "rate": self.rate}


# -- candidates -----------------------------------------------------------


def _valuation_class(fd: FieldDesc, k: int) -> Iterator[tuple[int, ...]]:
    """Digit vectors (c_-e..c_e) whose first nonzero digit sits at pi^k, lexicographic."""
    e, p = fd.e, fd.p
    lead = (0,) * (k + e)
    tail = e - k
    for c in range(1, p):
        for rest in itertools.product(range(p), repeat=tail):
            yield lead + (c,) + rest


def candidate_order(fd: FieldDesc) -> Iterator[tuple[int, ...]]:
    """0 first, then valuation classes -e..e visited round-robin, each lexicographic."""
    yield (0,) * (2 * fd.e + 1)
    gens = [_valuation_class(fd, k) for k in range(-fd.e, fd.e + 1)]
    while gens:
        alive = []
        for g in gens:
            item = next(g, None)
            if item is not None:
                yield item
                alive.append(g)
        gens = alive


def x0_from_digits(fd: FieldDesc, digits) -> LocalElement:
    return fd.from_digits(list(digits), -fd.e)


# -- per-candidate work ------------------------------------------------------


def quadratic_point(row: SpanRow, x0: LocalElement) -> tuple[LocalElement, LocalElement] | None:
    y = lf_sqrt(row.F(x0))
    if y is None:
        return None
    return (x0, y)


def symbol_signature(row: SpanRow, P: tuple) -> tuple:
    E1, E2 = row.curves
    P1, P2 = sigma_maps(row, P, check=False)
    return (E1.signature_class(P1), E2.signature_class(P2))


class _PairContext:
    """Spans for one (lam, mu) at a given precision, with lazily built finer copies."""

    def __init__(self, lam: int, mu: int, fd: FieldDesc, row_filter=None):
        self.lam, self.mu, self.field = lam, mu, fd
        self.row_filter = row_filter
        self.rows = [r for r in build_spans(fd(lam), fd(mu)) if r.nondegenerate]
        if row_filter:
            self.rows = [r for r in self.rows if r.index in row_filter]
        self.curves = (LegendreCurve(fd(lam)), LegendreCurve(fd(mu)))
        self._finer = None

    def finer(self) -> _PairContext:
        if self._finer is None:
            self._finer = _PairContext(self.lam, self.mu, self.field.with_precision(2 * self.field.precision), self.row_filter)
        return self._finer

    def row(self, index: int) -> SpanRow:
        return next(r for r in self.rows if r.index == index)

    def evaluate(self, row_index: int, digits, doublings: int = 0):
        """(point, signature) for x0 given by ``digits`` on a row, or None if F(x0) is not a square."""
        row = self.row(row_index)
        x0 = x0_from_digits(self.field, digits)
        P = quadratic_point(row, x0)
        if P is None:
            return None
        E1, E2 = self.curves
        try:
            P1, P2 = sigma_maps(row, P, check=False)
            sig = (E1.signature_class(P1), E2.signature_class(P2))
        except PrecisionError:
            if doublings >= MAX_DOUBLINGS:
                raise
            return self.finer().evaluate(row_index, digits, doublings + 1)
        return P, sig


# -- pair and table drivers ------------------------------------------------


def target_signatures(e: int) -> set[tuple[int, int]]:
    return {(i, j) for i in range(1, e + 1) for j in range(1, e + 1)}


def is_success(result: PairResult, e: int | None = None) -> bool:
    e = result.e if e is None else e
    return target_signatures(e) <= {tuple(s) for s in result.signatures_found}


def _check_pair(lam: int, mu: int, fd: FieldDesc) -> None:
    p = fd.p
    if not fd.e < p - 1:
        raise SearchError("precondition: requires e < p - 1")
    for name, x in (("lambda", lam), ("mu", mu)):
        if x % p in (0, 1) or not is_supersingular_deuring(x, p):
            raise SearchError(f"precondition: {name}={x} is not a supersingular Legendre parameter mod {p}")


def _scan_reference(ctx: _PairContext, limit: int, early_exit: bool):
    fd = ctx.field
    targets = target_signatures(fd.e)
    found: dict[tuple, Witness] = {}
    tally: dict[str, int] = {}
    examined = points = 0
    for digits in candidate_order(fd):
        if examined >= limit:
            break
        examined += 1
        if not any(digits):
            continue  # sigma2 is undefined at x0 = 0
        for row in ctx.rows:
            out = ctx.evaluate(row.index, digits)
            if out is None:
                continue
            P, sig = out
            points += 1
            key = _sig_key(sig)
            tally[key] = tally.get(key, 0) + 1
            if INF not in sig and sig not in found:
                found[sig] = _witness(row.index, digits, P)
        if early_exit and targets <= found.keys():
            break
    return examined, found, tally, points


def _witness(row: int, digits, P) -> Witness:
    return Witness(row, tuple(int(d) for d in digits), {"x": P[0].to_json(), "y": P[1].to_json()})


def _scan_compiled(ctx: _PairContext, limit: int, early_exit: bool):
    """Same scan as the reference, with candidates evaluated in compiled chunks.

    Undecided cells are resolved by the reference path and every recorded
    witness is recomputed by it, so reported signatures never rest on the kernel alone.
    """
    import numpy as np

    from . import fastkernel as fk

    if not fk.available():
        raise SearchError("the compiled engine needs numba")
    fd = ctx.field
    e, p = fd.e, fd.p
    rows = [r.index for r in ctx.rows]
    kernel = fk.FastPair(ctx.lam, ctx.mu, fd, rows)
    targets = {fk.encode(s, e) for s in target_signatures(e)}
    ncodes = (e + 1) ** 2
    finite = [c for c in range(ncodes) if INF not in fk.decode(c, e)]
    found: dict[tuple, Witness] = {}
    counts = np.zeros(ncodes, dtype=np.int64)
    examined = 0
    while examined < limit:
        stop = min(limit, examined + CHUNK)
        digits = fk.order_digits(p, e, examined, stop)
        codes = kernel.evaluate(digits)
        if examined == 0:
            codes[0, :] = fk.NO_POINT  # sigma2 is undefined at x0 = 0
        for i, k in zip(*np.nonzero(codes == fk.UNDECIDED)):
            out = ctx.evaluate(rows[k], tuple(int(d) for d in digits[i]))
            codes[i, k] = fk.NO_POINT if out is None else fk.encode(out[1], e)
        n = len(digits)
        if early_exit:
            have = {fk.encode(s, e) for s in found}
            firsts = [_first_row(codes, c) for c in targets - have]
            if all(f is not None for f in firsts):
                n = max(firsts, default=-1) + 1
                codes = codes[:n]
        flat = codes.ravel()
        counts += np.bincount(flat[flat >= 0], minlength=ncodes)
        for c in finite:
            sig = fk.decode(c, e)
            if sig in found:
                continue
            i = _first_row(codes, c)
            if i is None:
                continue
            k = int((codes[i] == c).argmax())
            d = tuple(int(x) for x in digits[i])
            out = ctx.evaluate(rows[k], d)
            if out is None or out[1] != sig:
                raise SearchError(f"compiled engine disagrees with the reference at x0 digits {d}, row {rows[k]}")
            found[sig] = _witness(rows[k], d, out[0])
        examined += n
        if early_exit and all(fk.decode(c, e) in found for c in targets):
            break
    tally = {_sig_key(fk.decode(c, e)): int(counts[c]) for c in range(ncodes) if counts[c]}
    return examined, found, tally, int(counts.sum())


def _first_row(codes, code: int):
    hit = (codes == code).any(axis=1)
    if not hit.any():
        return None
    return int(hit.argmax())


def run_pair(lam: int, mu: int, fd: FieldDesc, cfg: SearchConfig = SearchConfig()) -> PairResult:
    lam %= fd.p
    mu %= fd.p
    _check_pair(lam, mu, fd)
    fd = fd.with_precision(cfg.precision)
    total = fd.p ** (2 * fd.e + 1)
    if cfg.budget < 0 or cfg.budget > total:
        raise SearchError(f"budget must lie in [0, {total}]")
    ctx = _PairContext(lam, mu, fd, cfg.rows)
    result = PairResult(fd.p, fd.ext, fd.e, lam, mu, rows_used=[r.index for r in ctx.rows], config=cfg.key())
    limit = cfg.budget or total
    scan = _scan_compiled if cfg.engine == "compiled" else _scan_reference
    examined, found, tally, result.points_generated = scan(ctx, limit, cfg.early_exit)
    result.candidates_examined = examined
    result.exhausted = examined == total
    result.signatures_found = sorted(found)
    result.witnesses = {_sig_key(s): found[s] for s in sorted(found)}
    result.tally = dict(sorted(tally.items()))
    result.success = is_success(result)
    return result


def field_for(p: int, ext: str, precision: int = DEFAULT_PRECISION) -> FieldDesc:
    if ext not in ("+", "-"):
        raise SearchError("extension must be '+' or '-'")
    return FieldDesc(p, 2, 1 if ext == "+" else -1, precision)


def ext_tag(ext: str) -> str:
    return "plus" if ext == "+" else "minus"


def cache_path(cache_dir: Path, p: int, ext: str, lam: int, mu: int, cfg: SearchConfig) -> Path:
    return Path(cache_dir) / cfg.hash() / f"p{p}_{ext_tag(ext)}_{lam}_{mu}.json"


def _run_pair_task(args) -> dict:
    lam, mu, p, ext, cfg = args
    return run_pair(lam, mu, field_for(p, ext, cfg.precision), cfg).to_json()


def run_table(
    p: int,
    ext: str,
    cfg: SearchConfig = SearchConfig(),
    cache_dir: str | os.PathLike | None = None,
    progress=None,
) -> tuple[TableRow, list[PairResult]]:
    if p % 4 != 3:
        raise SearchError("precondition: table runs require p = 3 mod 4")
    field_for(p, ext, cfg.precision)
    lams = supersingular_lambdas(p)
    pairs = [(lam, mu) for lam in lams for mu in lams]
    results: dict[tuple[int, int], PairResult] = {}
    todo = []
    for lam, mu in pairs:
        if cache_dir is not None:
            path = cache_path(Path(cache_dir), p, ext, lam, mu, cfg)
            if path.exists():
                results[(lam, mu)] = PairResult.from_json(json.loads(path.read_text()))
                continue
        todo.append((lam, mu, p, ext, cfg))

    def store(obj: dict) -> None:
        res = PairResult.from_json(obj)
        results[(res.lam, res.mu)] = res
        if cache_dir is not None:
            path = cache_path(Path(cache_dir), p, ext, res.lam, res.mu, cfg)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(obj, indent=1, sort_keys=True))
        if progress is not None:
            progress(res)

    if cfg.jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for obj in pool.map(_run_pair_task, todo):
                store(obj)
    else:
        for task in todo:
            store(_run_pair_task(task))
    ordered = [results[pair] for pair in pairs]
    row = TableRow(p, ext, sum(r.success for r in ordered), len(ordered))
    return row, ordered


def table_csv(results: list[PairResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for res in results:
        writer.writerow(res.csv_row())
    return buf.getvalue()


def replay_result(result: PairResult, factor: int = 2) -> list[tuple[str, tuple, bool]]:
    """Recompute every witness from scratch at ``factor`` times the recorded precision."""
    precision = result.config.get("precision", DEFAULT_PRECISION) * factor
    fd = field_for(result.p, result.ext, precision)
    ctx = _PairContext(result.lam, result.mu, fd)
    report = []
    for key, w in result.witnesses.items():
        expected = _sig_from_key(key)
        out = ctx.evaluate(w.row, w.x0_digits)
        got = None if out is None else out[1]
        report.append((key, got, got == expected))
    return report

"""Sweep |a| <= A: classify each surface, attach s_a(K) and gamma(a), emit CSV or JSON.

Work is split into static chunks of consecutive a and merged by a, so the
output does not depend on the number of workers. Rows whose arithmetic hits an
enumeration budget keep their classification and record the error instead of
aborting the sweep.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import BudgetExceeded
from .arith import is_prime
from .markoff import FailureCandidate, NotAdmissible, Solvable, has_integral_point, is_admissible, search_bound
from .singular import gamma, s_a

CHUNK = 4096
MAX_A = 10**7
CSV_HEADER = ["a", "admissible", "class", "witness_x", "witness_y", "witness_z", "s_aK", "gamma", "in_prime_family", "search_bound"]

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET = 0, 2, 3


@dataclass
class CensusRecord:
    a: int
    admissible: bool
    classification: str
    witness: tuple[int, int, int] | None
    s_aK: Fraction | None
    gamma: float | None
    in_prime_family: bool | None
    search_bound: int
    error: str | None = None

    def csv_row(self) -> list[str]:
        w = self.witness or ("", "", "")
        return [
            str(self.a),
            "true" if self.admissible else "false",
            self.classification,
            *(str(v) for v in w),
            render_decimal(self.s_aK),
            "" if self.gamma is None else f"{self.gamma:.12g}",
            "" if self.in_prime_family is None else ("true" if self.in_prime_family else "false"),
            str(self.search_bound),
        ]

    def to_json(self) -> dict:
        out = asdict(self)
        out["witness"] = list(self.witness) if self.witness else None
        out["s_aK"] = render_decimal(self.s_aK) if self.s_aK is not None else None
        out["s_aK_exact"] = str(self.s_aK) if self.s_aK is not None else None
        return out


@dataclass
class CensusSummary:
    A: int
    K: int
    eta: float
    counts: dict[str, int]
    admissible_fraction: float
    failure_candidates: int
    small_value_count: int
    budget_failures: int
    wall_time: float
    extra: dict = field(default_factory=dict)


def render_decimal(x: Fraction | None) -> str:
    """12 significant digits, fixed across platforms."""
    if x is None:
        return ""
    return f"{float(x):.12g}"


def in_prime_family(a: int, c: int) -> bool:
    """a = p + c for a rational prime p (of either sign)."""
    return is_prime(abs(a - c))


def _classify(a: int, K: int, C_search: float, shift_c: int | None) -> CensusRecord:
    cls = has_integral_point(a, C_search)
    witness = cls.witness if isinstance(cls, Solvable) else None
    bound = cls.searched_bound if isinstance(cls, FailureCandidate) else search_bound(a, C_search)
    fam = None if shift_c is None else in_prime_family(a, shift_c)
    rec = CensusRecord(a, is_admissible(a), cls.kind, witness, None, None, fam, bound)
    try:
        rec.s_aK = s_a(a, K)
        if a != 0:
            g = gamma(a)
            rec.gamma = g.value if g.converged else None
    except BudgetExceeded as exc:
        rec.error = f"budget: {exc}"
    return rec


def _run_chunk(args) -> list[CensusRecord]:
    lo, hi, K, C_search, shift_c = args
    return [_classify(a, K, C_search, shift_c) for a in range(lo, hi)]


def _chunks(A: int, K: int, C_search: float, shift_c: int | None):
    for lo in range(-A, A + 1, CHUNK):
        yield (lo, min(lo + CHUNK, A + 1), K, C_search, shift_c)


def run_census(
    A: int,
    K: int,
    eta: float = 0.1,
    C_search: float = 3.0,
    shift_c: int | None = None,
    workers: int = 1,
) -> tuple[list[CensusRecord], CensusSummary]:
    """One record per a in [-A, A], sorted by a."""
    _validate(A, K, eta, C_search, workers)
    start = time.perf_counter()
    tasks = list(_chunks(A, K, C_search, shift_c))
    if workers == 1:
        parts = [_run_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    records = sorted((r for part in parts for r in part), key=lambda r: r.a)
    counts = {k: 0 for k in ("not_admissible", "solvable", "failure_candidate")}
    for r in records:
        counts[r.classification] += 1
    eta_q = Fraction(eta)
    small = sum(1 for r in records if r.admissible and r.s_aK is not None and abs(r.s_aK) <= eta_q)
    summary = CensusSummary(
        A=A,
        K=K,
        eta=eta,
        counts=counts,
        admissible_fraction=(len(records) - counts["not_admissible"]) / len(records),
        failure_candidates=counts["failure_candidate"],
        small_value_count=small,
        budget_failures=sum(1 for r in records if r.error),
        wall_time=time.perf_counter() - start,
    )
    return records, summary


def _validate(A, K, eta, C_search, workers) -> None:
    if not isinstance(A, int) or A < 0 or A > MAX_A:
        raise ValueError(f"A must be an integer in [0, {MAX_A}]")
    if not isinstance(K, int) or K < 1:
        raise ValueError("K must be a positive integer")
    if not eta >= 0:
        raise ValueError("eta must be non-negative")
    if not C_search > 0:
        raise ValueError("search multiplier must be positive")
    if workers < 1:
        raise ValueError("workers must be at least 1")


def summarize_growth(records: Sequence[CensusRecord], checkpoints: Iterable[int]) -> list[dict]:
    """Failure-candidate counts E_cand(A') with the ratios E/sqrt(A') and E (log A')^2 / A'."""
    if not records:
        return []
    reach = min(max(r.a for r in records), -min(r.a for r in records))
    rows = []
    for Ap in sorted(checkpoints):
        if Ap > reach:
            raise ValueError(f"records do not cover |a| <= {Ap}")
        E = sum(1 for r in records if abs(r.a) <= Ap and r.classification == "failure_candidate")
        rows.append(
            {
                "A": Ap,
                "E_cand": E,
                "E_over_sqrtA": E / math.sqrt(Ap) if Ap > 0 else math.nan,
                "E_log2_over_A": E * math.log(Ap) ** 2 / Ap if Ap > 1 else math.nan,
            }
        )
    return rows


def correlate_small_values(records: Sequence[CensusRecord], K: int, eta: float) -> dict:
    """Membership in the small-value set {admissible a : |s_a(K)| <= eta} against classification."""
    eta_q = Fraction(eta)
    table = {(inside, kind): 0 for inside in (True, False) for kind in ("solvable", "failure_candidate")}
    A = max((abs(r.a) for r in records), default=0)
    for r in records:
        if not r.admissible:
            continue
        s = r.s_aK if r.s_aK is not None else s_a(r.a, K)
        table[(abs(s) <= eta_q, r.classification)] += 1
    size = table[(True, "solvable")] + table[(True, "failure_candidate")]
    cand = table[(True, "failure_candidate")] + table[(False, "failure_candidate")]
    return {
        "K": K,
        "eta": eta,
        "contingency": {f"{'in' if k[0] else 'out'}:{k[1]}": v for k, v in table.items()},
        "small_set_size": size,
        "small_set_over_A": size / A if A else math.nan,
        "candidates_in_small_set": table[(True, "failure_candidate")] / cand if cand else math.nan,
    }


def records_to_csv(records: Sequence[CensusRecord]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    for r in records:
        wr.writerow(r.csv_row())
    return buf.getvalue()


def records_to_json(records: Sequence[CensusRecord], summary: CensusSummary) -> str:
    return json.dumps({"records": [r.to_json() for r in records], "summary": asdict(summary)}, indent=1)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="census", description="Census of integral points on x^2 + y^2 + z^2 - xyz = a.")
    ap.add_argument("--A", type=int, required=True, help="sweep |a| <= A")
    ap.add_argument("--K", type=int, default=30, help="truncation of the singular series")
    ap.add_argument("--eta", type=float, default=0.1, help="small-value threshold for |s_a(K)|")
    ap.add_argument("--search-mult", type=float, default=3.0, help="search bound multiplier C in C sqrt(1 + |a|)")
    ap.add_argument("--shift-c", type=int, default=None, help="flag rows with a = p + c, p prime")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="-", help="output path, '-' for stdout")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        records, summary = run_census(args.A, args.K, args.eta, args.search_mult, args.shift_c, args.workers)
    except ValueError as exc:
        print(f"census: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = records_to_csv(records) if args.format == "csv" else records_to_json(records, summary)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    print(
        f"census: {len(records)} rows, {summary.failure_candidates} failure candidates, "
        f"{summary.budget_failures} budget failures, {summary.wall_time:.1f}s",
        file=sys.stderr,
    )
    if summary.budget_failures > 0.01 * len(records):
        return EXIT_BUDGET
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest

from markoff_lab.census import (
    CSV_HEADER,
    EXIT_CONFIG,
    EXIT_OK,
    correlate_small_values,
    in_prime_family,
    main,
    records_to_csv,
    records_to_json,
    run_census,
    summarize_growth,
)
from markoff_lab.markoff import box_has_point, is_admissible, markoff
from markoff_lab.singular import s_a


@pytest.fixture(scope="module")
def census1000():
    return run_census(1000, 6, eta=0.1)


def test_small_census_rows():
    records, summary = run_census(10, 1)
    assert [r.a for r in records] == list(range(-10, 11))
    for r in records:
        assert r.admissible == is_admissible(r.a)
        if not r.admissible:
            assert r.classification == "not_admissible"
        assert (r.witness is not None) == (r.classification == "solvable")
        assert r.s_aK == 1
    assert sum(summary.counts.values()) == 21


def test_admissible_fraction_on_full_windows():
    records, _ = run_census(90, 1)  # 181 rows hold five complete windows of length 36
    window = [r for r in records if -90 <= r.a < -90 + 36 * 5]
    assert sum(r.admissible for r in window) == 21 * 5
    assert Fraction(sum(r.admissible for r in window), len(window)) == Fraction(7, 12)


def test_invariants_and_witnesses(census1000):
    records, summary = census1000
    assert len(records) == 2001
    assert sum(summary.counts.values()) == 2001
    assert summary.failure_candidates == summary.counts["failure_candidate"]
    for r in records:
        if r.witness is not None:
            assert markoff(r.witness) == r.a
        if r.classification == "not_admissible":
            assert not r.admissible and r.gamma in (None, 0.0)


def test_failure_candidates_have_no_small_point(census1000):
    records, _ = census1000
    cands = [r.a for r in records if r.classification == "failure_candidate"]
    assert cands
    for a in cands:
        assert not box_has_point(a, 1000)


def test_csv_header_and_rendering(census1000):
    records, _ = census1000
    text = records_to_csv(records[:50])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == CSV_HEADER
    assert ",".join(rows[0]) == "a,admissible,class,witness_x,witness_y,witness_z,s_aK,gamma,in_prime_family,search_bound"
    assert len(rows) == 51
    r0 = records[0]
    assert rows[1][6] == f"{float(r0.s_aK):.12g}"


def test_determinism_across_workers():
    one, _ = run_census(300, 4, workers=1)
    two, _ = run_census(300, 4, workers=2)
    assert records_to_csv(one) == records_to_csv(two)


def test_json_output(census1000):
    records, summary = census1000
    data = json.loads(records_to_json(records[:5], summary))
    assert set(data) == {"records", "summary"}
    rec = data["records"][0]
    assert Fraction(rec["s_aK_exact"]) == records[0].s_aK
    assert data["summary"]["failure_candidates"] == summary.failure_candidates


def test_prime_family_matches_sieve():
    N = 10**6
    c = -1
    sieve = np.ones(N + 2, dtype=bool)
    sieve[:2] = False
    for p in range(2, int((N + 1) ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    rng = np.random.default_rng(5)
    sample = np.concatenate([np.arange(-2000, 2001), rng.integers(-N, N + 1, 20000)])
    for a in sample.tolist():
        assert in_prime_family(a, c) == bool(sieve[abs(a - c)])
    recs, _ = run_census(20, 1, shift_c=c)
    assert all(r.in_prime_family == in_prime_family(r.a, c) for r in recs)
    assert all(r.in_prime_family is None for r in run_census(5, 1)[0])


def test_summarize_growth(census1000):
    assert summarize_growth([], [10]) == []
    records, _ = census1000
    rows = summarize_growth(records, [100, 400, 1000])
    assert [r["A"] for r in rows] == [100, 400, 1000]
    assert rows[0]["E_cand"] <= rows[1]["E_cand"] <= rows[2]["E_cand"]
    assert rows[2]["E_cand"] == sum(r.classification == "failure_candidate" for r in records)
    with pytest.raises(ValueError):
        summarize_growth(records, [5000])


def test_correlate_small_values(census1000):
    records, _ = census1000
    admissible = [r for r in records if r.admissible]
    rep = correlate_small_values(records, 6, 1e9)
    assert rep["small_set_size"] == len(admissible)
    assert rep["contingency"]["out:solvable"] == rep["contingency"]["out:failure_candidate"] == 0
    zero = correlate_small_values(records, 6, 0)
    assert zero["small_set_size"] == sum(1 for r in admissible if s_a(r.a, 6) == 0)
    rep = correlate_small_values(records, 6, 0.1)
    assert 0 <= rep["candidates_in_small_set"] <= 1


def test_cli(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["--A", "30", "--K", "4", "--out", str(out)]) == EXIT_OK
    assert out.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    assert len(out.read_text().splitlines()) == 62
    js = tmp_path / "c.json"
    assert main(["--A", "5", "--format", "json", "--shift-c", "2", "--out", str(js)]) == EXIT_OK
    assert "summary" in json.loads(js.read_text())
    assert main(["--A", "-3"]) == EXIT_CONFIG
    assert main(["--A", "10", "--K", "0"]) == EXIT_CONFIG
    assert main(["--A", "10", "--workers", "0"]) == EXIT_CONFIG
    assert main(["--bogus"]) == EXIT_CONFIG
    assert main(["--A", "3", "--out", "-"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("a,admissible")

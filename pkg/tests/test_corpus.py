import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from c3index.corpus import (
    CorpusError,
    PaperRecord,
    filter_corpus,
    filter_report,
    parse_records,
    snapshot,
)
from c3index.synthgen import CorruptionSpec, GeneratorParams, corrupt, generate

from conftest import make_corpus


def line(pid, year=2000, venue="V", authors=("a",), refs=()):
    return json.dumps({"id": pid, "year": year, "venue": venue, "authors": list(authors), "references": list(refs)}) + "\n"


def test_parse_empty_stream():
    assert len(parse_records(io.StringIO(""))) == 0


def test_parse_three_lines():
    c = parse_records([line("A"), line("B"), line("C", refs=["A"])])
    assert sorted(c.papers) == ["A", "B", "C"]
    assert c.papers["C"].references == ("A",)


def test_parse_duplicate_id_names_it():
    with pytest.raises(CorpusError, match="'B'"):
        parse_records([line("A"), line("B"), line("B")])


@pytest.mark.parametrize(
    "bad",
    ["{not json", '["list"]', '{"year": 2000}', '{"id": "X", "year": "2000"}', '{"id": "X", "authors": "a"}'],
)
def test_parse_malformed_reports_line_number(bad):
    with pytest.raises(CorpusError, match="line 2"):
        parse_records([line("A"), bad + "\n"])


def test_parse_tolerates_null_fields():
    c = parse_records(['{"id": "X", "year": null, "venue": null, "authors": [], "references": []}\n'])
    rec = c.papers["X"]
    assert rec.year is None and rec.venue is None and rec.authors == ()


def test_forward_citation_then_isolated():
    c = make_corpus([("A", 2000, ["a"], ["B"]), ("B", 2005, ["b"], [])])
    out, rep = filter_corpus(c, 1950, 2012)
    assert rep.forward_citations_removed == 1
    assert rep.isolated_papers_removed == 2
    assert len(out) == 0
    assert rep.surviving_papers == rep.input_papers - rep.dropped_papers


def test_minimal_valid_pair_survives():
    c = make_corpus([("A", 2000, ["a"], ["B"]), ("B", 1990, ["b"], [])])
    out, rep = filter_corpus(c, 1950, 2012)
    assert sorted(out.papers) == ["A", "B"]
    assert rep.dropped_papers == 0


def test_same_year_citation_kept():
    c = make_corpus([("A", 2000, ["a"], ["B"]), ("B", 2000, ["b"], [])])
    out, rep = filter_corpus(c, 1950, 2012)
    assert rep.forward_citations_removed == 0 and len(out) == 2


def test_first_reason_attribution():
    c = parse_records(
        [
            '{"id": "X", "year": 2000, "venue": null, "authors": [], "references": []}\n',
            '{"id": "Y", "year": 2000, "venue": "V", "authors": [], "references": []}\n',
        ]
    )
    _, rep = filter_corpus(c, 1950, 2012)
    assert rep.missing_venue == 1 and rep.missing_authors == 1


def test_keep_missing_venue_flag():
    c = parse_records(
        [
            '{"id": "X", "year": 2000, "venue": null, "authors": ["a"], "references": ["Y"]}\n',
            '{"id": "Y", "year": 1999, "venue": "V", "authors": ["b"], "references": []}\n',
        ]
    )
    out, rep = filter_corpus(c, 1950, 2012, keep_missing_venue=True)
    assert rep.missing_venue == 0 and len(out) == 2


def test_isolation_fixpoint_cascades():
    # Y's only link is to X, which is dropped for being outside the window; Y then becomes isolated
    c = make_corpus([("X", 1900, ["a"], []), ("Y", 2000, ["b"], ["X"]), ("Z", 2001, ["c"], ["W"]), ("W", 2000, ["d"], [])])
    out, rep = filter_corpus(c, 1950, 2012)
    assert rep.outside_year_window == 1
    assert rep.dangling_references_removed == 1
    assert rep.isolated_papers_removed == 1
    assert sorted(out.papers) == ["W", "Z"]


def test_self_reference_removed():
    c = make_corpus([("A", 2000, ["a"], ["A", "B"]), ("B", 1999, ["b"], [])])
    out, rep = filter_corpus(c, 1950, 2012)
    assert rep.self_references_removed == 1
    assert out.papers["A"].references == ("B",)


def test_dangling_count_on_constructed_fixture():
    rows = [(f"P{i}", 2000 + i, [f"a{i}"], [f"P{i-1}"] if i else []) for i in range(10)]
    rows[3] = ("P3", 2003, ["a3"], ["P2", "ghost1"])
    rows[7] = ("P7", 2007, ["a7"], ["P6", "ghost2"])
    _, rep = filter_corpus(make_corpus(rows), 1950, 2012)
    assert rep.dangling_references_removed == 2
    assert "Dangling references removed,2,--" in filter_report(rep)


def test_filter_report_layout():
    c = make_corpus([("A", 2000, ["a", "b"], ["B"]), ("B", 1990, ["b", "c"], [])])
    _, rep = filter_corpus(c, 1950, 2012)
    text = filter_report(rep)
    lines = text.split("\n")
    assert lines[0] == "quantity,raw,filtered"
    assert "Number of valid papers,2,2" in lines
    assert "Sum of weights - coauthorship edges,--,2" in lines
    assert "Number of coauthorship edges,--,2" in lines
    # (A,B) shares author b: a self-citation, so no author-citation edges
    assert "Sum of weights - author citation edges,--,0" in lines
    assert text.endswith("\n") and "\r" not in text


def test_snapshot_noop_beyond_max_year():
    c, _ = filter_corpus(make_corpus([("A", 2000, ["a"], ["B"]), ("B", 1990, ["b"], [])]), 1950, 2012)
    assert snapshot(c, 2010) is c


def test_snapshot_strict_cut():
    c, _ = filter_corpus(
        make_corpus([("A", 1990, ["a"], ["B"]), ("B", 1990, ["b"], []), ("C", 2000, ["c"], ["A"])]), 1950, 2012
    )
    s = snapshot(c, 1995)
    assert sorted(s.papers) == ["A", "B"]
    assert s.papers["A"].references == ("B",)


def test_snapshot_drops_author_of_stranded_paper():
    # chain C(2000) -> B(1995) -> A(1990); at 1992 A is alone and isolated
    c, _ = filter_corpus(
        make_corpus([("A", 1990, ["x"], []), ("B", 1995, ["y"], ["A"]), ("C", 2000, ["z"], ["B"])]), 1950, 2012
    )
    assert len(snapshot(c, 1996)) == 2
    s = snapshot(c, 1992)
    assert len(s) == 0
    assert "x" not in s.authors and "x" not in s.first_pub_year


def _seeded(seed, n=300):
    raw = generate(GeneratorParams(seed=seed, n_papers=n, year_min=1990, year_max=2000))
    return filter_corpus(raw, 1950, 2012)[0]


def _edges(c):
    return {(p, r) for p, rec in c.papers.items() for r in rec.references}


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_filter_idempotent(seed):
    raw = parse_records(corrupt(generate(GeneratorParams(seed=seed, n_papers=150)), CorruptionSpec(seed, 2, 2, 2, 3, 3)))
    once, _ = filter_corpus(raw, 1950, 2012)
    twice, rep2 = filter_corpus(once, 1950, 2012)
    assert once.papers == twice.papers
    assert rep2.dropped_papers == 0
    assert rep2.forward_citations_removed == rep2.dangling_references_removed == 0


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.integers(1990, 2000), st.integers(0, 5))
def test_snapshot_monotone_and_composable(seed, y1, k):
    c = _seeded(seed)
    y2 = min(y1 + k, 2000)
    s1, s2 = snapshot(c, y1), snapshot(c, y2)
    assert set(s1.papers) <= set(s2.papers)
    assert _edges(s1) <= _edges(s2)
    assert snapshot(s2, y1).papers == s1.papers


def test_corpus_invariants_after_filter():
    c = _seeded(3)
    cited = {r for rec in c.papers.values() for r in rec.references}
    for pid, rec in c.papers.items():
        assert rec.authors
        assert pid not in rec.references
        assert rec.references or pid in cited
        for r in rec.references:
            assert c.papers[r].year <= rec.year


def test_write_round_trip():
    c = _seeded(5, n=50)
    buf = io.StringIO()
    c.write(buf)
    again = parse_records(io.StringIO(buf.getvalue()))
    assert again.papers == dict(c.papers)

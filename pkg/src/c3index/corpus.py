"""Publication records, the filtering pipeline and temporal snapshots.

Input is line-delimited JSON, one publication per line::

    {"id": "P1", "year": 1998, "venue": "VLDB", "authors": ["a1", "a2"], "references": ["P0"]}

``venue`` may be null; ``year`` may be null or absent (the record is then
dropped by :func:`filter_corpus`, not rejected by the parser).
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, fields
from typing import Iterable, Mapping, Optional, TextIO


class CorpusError(ValueError):
    """Raised for malformed or inconsistent record streams."""


@dataclass(frozen=True)
class PaperRecord:
    paper_id: str
    year: Optional[int]
    venue: Optional[str]
    authors: tuple[str, ...]
    references: tuple[str, ...]

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.paper_id,
                "year": self.year,
                "venue": self.venue,
                "authors": list(self.authors),
                "references": list(self.references),
            },
            ensure_ascii=False,
        )


@dataclass(frozen=True)
class Corpus:
    """Immutable collection of papers keyed by id.

    ``authors`` and ``first_pub_year`` are derived from ``papers`` on
    construction; records without a year do not contribute to
    ``first_pub_year``.
    """

    papers: Mapping[str, PaperRecord]
    authors: frozenset = field(init=False)
    first_pub_year: Mapping[str, int] = field(init=False)

    def __post_init__(self):
        authors = set()
        first = {}
        for rec in self.papers.values():
            authors.update(rec.authors)
            if rec.year is None:
                continue
            for a in rec.authors:
                if a not in first or rec.year < first[a]:
                    first[a] = rec.year
        object.__setattr__(self, "authors", frozenset(authors))
        object.__setattr__(self, "first_pub_year", first)

    def __len__(self):
        return len(self.papers)

    @property
    def n_citations(self) -> int:
        return sum(len(r.references) for r in self.papers.values())

    def year_range(self) -> tuple[int, int]:
        years = [r.year for r in self.papers.values() if r.year is not None]
        if not years:
            raise CorpusError("corpus has no dated papers")
        return min(years), max(years)

    def write(self, out: TextIO) -> None:
        """Write records in id order, in the same format :func:`parse_records` reads."""
        for pid in sorted(self.papers):
            out.write(self.papers[pid].to_json())
            out.write("\n")


@dataclass
class FilterReport:
    input_papers: int = 0
    missing_venue: int = 0
    missing_authors: int = 0
    missing_year: int = 0
    outside_year_window: int = 0
    self_references_removed: int = 0
    forward_citations_removed: int = 0
    dangling_references_removed: int = 0
    isolated_papers_removed: int = 0
    surviving_papers: int = 0
    surviving_authors: int = 0
    surviving_citation_edges: int = 0
    # raw-side descriptive statistics
    raw_authors: int = 0
    raw_venues: int = 0
    raw_author_paper_pairs: int = 0
    # filtered-side descriptive statistics, filled by filter_corpus
    filtered_venues: int = 0
    filtered_author_paper_pairs: int = 0
    coauthorship_edges: int = 0
    coauthorship_weight_sum: int = 0
    author_citation_edges: int = 0
    author_citation_weight_sum: int = 0

    @property
    def dropped_papers(self) -> int:
        return (
            self.missing_venue
            + self.missing_authors
            + self.missing_year
            + self.outside_year_window
            + self.isolated_papers_removed
        )


@dataclass(frozen=True)
class SnapshotSpec:
    cutoff_year: int


def _parse_line(obj, lineno: int) -> PaperRecord:
    if not isinstance(obj, dict):
        raise CorpusError(f"line {lineno}: expected a JSON object")
    pid = obj.get("id")
    if not isinstance(pid, str) or not pid:
        raise CorpusError(f"line {lineno}: missing or non-string 'id'")
    year = obj.get("year")
    if year is not None and (isinstance(year, bool) or not isinstance(year, int)):
        raise CorpusError(f"line {lineno}: 'year' must be an integer or null")
    venue = obj.get("venue")
    if venue is not None and not isinstance(venue, str):
        raise CorpusError(f"line {lineno}: 'venue' must be a string or null")
    authors = obj.get("authors") or []
    refs = obj.get("references") or []
    if not isinstance(authors, list) or not all(isinstance(a, str) for a in authors):
        raise CorpusError(f"line {lineno}: 'authors' must be a list of strings")
    if not isinstance(refs, list) or not all(isinstance(r, str) for r in refs):
        raise CorpusError(f"line {lineno}: 'references' must be a list of strings")
    # duplicates inside a record carry no information; keep first occurrence
    return PaperRecord(
        paper_id=pid,
        year=year,
        venue=venue if venue else None,
        authors=tuple(dict.fromkeys(a for a in authors if a)),
        references=tuple(dict.fromkeys(refs)),
    )


def parse_records(stream: Iterable[str]) -> Corpus:
    """Load every record of a line-delimited stream into an unfiltered corpus.

    Blank lines are skipped. Raises :class:`CorpusError` carrying the
    1-based line number for malformed lines, and naming the id for a
    repeated ``id``.
    """
    papers: dict[str, PaperRecord] = {}
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        rec = _parse_line(obj, lineno)
        if rec.paper_id in papers:
            raise CorpusError(f"line {lineno}: duplicate paper id {rec.paper_id!r}")
        papers[rec.paper_id] = rec
    return Corpus(papers)


def read_corpus(path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return parse_records(fh)


def _drop_isolated(papers: dict[str, PaperRecord]) -> int:
    """Remove papers with no in- or out-citation until none remain; returns count removed."""
    removed = 0
    while True:
        cited = set()
        for rec in papers.values():
            cited.update(rec.references)
        isolated = [pid for pid, rec in papers.items() if not rec.references and pid not in cited]
        if not isolated:
            return removed
        for pid in isolated:
            del papers[pid]
        removed += len(isolated)
        # references to removed papers cannot exist: an isolated paper has no citers


def filter_corpus(raw: Corpus, year_min: int, year_max: int, keep_missing_venue: bool = False):
    """Apply the cleaning pipeline and return ``(corpus, report)``.

    Steps, in order: drop papers missing venue, authors or year (each paper
    attributed to the first failing check), drop papers outside
    ``[year_min, year_max]``, strip self-references and forward citations
    (cited year strictly later than citing year), strip references to papers
    not in the corpus, then drop isolated papers until a fixpoint.
    """
    if year_min > year_max:
        raise ValueError(f"year_min {year_min} > year_max {year_max}")
    rep = FilterReport(input_papers=len(raw))
    rep.raw_authors = len(raw.authors)
    rep.raw_venues = len({r.venue for r in raw.papers.values() if r.venue})
    rep.raw_author_paper_pairs = sum(len(r.authors) for r in raw.papers.values())

    kept: dict[str, PaperRecord] = {}
    for pid, rec in raw.papers.items():
        if rec.venue is None and not keep_missing_venue:
            rep.missing_venue += 1
        elif not rec.authors:
            rep.missing_authors += 1
        elif rec.year is None:
            rep.missing_year += 1
        elif not year_min <= rec.year <= year_max:
            rep.outside_year_window += 1
        else:
            kept[pid] = rec

    for pid, rec in list(kept.items()):
        refs = []
        for ref in rec.references:
            if ref == pid:
                rep.self_references_removed += 1
                continue
            target = kept.get(ref)
            if target is None:
                rep.dangling_references_removed += 1
            elif target.year > rec.year:
                rep.forward_citations_removed += 1
            else:
                refs.append(ref)
        if len(refs) != len(rec.references):
            kept[pid] = PaperRecord(pid, rec.year, rec.venue, rec.authors, tuple(refs))

    rep.isolated_papers_removed = _drop_isolated(kept)
    out = Corpus(kept)
    _fill_filtered_stats(rep, out)
    return out, rep


def _fill_filtered_stats(rep: FilterReport, c: Corpus) -> None:
    from .netbuild import build_author_citation_layer, build_coauthorship_layer

    rep.surviving_papers = len(c)
    rep.surviving_authors = len(c.authors)
    rep.surviving_citation_edges = c.n_citations
    rep.filtered_venues = len({r.venue for r in c.papers.values() if r.venue})
    rep.filtered_author_paper_pairs = sum(len(r.authors) for r in c.papers.values())
    if len(c) == 0:
        return
    co = build_coauthorship_layer(c)
    ac = build_author_citation_layer(c)
    rep.coauthorship_edges = co.n_edges
    rep.coauthorship_weight_sum = co.weight_sum
    rep.author_citation_edges = ac.n_edges
    rep.author_citation_weight_sum = ac.weight_sum


def snapshot(c: Corpus, spec: SnapshotSpec | int) -> Corpus:
    """Restrict a filtered corpus to what existed by the end of the cutoff year.

    Papers published later, the citations they made, and authors whose first
    publication is later all disappear; papers left without any citation
    link are then removed as in filtering.
    """
    cutoff = spec.cutoff_year if isinstance(spec, SnapshotSpec) else int(spec)
    kept = {pid: rec for pid, rec in c.papers.items() if rec.year <= cutoff}
    if len(kept) == len(c.papers):
        return c
    for pid, rec in list(kept.items()):
        refs = tuple(r for r in rec.references if r in kept)
        if len(refs) != len(rec.references):
            kept[pid] = PaperRecord(pid, rec.year, rec.venue, rec.authors, refs)
    _drop_isolated(kept)
    return Corpus(kept)


_RAW_ONLY = "--"


def filter_report(report: FilterReport) -> str:
    """Render the report as a three-column CSV (quantity, raw, filtered)."""
    r = report
    valid_raw = r.input_papers
    rows = [
        ("Number of valid papers", valid_raw, r.surviving_papers),
        ("Number of papers with no venue", r.missing_venue, _RAW_ONLY),
        ("Number of papers with no author", r.missing_authors, _RAW_ONLY),
        ("Number of papers with no publication year", r.missing_year, _RAW_ONLY),
        ("Number of papers outside year window", r.outside_year_window, _RAW_ONLY),
        ("Self references removed", r.self_references_removed, _RAW_ONLY),
        ("Forward citations removed", r.forward_citations_removed, _RAW_ONLY),
        ("Dangling references removed", r.dangling_references_removed, _RAW_ONLY),
        ("Isolated papers removed", r.isolated_papers_removed, _RAW_ONLY),
        ("Number of authors", r.raw_authors, r.surviving_authors),
        (
            "Avg. number of papers per author",
            _ratio(r.raw_author_paper_pairs, r.raw_authors),
            _ratio(r.filtered_author_paper_pairs, r.surviving_authors),
        ),
        (
            "Avg. number of authors per paper",
            _ratio(r.raw_author_paper_pairs, r.input_papers),
            _ratio(r.filtered_author_paper_pairs, r.surviving_papers),
        ),
        ("Number of unique publication venues", r.raw_venues, r.filtered_venues),
        ("Number of paper-paper citation edges", _RAW_ONLY, r.surviving_citation_edges),
        ("Number of coauthorship edges", _RAW_ONLY, r.coauthorship_edges),
        ("Sum of weights - coauthorship edges", _RAW_ONLY, r.coauthorship_weight_sum),
        ("Number of author-citation edges (excluding self loops)", _RAW_ONLY, r.author_citation_edges),
        ("Sum of weights - author citation edges", _RAW_ONLY, r.author_citation_weight_sum),
    ]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "raw", "filtered"])
    w.writerows(rows)
    return buf.getvalue()


def _ratio(num: int, den: int) -> str:
    return f"{num / den:.2f}" if den else "0.00"


def report_counts(report: FilterReport) -> dict[str, int]:
    return {f.name: getattr(report, f.name) for f in fields(report)}

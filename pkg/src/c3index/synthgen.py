"""Seeded synthetic bibliographic corpora and defect injection.

Citation targets are drawn with probability proportional to
``1 + strength * in_degree`` among all earlier papers, which yields the
heavy-tailed citation counts real corpora show. Author slots reuse an
existing author with probability ``team_persistence`` (chosen in proportion
to how many papers they already have), otherwise mint a new author.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .corpus import Corpus, PaperRecord


@dataclass(frozen=True)
class GeneratorParams:
    seed: int = 0
    n_papers: int = 1000
    year_min: int = 1990
    year_max: int = 2010
    authors_per_paper: tuple = (1, 4)  # inclusive uniform range
    refs_per_paper: tuple = (0, 12)
    preferential_attachment_strength: float = 1.0
    team_persistence: float = 0.7
    n_venues: int = 20

    def __post_init__(self):
        if self.n_papers <= 0:
            raise ValueError("n_papers must be positive")
        if self.year_min > self.year_max:
            raise ValueError("empty year range")
        lo, hi = self.authors_per_paper
        if not 1 <= lo <= hi:
            raise ValueError("authors_per_paper must be a range within [1, inf)")
        lo, hi = self.refs_per_paper
        if not 0 <= lo <= hi:
            raise ValueError("refs_per_paper must be a non-negative range")
        if self.preferential_attachment_strength < 0:
            raise ValueError("preferential_attachment_strength must be >= 0")
        if not 0.0 <= self.team_persistence <= 1.0:
            raise ValueError("team_persistence must be a probability")


def _years(rng: np.random.Generator, p: GeneratorParams) -> np.ndarray:
    # output grows linearly over the window
    span = np.arange(p.year_min, p.year_max + 1)
    w = np.arange(1, len(span) + 1, dtype=float)
    return np.sort(rng.choice(span, size=p.n_papers, p=w / w.sum()))


def generate(p: GeneratorParams) -> Corpus:
    """Build a raw corpus; every reference points to an earlier-created paper."""
    rng = np.random.default_rng(p.seed)
    years = _years(rng, p)
    width = len(str(p.n_papers - 1))
    pids = [f"P{i:0{width}d}" for i in range(p.n_papers)]
    papers = {}
    cited_urn: list[int] = []  # paper index once per citation received
    author_urn: list[int] = []  # author index once per paper written
    n_authors = 0
    s = p.preferential_attachment_strength

    for i in range(p.n_papers):
        k = int(rng.integers(p.authors_per_paper[0], p.authors_per_paper[1] + 1))
        team: list[int] = []
        for _ in range(k):
            a = None
            if author_urn and rng.random() < p.team_persistence:
                for _attempt in range(8):
                    cand = author_urn[int(rng.integers(len(author_urn)))]
                    if cand not in team:
                        a = cand
                        break
            if a is None:
                a = n_authors
                n_authors += 1
            team.append(a)

        refs: list[int] = []
        if i > 0:
            want = min(i, int(rng.integers(p.refs_per_paper[0], p.refs_per_paper[1] + 1)))
            chosen = set()
            attempts = 0
            while len(chosen) < want and attempts < 20 * want:
                attempts += 1
                mass_pa = s * len(cited_urn)
                if mass_pa > 0 and rng.random() < mass_pa / (i + mass_pa):
                    t = cited_urn[int(rng.integers(len(cited_urn)))]
                else:
                    t = int(rng.integers(i))
                if t not in chosen:
                    chosen.add(t)
                    refs.append(t)
        cited_urn.extend(refs)
        author_urn.extend(team)
        papers[pids[i]] = PaperRecord(
            paper_id=pids[i],
            year=int(years[i]),
            venue=f"V{int(rng.integers(p.n_venues)):02d}",
            authors=tuple(f"A{a}" for a in team),
            references=tuple(pids[t] for t in refs),
        )
    return Corpus(papers)


@dataclass(frozen=True)
class CorruptionSpec:
    seed: int = 0
    missing_venue: int = 0
    missing_authors: int = 0
    missing_year: int = 0
    dangling_references: int = 0
    forward_citations: int = 0


def corrupt(c: Corpus, spec: CorruptionSpec) -> Iterator[str]:
    """Yield the corpus as record lines with the requested defects injected.

    Papers stripped of a field are chosen among papers nobody cites, so
    removing them creates no additional dangling references and each
    injected defect shows up exactly once in the filter report. Forward
    citations link papers untouched by other defects.
    """
    rng = np.random.default_rng(spec.seed)
    recs = {pid: c.papers[pid] for pid in sorted(c.papers)}
    n_strip = spec.missing_venue + spec.missing_authors + spec.missing_year

    if n_strip:
        cited = set()
        for r in recs.values():
            cited.update(r.references)
        pool = [pid for pid in recs if pid not in cited]
        if len(pool) < n_strip:
            raise ValueError(f"only {len(pool)} uncited papers available for {n_strip} field defects")
        victims = [pool[i] for i in rng.choice(len(pool), size=n_strip, replace=False)]
    else:
        victims = []
    v_iter = iter(victims)
    for _ in range(spec.missing_venue):
        pid = next(v_iter)
        recs[pid] = replace(recs[pid], venue=None)
    for _ in range(spec.missing_authors):
        pid = next(v_iter)
        recs[pid] = replace(recs[pid], authors=())
    for _ in range(spec.missing_year):
        pid = next(v_iter)
        recs[pid] = replace(recs[pid], year=None)
    stripped = set(victims)
    healthy = [pid for pid in recs if pid not in stripped]

    for k in range(spec.dangling_references):
        pid = healthy[int(rng.integers(len(healthy)))]
        r = recs[pid]
        recs[pid] = replace(r, references=r.references + (f"__missing_{k}",))

    added = 0
    by_year = sorted(healthy, key=lambda pid: (recs[pid].year, pid))
    attempts = 0
    while added < spec.forward_citations:
        attempts += 1
        if attempts > 1000 * (spec.forward_citations + 1):
            raise ValueError("could not place the requested forward citations")
        src = by_year[int(rng.integers(len(by_year)))]
        dst = by_year[int(rng.integers(len(by_year)))]
        rs, rd = recs[src], recs[dst]
        if rd.year <= rs.year or dst in rs.references:
            continue
        recs[src] = replace(rs, references=rs.references + (dst,))
        added += 1

    for pid in recs:
        yield recs[pid].to_json() + "\n"

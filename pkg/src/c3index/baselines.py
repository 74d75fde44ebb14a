"""Citation-count baselines: h-index, g-index and total citations."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .netbuild import MultilayerNetwork


@dataclass(frozen=True)
class CitationProfile:
    author_id: str
    counts: tuple[int, ...]  # descending

    @property
    def total(self) -> int:
        return sum(self.counts)


def citation_profile(net: MultilayerNetwork, author: str, _indeg=None, _index=None) -> CitationProfile:
    """Per-paper citation counts (paper-layer in-degree) for one author.

    Self-citations are counted here; only the author-citation layer drops them.
    """
    if author not in net.papers_of:
        raise KeyError(f"unknown author {author!r}")
    indeg = net.paper_layer.in_degree if _indeg is None else _indeg
    index = {p: i for i, p in enumerate(net.paper_ids)} if _index is None else _index
    counts = sorted((int(indeg[index[p]]) for p in net.papers_of[author]), reverse=True)
    return CitationProfile(author, tuple(counts))


def all_profiles(net: MultilayerNetwork) -> dict[str, CitationProfile]:
    indeg = net.paper_layer.in_degree
    index = {p: i for i, p in enumerate(net.paper_ids)}
    return {a: citation_profile(net, a, indeg, index) for a in net.author_ids}


def h_index(profile: CitationProfile | Sequence[int]) -> int:
    """Largest h such that h papers have at least h citations each."""
    counts = profile.counts if isinstance(profile, CitationProfile) else sorted(profile, reverse=True)
    h = 0
    for i, c in enumerate(counts, start=1):
        if c >= i:
            h = i
        else:
            break
    return h


def g_index(profile: CitationProfile | Sequence[int]) -> int:
    """Largest g <= number of papers whose top g papers hold at least g**2 citations."""
    counts = profile.counts if isinstance(profile, CitationProfile) else sorted(profile, reverse=True)
    g = 0
    running = 0
    for i, c in enumerate(counts, start=1):
        running += c
        if running >= i * i:
            g = i
    return g


@dataclass(frozen=True)
class BaselineRow:
    author_id: str
    h: int
    g: int
    total_citations: int


def baseline_table(net: MultilayerNetwork) -> list[BaselineRow]:
    rows = []
    for a, prof in all_profiles(net).items():
        rows.append(BaselineRow(a, h_index(prof), g_index(prof), prof.total))
    return rows


def h_vector(net: MultilayerNetwork) -> np.ndarray:
    """h-index for every author, aligned with ``net.author_ids``."""
    profs = all_profiles(net)
    return np.array([h_index(profs[a]) for a in net.author_ids], dtype=np.int64)


def write_baselines(rows: Sequence[BaselineRow], year, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["author_id", "year", "h", "g", "total_citations"])
    for r in rows:
        w.writerow([r.author_id, year, r.h, r.g, r.total_citations])

"""Three-layer network: paper citations, author citations, coauthorship.

All layers are stored as CSR matrices over a canonical node order (ids
sorted lexicographically), so score vectors from different layers line up
by index.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus


@dataclass(frozen=True)
class PaperCitationLayer:
    """``adj[i, j] == 1`` iff paper ``ids[i]`` cites paper ``ids[j]``."""

    ids: tuple[str, ...]
    adj: sp.csr_matrix

    @property
    def out_degree(self) -> np.ndarray:
        return np.diff(self.adj.indptr).astype(np.int64)

    @property
    def in_degree(self) -> np.ndarray:
        return np.bincount(self.adj.indices, minlength=len(self.ids)).astype(np.int64)

    @property
    def n_edges(self) -> int:
        return int(self.adj.nnz)


@dataclass(frozen=True)
class AuthorCitationLayer:
    """``weights[i, j]`` counts (citation, citing author i, cited author j) triples."""

    ids: tuple[str, ...]
    weights: sp.csr_matrix

    @property
    def out_strength(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=1)).ravel()

    @property
    def n_edges(self) -> int:
        return int(self.weights.nnz)

    @property
    def weight_sum(self) -> int:
        return int(self.weights.sum())


@dataclass(frozen=True)
class CoauthorshipLayer:
    """Symmetric; ``weights[i, j]`` is the number of papers i and j wrote together."""

    ids: tuple[str, ...]
    weights: sp.csr_matrix

    @property
    def strength(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=1)).ravel()

    @property
    def n_edges(self) -> int:
        # undirected: each edge is stored twice
        return int(self.weights.nnz) // 2

    @property
    def weight_sum(self) -> int:
        return int(self.weights.sum()) // 2


@dataclass(frozen=True)
class MultilayerNetwork:
    paper_layer: PaperCitationLayer
    author_citation_layer: AuthorCitationLayer
    coauthorship_layer: CoauthorshipLayer
    incidence: sp.csr_matrix  # papers x authors, 1 where the author wrote the paper
    papers_of: Mapping[str, tuple[str, ...]]
    authors_of: Mapping[str, tuple[str, ...]]

    @property
    def paper_ids(self) -> tuple[str, ...]:
        return self.paper_layer.ids

    @property
    def author_ids(self) -> tuple[str, ...]:
        return self.coauthorship_layer.ids

    @property
    def n_papers(self) -> int:
        return len(self.paper_layer.ids)

    @property
    def n_authors(self) -> int:
        return len(self.coauthorship_layer.ids)


def _index(ids) -> dict[str, int]:
    return {x: i for i, x in enumerate(ids)}


def build_paper_layer(c: Corpus) -> PaperCitationLayer:
    ids = tuple(sorted(c.papers))
    idx = _index(ids)
    rows, cols = [], []
    for pid in ids:
        i = idx[pid]
        for ref in c.papers[pid].references:
            rows.append(i)
            cols.append(idx[ref])
    n = len(ids)
    adj = sp.csr_matrix(
        (np.ones(len(rows), dtype=np.float64), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
        shape=(n, n),
    )
    adj.sort_indices()
    return PaperCitationLayer(ids, adj)


def _incidence(c: Corpus, paper_ids, author_ids) -> sp.csr_matrix:
    pidx, aidx = _index(paper_ids), _index(author_ids)
    rows, cols = [], []
    for pid in paper_ids:
        for a in c.papers[pid].authors:
            rows.append(pidx[pid])
            cols.append(aidx[a])
    m = sp.csr_matrix(
        (np.ones(len(rows)), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
        shape=(len(paper_ids), len(author_ids)),
    )
    m.sort_indices()
    return m


def is_self_citation(c: Corpus, citing: str, cited: str) -> bool:
    """True when the two papers share at least one author."""
    return not set(c.papers[citing].authors).isdisjoint(c.papers[cited].authors)


def build_author_citation_layer(c: Corpus) -> AuthorCitationLayer:
    """Author-to-author citation weights with self-citations excluded.

    A citation between papers sharing any author is dropped entirely, so no
    author pair receives weight from it.
    """
    paper_ids = tuple(sorted(c.papers))
    author_ids = tuple(sorted(c.authors))
    pidx = _index(paper_ids)
    rows, cols = [], []
    for pid in paper_ids:
        rec = c.papers[pid]
        own = set(rec.authors)
        for ref in rec.references:
            if own.isdisjoint(c.papers[ref].authors):
                rows.append(pidx[pid])
                cols.append(pidx[ref])
    n = len(paper_ids)
    cites = sp.csr_matrix(
        (np.ones(len(rows)), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
        shape=(n, n),
    )
    inc = _incidence(c, paper_ids, author_ids)
    w = (inc.T @ cites @ inc).tocsr()
    w.eliminate_zeros()
    w.sort_indices()
    return AuthorCitationLayer(author_ids, w)


def build_coauthorship_layer(c: Corpus) -> CoauthorshipLayer:
    paper_ids = tuple(sorted(c.papers))
    author_ids = tuple(sorted(c.authors))
    inc = _incidence(c, paper_ids, author_ids)
    w = (inc.T @ inc).tocsr()
    w = (w - sp.diags(w.diagonal())).tocsr()
    w.eliminate_zeros()
    w.sort_indices()
    return CoauthorshipLayer(author_ids, w)


def build_multilayer(c: Corpus) -> MultilayerNetwork:
    paper_layer = build_paper_layer(c)
    author_ids = tuple(sorted(c.authors))
    papers_of: dict[str, list[str]] = {a: [] for a in author_ids}
    for pid in paper_layer.ids:
        for a in c.papers[pid].authors:
            papers_of[a].append(pid)
    return MultilayerNetwork(
        paper_layer=paper_layer,
        author_citation_layer=build_author_citation_layer(c),
        coauthorship_layer=build_coauthorship_layer(c),
        incidence=_incidence(c, paper_layer.ids, author_ids),
        papers_of={a: tuple(ps) for a, ps in papers_of.items()},
        authors_of={pid: c.papers[pid].authors for pid in paper_layer.ids},
    )


def export_edges(ids, matrix: sp.csr_matrix, out, undirected: bool = False) -> None:
    """Write ``source,target,weight`` rows; undirected layers emit each edge once."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["source", "target", "weight"])
    coo = matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    for k in order:
        i, j = int(coo.row[k]), int(coo.col[k])
        if undirected and j < i:
            continue
        w.writerow([ids[i], ids[j], int(coo.data[k])])

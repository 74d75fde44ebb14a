"""Rank correlation, distributions, cohorts, trajectories and threshold crossings."""
from __future__ import annotations

import csv
import operator
import re
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .baselines import all_profiles, g_index, h_index
from .corpus import Corpus, snapshot
from .netbuild import build_multilayer
from .solver import C3Result, SolverConfig, solve


class UndefinedCorrelation(ValueError):
    pass


@dataclass(frozen=True)
class RankTable:
    """Descending ranks (1 = highest value), ties sharing their average rank."""

    metric: str
    ids: tuple
    values: np.ndarray
    ranks: np.ndarray


def rank_table(values: Mapping[str, float] | Sequence[float], metric: str = "", ids=None) -> RankTable:
    if isinstance(values, Mapping):
        ids = tuple(values)
        arr = np.asarray([values[k] for k in ids], dtype=np.float64)
    else:
        arr = np.asarray(values, dtype=np.float64)
        ids = tuple(range(len(arr))) if ids is None else tuple(ids)
    if len(arr) == 0:
        raise ValueError("cannot rank an empty vector")
    return RankTable(metric, ids, arr, rankdata(-arr, method="average"))


def spearman(a: RankTable, b: RankTable) -> float:
    """Pearson correlation of the two tie-averaged rank vectors."""
    if a.ids != b.ids:
        raise ValueError("rank tables cover different author sets")
    n = len(a.ranks)
    if n < 2:
        raise UndefinedCorrelation("need at least two authors")
    ra = a.ranks - a.ranks.mean()
    rb = b.ranks - b.ranks.mean()
    sa, sb = float(ra @ ra), float(rb @ rb)
    if sa == 0 or sb == 0:
        raise UndefinedCorrelation(f"zero rank variance ({a.metric or 'a'} vs {b.metric or 'b'})")
    return float(np.clip((ra @ rb) / np.sqrt(sa * sb), -1.0, 1.0))


# ---------------------------------------------------------------- per-year evaluation


@dataclass
class YearEvaluation:
    year: int
    result: C3Result
    h: dict  # author -> h-index
    g: dict

    def metric(self, name: str) -> dict:
        name = name.lower()
        if name == "h":
            return self.h
        if name == "g":
            return self.g
        if name in ("c3", "c3_disp"):
            return dict(zip(self.result.author_ids, self.result.display["c3"].tolist()))
        return self.result.component(name).as_dict()


def evaluate_year(corpus: Corpus, year: int, cfg: SolverConfig = SolverConfig()) -> YearEvaluation:
    snap = snapshot(corpus, year)
    net = build_multilayer(snap)
    res = solve(net, cfg)
    profs = all_profiles(net)
    return YearEvaluation(
        year,
        res,
        {a: h_index(p) for a, p in profs.items()},
        {a: g_index(p) for a, p in profs.items()},
    )


CORRELATION_COLUMNS = ("C3", "ACI", "PCI", "AAI")


def correlation_row(ev: YearEvaluation, metrics: Sequence[str] = CORRELATION_COLUMNS) -> list[float]:
    ids = ev.result.author_ids
    h = rank_table([ev.h[a] for a in ids], "h", ids)
    row = []
    for m in metrics:
        vals = ev.result.component(m).values
        row.append(spearman(h, rank_table(vals, m, ids)))
    return row


def correlation_report(evals: Iterable[YearEvaluation], out, metrics: Sequence[str] = CORRELATION_COLUMNS) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["year"] + [f"h_vs_{m.lower()}" for m in metrics])
    for ev in evals:
        w.writerow([ev.year] + [repr(v) for v in correlation_row(ev, metrics)])


# ---------------------------------------------------------------- distributions

DEFAULT_BINS = ((0, 0), (1, 5), (6, 10), (11, 20), (21, None))


def distribution_histogram(values: Iterable[int], out=None, offset: int = 1) -> list[tuple[int, int]]:
    """Count authors per distinct value, reported at ``value + offset`` for log axes."""
    counts = Counter(int(v) for v in values)
    rows = [(v + offset, counts[v]) for v in sorted(counts)]
    if out is not None:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["value_plus_one" if offset == 1 else "value", "authors"])
        w.writerows(rows)
    return rows


def parse_bins(text: str) -> tuple:
    """``"0,1-5,6-10,11-20,21+"`` -> ((0, 0), (1, 5), (6, 10), (11, 20), (21, None))."""
    bins = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok.endswith("+"):
            bins.append((int(tok[:-1]), None))
        elif "-" in tok:
            lo, hi = tok.split("-", 1)
            bins.append((int(lo), int(hi)))
        else:
            bins.append((int(tok), int(tok)))
    _check_disjoint(bins)
    return tuple(bins)


def _check_disjoint(bins) -> None:
    spans = sorted((lo, float("inf") if hi is None else hi) for lo, hi in bins)
    for lo, hi in spans:
        if hi < lo:
            raise ValueError(f"empty bin {lo}-{hi}")
    for (lo1, hi1), (lo2, _) in zip(spans, spans[1:]):
        if lo2 <= hi1:
            raise ValueError(f"bins overlap at {lo2}")


def _bin_label(b) -> str:
    lo, hi = b
    if hi is None:
        return f"{lo}+"
    return str(lo) if lo == hi else f"{lo}-{hi}"


def _in_bin(v, b) -> bool:
    lo, hi = b
    return v >= lo and (hi is None or v <= hi)


def binned_counts(values: Iterable[int], bins=DEFAULT_BINS) -> list[tuple[str, int]]:
    vals = list(values)
    return [(_bin_label(b), sum(1 for v in vals if _in_bin(v, b))) for b in bins]


# ---------------------------------------------------------------- cohorts

_OPS = {"<=": operator.le, ">=": operator.ge, "<": operator.lt, ">": operator.gt}
_CLAUSE = re.compile(r"^\s*(ACI|AAI|PCI|C3)\s*(<=|>=|<|>)\s*([0-9.]+)\s*$", re.IGNORECASE)


@dataclass(frozen=True)
class CohortSpec:
    """Clauses ``(component, comparator, fraction)`` meaning value <cmp> fraction * max."""

    clauses: tuple

    def __post_init__(self):
        for comp, cmp, frac in self.clauses:
            if comp.upper() not in ("ACI", "AAI", "PCI", "C3"):
                raise ValueError(f"unknown component {comp!r}")
            if cmp not in _OPS:
                raise ValueError(f"unknown comparator {cmp!r}")
            if not 0.0 <= frac <= 1.0:
                raise ValueError(f"fraction {frac} outside [0, 1]")

    @classmethod
    def parse(cls, text: str) -> "CohortSpec":
        """``"ACI<=0.2,AAI>=0.8"``"""
        clauses = []
        for part in text.split(","):
            if not part.strip():
                continue
            m = _CLAUSE.match(part)
            if not m:
                raise ValueError(f"bad cohort clause {part!r}")
            clauses.append((m.group(1).upper(), m.group(2), float(m.group(3))))
        return cls(tuple(clauses))


def select_cohort(result: C3Result, spec: CohortSpec) -> list[str]:
    """Authors meeting every clause, thresholds relative to the component maximum."""
    keep = np.ones(len(result.author_ids), dtype=bool)
    for comp, cmp, frac in spec.clauses:
        vals = result.component(comp).values
        keep &= _OPS[cmp](vals, frac * vals.max())
    return [a for a, k in zip(result.author_ids, keep) if k]


# ---------------------------------------------------------------- trajectories


@dataclass(frozen=True)
class TrajectoryTable:
    author_id: str
    years: tuple
    h: tuple
    c3_disp: tuple


def trajectories(
    corpus: Corpus,
    cohort: Sequence[str],
    years: Sequence[int],
    cfg: SolverConfig = SolverConfig(),
    evaluate: Callable[[int], YearEvaluation] | None = None,
) -> list[TrajectoryTable]:
    """Per-author (h, c3_disp) per year; years where the author is absent are skipped."""
    if not cohort:
        raise ValueError("empty cohort")
    evaluate = evaluate or (lambda y: evaluate_year(corpus, y, cfg))
    evs = [evaluate(y) for y in sorted(years)]
    tables = []
    for a in cohort:
        ys, hs, cs = [], [], []
        for ev in evs:
            if a not in ev.h:
                continue
            c3 = ev.metric("c3")
            ys.append(ev.year)
            hs.append(ev.h[a])
            cs.append(c3[a])
        tables.append(TrajectoryTable(a, tuple(ys), tuple(hs), tuple(cs)))
    return tables


def write_trajectories(tables: Sequence[TrajectoryTable], out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["author_id", "year", "h", "c3_disp"])
    for t in tables:
        for y, h, c in zip(t.years, t.h, t.c3_disp):
            w.writerow([t.author_id, y, h, repr(c)])


# ---------------------------------------------------------------- threshold crossings

NEVER = "never"


@dataclass
class CrossingReport:
    """For each final-year bin, the year in which members first reach the target.

    ``fractions[bin_label]`` maps observation year (or ``"never"``) to the
    fraction of the bin's authors; each bin's fractions sum to 1.
    """

    metric: str
    bins: tuple
    thresholds: tuple
    sizes: dict
    fractions: dict

    def write(self, out) -> None:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["bin", "threshold", "authors", "year", "fraction"])
        for b, t in zip(self.bins, self.thresholds):
            label = _bin_label(b)
            for year, frac in self.fractions[label].items():
                w.writerow([label, repr(t), self.sizes[label], year, repr(frac)])


def crossing_report(
    evals: Mapping[int, YearEvaluation],
    bins: Sequence[tuple],
    thresholds: Sequence[float],
    metric: str = "c3",
    years: Sequence[int] | None = None,
    final_year: int | None = None,
    base_filter: tuple | None = None,
) -> CrossingReport:
    """Fractions of each h-index bin first meeting (>=) its threshold, per year.

    ``evals`` maps years to evaluations. ``years`` are the observation years
    (default: every year in ``evals``); bins are taken on the h-index at
    ``final_year`` (default: the last observation year). ``base_filter`` of
    ``(year, low, high)`` keeps only authors present in that year with h in
    ``[low, high]``; that year must be in ``evals``.
    """
    _check_disjoint(bins)
    if len(bins) != len(thresholds):
        raise ValueError("need exactly one threshold per bin")
    years = sorted(evals if years is None else set(years))
    final_year = years[-1] if final_year is None else final_year
    final_h = evals[final_year].h
    base_ok = None
    if base_filter is not None:
        by, lo, hi = base_filter
        base_h = evals[by].h
        base_ok = {a for a, v in base_h.items() if lo <= v <= hi}

    per_year = {y: evals[y].metric(metric) for y in years}
    sizes, fractions = {}, {}
    for b, thr in zip(bins, thresholds):
        label = _bin_label(b)
        members = sorted(a for a, v in final_h.items() if _in_bin(v, b) and (base_ok is None or a in base_ok))
        sizes[label] = len(members)
        first = Counter()
        for a in members:
            hit = NEVER
            for y in years:
                v = per_year[y].get(a)
                if v is not None and v >= thr:
                    hit = y
                    break
            first[hit] += 1
        n = len(members)
        dist = {y: (first[y] / n if n else 0.0) for y in years}
        dist[NEVER] = first[NEVER] / n if n else 0.0
        fractions[label] = dist
    return CrossingReport(metric, tuple(bins), tuple(thresholds), sizes, fractions)


# ---------------------------------------------------------------- scatter


def scatter_rows(ev: YearEvaluation) -> list[tuple]:
    c3 = ev.metric("c3")
    return [(a, ev.h[a], ev.g[a], c3[a]) for a in ev.result.author_ids]


def write_scatter(ev: YearEvaluation, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["author_id", "year", "h", "g", "c3_disp"])
    for a, h, g, c in scatter_rows(ev):
        w.writerow([a, ev.year, h, g, repr(c)])

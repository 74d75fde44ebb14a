"""Command-line interface.

Exit codes: 0 success, 1 data error, 2 usage error. Every subcommand writes
CSV with a header row. A ``key=value`` file passed with ``--config`` supplies
defaults for any option; explicit flags win.
"""
from __future__ import annotations

import csv
import functools
import hashlib
import logging
import pickle
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import analysis, baselines, corpus as corpus_mod, netbuild, synthgen
from .corpus import CorpusError
from .solver import SolverConfig, solve

log = logging.getLogger("c3index")


class DataError(click.ClickException):
    exit_code = 1


def _read_config(path) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise click.BadParameter(f"{path}:{lineno}: expected key=value", param_hint="--config")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _load_config(ctx, param, value):
    if value is None:
        return None
    values = _read_config(value)
    ctx.default_map = {name: dict(values) for name in ctx.command.commands}
    return value


@click.group()
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    callback=_load_config,
    is_eager=True,
    expose_value=False,
    help="key=value file with option defaults (flags override).",
)
@click.option("-v", "--verbose", is_flag=True, help="Log solver progress to stderr.")
def main(verbose):
    """Build citation-collaboration networks and compute C3-index scores."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s: %(message)s")


def _data_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (CorpusError, analysis.UndefinedCorrelation) as exc:
            raise DataError(str(exc)) from None
        except OSError as exc:
            raise DataError(f"{exc.filename}: {exc.strerror}") from None

    return wrapper


def _solver_options(fn):
    opts = [
        click.option("--theta", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=0.5, show_default=True, help="Damping factor."),
        click.option("--alpha", type=float, default=0.0, show_default=True, help="Credit-sharing exponent."),
        click.option("--tol", type=click.FloatRange(0, min_open=True), default=1e-9, show_default=True, help="L1 convergence threshold."),
        click.option("--max-iter", type=click.IntRange(1), default=200, show_default=True, help="Iteration cap per loop."),
        click.option("--outer-max-iter", type=click.IntRange(1), default=50, show_default=True, help="Outer PCI/C3 cap (alpha != 0)."),
        click.option("--aci-mode", type=click.Choice(["weighted", "literal"]), default="weighted", show_default=True, help="ACI edge weighting."),
        click.option("--aai-mode", type=click.Choice(["undamped", "damped"]), default="undamped", show_default=True, help="AAI damping."),
        click.option("--threads", type=click.IntRange(1), default=1, show_default=True, help="Worker threads."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _config(kw) -> SolverConfig:
    return SolverConfig(
        theta=kw.pop("theta"),
        alpha=kw.pop("alpha"),
        tol=kw.pop("tol"),
        max_iter=kw.pop("max_iter"),
        outer_max_iter=kw.pop("outer_max_iter"),
        aci_edge_weighting=kw.pop("aci_mode"),
        aai_damping=kw.pop("aai_mode"),
        threads=kw.pop("threads"),
    )


_corpus_arg = click.argument("corpus", type=click.Path(exists=True, dir_okay=False))


def _load(path) -> corpus_mod.Corpus:
    raw = corpus_mod.read_corpus(path)
    if len(raw) == 0:
        raise DataError(f"{path}: corpus is empty")
    lo, hi = raw.year_range()
    c, _ = corpus_mod.filter_corpus(raw, lo, hi, keep_missing_venue=True)
    return c


def _check_year(c, year, name="--year") -> int:
    lo, hi = c.year_range()
    if year is None:
        return hi
    if not lo <= year <= hi:
        raise click.BadParameter(f"{year} outside corpus range {lo}-{hi}", param_hint=name)
    return year


def _int_list(text, name) -> list[int]:
    try:
        out = []
        for tok in text.split(","):
            tok = tok.strip()
            if ":" in tok:
                a, b, *step = tok.split(":")
                out.extend(range(int(a), int(b) + 1, int(step[0]) if step else 1))
            elif tok:
                out.append(int(tok))
        return out
    except ValueError:
        raise click.BadParameter(f"cannot parse {text!r}", param_hint=name) from None


def _float_list(text, name) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise click.BadParameter(f"cannot parse {text!r}", param_hint=name) from None


def _evaluate_years(path, c, years, cfg, threads, cache_dir) -> dict:
    """Evaluate each snapshot year, in parallel when ``threads > 1``; keyed by year."""
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16] if cache_dir else None

    def one(year):
        cached = None
        if cache_dir:
            key = hashlib.sha256(f"{digest}|{year}|{cfg!r}".encode()).hexdigest()[:24]
            cached = Path(cache_dir) / f"{key}.pkl"
            if cached.exists():
                with open(cached, "rb") as fh:
                    return pickle.load(fh)
        ev = analysis.evaluate_year(c, year, cfg)
        if cached is not None:
            cached.parent.mkdir(parents=True, exist_ok=True)
            with open(cached, "wb") as fh:
                pickle.dump(ev, fh)
        return ev

    years = sorted(set(years))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            evs = list(pool.map(one, years))
    else:
        evs = [one(y) for y in years]
    return dict(zip(years, evs))


def _multi_year_setup(kw):
    cfg = _config(kw)
    threads = cfg.threads
    # years run concurrently; each solve stays single-threaded
    return SolverConfig(**{**cfg.__dict__, "threads": 1}), threads


_cache_opt = click.option("--cache-dir", type=click.Path(file_okay=False), default=None, help="Memoize per-year solver results here.")


@main.command()
@click.argument("input", type=click.Path(exists=True, dir_okay=False))
@click.option("--year-min", type=int, default=1950, show_default=True)
@click.option("--year-max", type=int, default=2012, show_default=True)
@click.option("--keep-missing-venue", is_flag=True, help="Do not drop papers without a venue.")
@click.option("--out-corpus", type=click.Path(dir_okay=False), default="corpus.jsonl", show_default=True, help="Filtered records, same line format as the input.")
@click.option("--out-report", type=click.Path(dir_okay=False), default="filter_report.csv", show_default=True)
@_data_errors
def ingest(input, year_min, year_max, keep_missing_venue, out_corpus, out_report):
    """Parse INPUT, filter it and write the cleaned corpus plus a filter report."""
    if year_min > year_max:
        raise click.BadParameter("--year-min exceeds --year-max")
    raw = corpus_mod.read_corpus(input)
    c, rep = corpus_mod.filter_corpus(raw, year_min, year_max, keep_missing_venue=keep_missing_venue)
    with open(out_corpus, "w", encoding="utf-8", newline="") as fh:
        c.write(fh)
    with open(out_report, "w", encoding="utf-8", newline="") as fh:
        fh.write(corpus_mod.filter_report(rep))
    click.echo(f"{rep.surviving_papers} of {rep.input_papers} papers kept", err=True)


SCORE_COLUMNS = ["author_id", "aci_raw", "aai_raw", "pci_raw", "c3_norm", "aci_disp", "aai_disp", "pci_disp", "c3_disp"]


def write_scores(res, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SCORE_COLUMNS)
    d = res.display
    cols = [res.aci.values, res.aai.values, res.pci.values, res.c3_norm.values, d["aci"], d["aai"], d["pci"], d["c3"]]
    for i, a in enumerate(res.author_ids):
        w.writerow([a] + [repr(float(col[i])) for col in cols])


def write_papers(res, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["paper_id", "pqi"])
    for p, v in zip(res.pqi.ids, res.pqi.values.tolist()):
        w.writerow([p, repr(v)])


def write_log(res, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["loop", "iteration", "l1_delta", "converged"])
    for name, lg in res.logs.items():
        for i, d in enumerate(lg.deltas, start=1):
            w.writerow([name, i, repr(d), int(lg.converged)])


def _sibling(path, suffix) -> str:
    p = Path(path)
    return str(p.with_name(p.stem + suffix))


@main.command()
@_corpus_arg
@click.option("--year", type=int, default=None, help="Snapshot year [default: latest year].")
@_solver_options
@click.option("--out", type=click.Path(dir_okay=False), default="scores.csv", show_default=True, help="Author scores CSV.")
@click.option("--papers-out", type=click.Path(dir_okay=False), default=None, help="PQI CSV [default: <out>_papers.csv].")
@click.option("--log-out", type=click.Path(dir_okay=False), default=None, help="Convergence log CSV [default: <out>_convergence.csv].")
@_data_errors
def rank(corpus, year, out, papers_out, log_out, **kw):
    """Snapshot CORPUS, build the network and write C3-index scores."""
    cfg = _config(kw)
    c = _load(corpus)
    year = _check_year(c, year)
    net = netbuild.build_multilayer(corpus_mod.snapshot(c, year))
    if net.n_papers == 0:
        raise DataError(f"snapshot {year} is empty")
    res = solve(net, cfg)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        write_scores(res, fh)
    with open(papers_out or _sibling(out, "_papers.csv"), "w", encoding="utf-8", newline="") as fh:
        write_papers(res, fh)
    with open(log_out or _sibling(out, "_convergence.csv"), "w", encoding="utf-8", newline="") as fh:
        write_log(res, fh)
    for name, lg in res.logs.items():
        if not lg.converged:
            click.echo(f"warning: {name} did not converge (L1 delta {lg.final_delta:.3g}); flagged in the log", err=True)


@main.command()
@_corpus_arg
@click.option("--year", type=int, default=None, help="Snapshot year [default: latest year].")
@click.option("--out", type=click.Path(dir_okay=False), default="baselines.csv", show_default=True)
@_data_errors
def baseline(corpus, year, out):
    """h-index, g-index and citation totals per author."""
    c = _load(corpus)
    year = _check_year(c, year)
    net = netbuild.build_multilayer(corpus_mod.snapshot(c, year))
    with open(out, "w", encoding="utf-8", newline="") as fh:
        baselines.write_baselines(baselines.baseline_table(net), year, fh)


@main.command()
@_corpus_arg
@click.option("--years", required=True, help="Comma list or start:end[:step] ranges, e.g. 1998,2004,2008.")
@_solver_options
@_cache_opt
@click.option("--out", type=click.Path(dir_okay=False), default="correlations.csv", show_default=True)
@_data_errors
def correlate(corpus, years, cache_dir, out, **kw):
    """Spearman correlation of h-index against C3, ACI, PCI and AAI per year."""
    cfg, threads = _multi_year_setup(kw)
    c = _load(corpus)
    ys = [_check_year(c, y, "--years") for y in _int_list(years, "--years")]
    evs = _evaluate_years(corpus, c, ys, cfg, threads, cache_dir)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        analysis.correlation_report([evs[y] for y in sorted(evs)], fh)


@main.command()
@_corpus_arg
@click.option("--base-year", type=int, required=True, help="Year the cohort is selected in.")
@click.option("--spec", "spec_text", required=True, help='Clauses such as "ACI<=0.2,AAI>=0.8".')
@click.option("--years", default=None, help="Trajectory years [default: base year to latest year].")
@_solver_options
@_cache_opt
@click.option("--out", type=click.Path(dir_okay=False), default="cohort.csv", show_default=True)
@_data_errors
def cohort(corpus, base_year, spec_text, years, cache_dir, out, **kw):
    """Select authors by base-year component scores and trace their h and C3."""
    try:
        spec = analysis.CohortSpec.parse(spec_text)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--spec") from None
    cfg, threads = _multi_year_setup(kw)
    c = _load(corpus)
    base_year = _check_year(c, base_year, "--base-year")
    ys = _int_list(years, "--years") if years else list(range(base_year, c.year_range()[1] + 1))
    ys = [_check_year(c, y, "--years") for y in ys]
    evs = _evaluate_years(corpus, c, set(ys) | {base_year}, cfg, threads, cache_dir)
    members = analysis.select_cohort(evs[base_year].result, spec)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        if not members:
            analysis.write_trajectories([], fh)
            click.echo("warning: cohort is empty", err=True)
            return
        tables = analysis.trajectories(c, members, ys, cfg, evaluate=evs.__getitem__)
        analysis.write_trajectories(tables, fh)


@main.command()
@_corpus_arg
@click.option("--bins", required=True, help="Final-year h-index bins, e.g. 7-8,9-10,11-12.")
@click.option("--thresholds", required=True, help="One target per bin, e.g. 0.02,0.03,0.04.")
@click.option("--years", required=True, help="Observation years; the last is the final year.")
@click.option("--metric", type=click.Choice(["c3", "h"]), default="c3", show_default=True, help="Tracked metric.")
@click.option("--base-filter", default=None, help='Keep authors with h in [lo, hi] at a base year: "1998:4-7".')
@_solver_options
@_cache_opt
@click.option("--out", type=click.Path(dir_okay=False), default="crossing.csv", show_default=True)
@_data_errors
def crossing(corpus, bins, thresholds, years, metric, base_filter, cache_dir, out, **kw):
    """Year in which authors of each h-index bin first reach a target score."""
    try:
        bin_list = analysis.parse_bins(bins)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--bins") from None
    thr = _float_list(thresholds, "--thresholds")
    if len(thr) != len(bin_list):
        raise click.BadParameter("need one threshold per bin", param_hint="--thresholds")
    bf = None
    if base_filter:
        try:
            by, rng = base_filter.split(":")
            lo, hi = rng.split("-")
            bf = (int(by), int(lo), int(hi))
        except ValueError:
            raise click.BadParameter(f"cannot parse {base_filter!r}", param_hint="--base-filter") from None
    cfg, threads = _multi_year_setup(kw)
    c = _load(corpus)
    ys = [_check_year(c, y, "--years") for y in _int_list(years, "--years")]
    wanted = set(ys) | ({_check_year(c, bf[0], "--base-filter")} if bf else set())
    evs = _evaluate_years(corpus, c, wanted, cfg, threads, cache_dir)
    rep = analysis.crossing_report(evs, bin_list, thr, metric=metric, years=ys, base_filter=bf)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        rep.write(fh)


@main.command()
@_corpus_arg
@click.option("--metric", type=click.Choice(["h", "g"]), default="h", show_default=True)
@click.option("--year", type=int, default=None, help="Snapshot year [default: latest year].")
@click.option("--bins", default=None, help="Emit binned counts instead, e.g. 0,1-5,6-10,11-20,21+.")
@click.option("--out", type=click.Path(dir_okay=False), default="histogram.csv", show_default=True)
@_data_errors
def hist(corpus, metric, year, bins, out):
    """Author counts per h- or g-index value (value + 1, for log-log plots)."""
    c = _load(corpus)
    year = _check_year(c, year)
    net = netbuild.build_multilayer(corpus_mod.snapshot(c, year))
    fn = baselines.h_index if metric == "h" else baselines.g_index
    values = [fn(p) for p in baselines.all_profiles(net).values()]
    with open(out, "w", encoding="utf-8", newline="") as fh:
        if bins:
            try:
                bin_list = analysis.parse_bins(bins)
            except ValueError as exc:
                raise click.BadParameter(str(exc), param_hint="--bins") from None
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin", "authors"])
            w.writerows(analysis.binned_counts(values, bin_list))
        else:
            analysis.distribution_histogram(values, fh)


@main.command()
@_corpus_arg
@click.option("--year", type=int, default=None, help="Snapshot year [default: latest year].")
@_solver_options
@click.option("--out", type=click.Path(dir_okay=False), default="scatter.csv", show_default=True)
@_data_errors
def scatter(corpus, year, out, **kw):
    """Per-author h, g and display C3 for scatter plots."""
    cfg = _config(kw)
    c = _load(corpus)
    year = _check_year(c, year)
    ev = analysis.evaluate_year(c, year, cfg)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        analysis.write_scatter(ev, fh)


@main.command()
@_corpus_arg
@click.option("--year", type=int, default=None, help="Snapshot year [default: latest year].")
@click.option("--out-dir", type=click.Path(file_okay=False), default="layers", show_default=True)
@_data_errors
def layers(corpus, year, out_dir):
    """Export the three layers as source,target,weight edge lists."""
    c = _load(corpus)
    year = _check_year(c, year)
    net = netbuild.build_multilayer(corpus_mod.snapshot(c, year))
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "paper_citation.csv", "w", encoding="utf-8", newline="") as fh:
        netbuild.export_edges(net.paper_ids, net.paper_layer.adj, fh)
    with open(d / "author_citation.csv", "w", encoding="utf-8", newline="") as fh:
        netbuild.export_edges(net.author_ids, net.author_citation_layer.weights, fh)
    with open(d / "coauthorship.csv", "w", encoding="utf-8", newline="") as fh:
        netbuild.export_edges(net.author_ids, net.coauthorship_layer.weights, fh, undirected=True)


def _range(text, name) -> tuple:
    try:
        lo, hi = (int(t) for t in text.split("-"))
    except ValueError:
        raise click.BadParameter(f"expected lo-hi, got {text!r}", param_hint=name) from None
    return lo, hi


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n-papers", type=click.IntRange(1), default=1000, show_default=True)
@click.option("--year-min", type=int, default=1990, show_default=True)
@click.option("--year-max", type=int, default=2010, show_default=True)
@click.option("--authors-per-paper", default="1-4", show_default=True, help="Inclusive range.")
@click.option("--refs-per-paper", default="0-12", show_default=True, help="Inclusive range.")
@click.option("--attachment", type=click.FloatRange(0), default=1.0, show_default=True, help="Preferential attachment strength.")
@click.option("--team-persistence", type=click.FloatRange(0, 1), default=0.7, show_default=True)
@click.option("--missing-venue", type=click.IntRange(0), default=0, show_default=True, help="Defects to inject.")
@click.option("--missing-authors", type=click.IntRange(0), default=0, show_default=True)
@click.option("--missing-year", type=click.IntRange(0), default=0, show_default=True)
@click.option("--dangling", type=click.IntRange(0), default=0, show_default=True)
@click.option("--forward", type=click.IntRange(0), default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="synthetic.jsonl", show_default=True)
def synth(seed, n_papers, year_min, year_max, authors_per_paper, refs_per_paper, attachment, team_persistence,
          missing_venue, missing_authors, missing_year, dangling, forward, out):
    """Write a seeded synthetic record stream."""
    try:
        params = synthgen.GeneratorParams(
            seed=seed,
            n_papers=n_papers,
            year_min=year_min,
            year_max=year_max,
            authors_per_paper=_range(authors_per_paper, "--authors-per-paper"),
            refs_per_paper=_range(refs_per_paper, "--refs-per-paper"),
            preferential_attachment_strength=attachment,
            team_persistence=team_persistence,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    c = synthgen.generate(params)
    spec = synthgen.CorruptionSpec(seed, missing_venue, missing_authors, missing_year, dangling, forward)
    try:
        lines = list(synthgen.corrupt(c, spec))
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.writelines(lines)


if __name__ == "__main__":
    sys.exit(main())

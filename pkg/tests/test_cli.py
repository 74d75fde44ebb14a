import csv

import pytest
from click.testing import CliRunner

from c3index.cli import SCORE_COLUMNS, main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    runner = CliRunner()
    res = runner.invoke(main, ["synth", "--seed", "7", "--n-papers", "800", "--year-min", "1996", "--year-max", "2008", "--out", str(d / "raw.jsonl")])
    assert res.exit_code == 0, res.output
    res = runner.invoke(
        main,
        ["ingest", str(d / "raw.jsonl"), "--year-min", "1990", "--year-max", "2010", "--out-corpus", str(d / "corpus.jsonl"), "--out-report", str(d / "report.csv")],
    )
    assert res.exit_code == 0, res.output
    return d


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_ingest_outputs(workspace):
    assert (workspace / "corpus.jsonl").stat().st_size > 0
    assert rows(workspace / "report.csv")[0] == ["quantity", "raw", "filtered"]


def test_ingest_missing_file(tmp_path):
    assert run("ingest", tmp_path / "nope.jsonl").exit_code == 2


def test_ingest_corrupt_line(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "A", "year": 2000, "venue": "V", "authors": ["a"], "references": []}\n{oops\n')
    res = run("ingest", bad, "--out-corpus", tmp_path / "c.jsonl", "--out-report", tmp_path / "r.csv")
    assert res.exit_code == 1
    assert "line 2" in res.stderr


def test_synth_reproducible(tmp_path):
    for name in ("a", "b"):
        assert run("synth", "--seed", 7, "--n-papers", 200, "--out", tmp_path / f"{name}.jsonl").exit_code == 0
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_rank_outputs_and_determinism(workspace, tmp_path):
    c = workspace / "corpus.jsonl"
    for name, threads in (("one", 1), ("two", 1), ("four", 4)):
        res = run("rank", c, "--year", 2005, "--threads", threads, "--out", tmp_path / f"{name}.csv")
        assert res.exit_code == 0, res.output
    one = (tmp_path / "one.csv").read_bytes()
    assert one == (tmp_path / "two.csv").read_bytes() == (tmp_path / "four.csv").read_bytes()
    assert rows(tmp_path / "one.csv")[0] == SCORE_COLUMNS
    assert rows(tmp_path / "one_papers.csv")[0] == ["paper_id", "pqi"]
    log = rows(tmp_path / "one_convergence.csv")
    assert log[0] == ["loop", "iteration", "l1_delta", "converged"]
    assert {r[0] for r in log[1:]} == {"PQI", "ACI", "AAI", "PCI-C3"}


def test_rank_year_out_of_range(workspace, tmp_path):
    assert run("rank", workspace / "corpus.jsonl", "--year", 2050, "--out", tmp_path / "x.csv").exit_code == 2


def test_rank_non_convergence_warns(workspace, tmp_path):
    res = run("rank", workspace / "corpus.jsonl", "--max-iter", 2, "--out", tmp_path / "x.csv")
    assert res.exit_code == 0
    assert "did not converge" in res.stderr
    assert (tmp_path / "x.csv").exists()


def test_rank_defaults_are_paper_setting():
    params = {p.name: p.default for p in main.commands["rank"].params}
    assert params["theta"] == 0.5 and params["alpha"] == 0.0


def test_bad_flag_value(workspace, tmp_path):
    assert run("rank", workspace / "corpus.jsonl", "--theta", 1.5, "--out", tmp_path / "x.csv").exit_code == 2


def test_config_file_under_flags(workspace, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# solver settings\ntheta = 0.85\nmax-iter=5\n")
    assert run("--config", cfg, "rank", workspace / "corpus.jsonl", "--out", tmp_path / "cfg.csv").exit_code == 0
    assert run("rank", workspace / "corpus.jsonl", "--theta", 0.85, "--max-iter", 5, "--out", tmp_path / "flags.csv").exit_code == 0
    assert (tmp_path / "cfg.csv").read_bytes() == (tmp_path / "flags.csv").read_bytes()
    assert run("--config", cfg, "rank", workspace / "corpus.jsonl", "--theta", 0.5, "--max-iter", 200, "--out", tmp_path / "over.csv").exit_code == 0
    assert run("rank", workspace / "corpus.jsonl", "--out", tmp_path / "plain.csv").exit_code == 0
    assert (tmp_path / "over.csv").read_bytes() == (tmp_path / "plain.csv").read_bytes()


def test_baseline(workspace, tmp_path):
    assert run("baseline", workspace / "corpus.jsonl", "--year", 2004, "--out", tmp_path / "b.csv").exit_code == 0
    r = rows(tmp_path / "b.csv")
    assert r[0] == ["author_id", "year", "h", "g", "total_citations"]
    assert all(int(x[2]) <= int(x[3]) for x in r[1:])


def test_correlate_three_years(workspace, tmp_path):
    res = run("correlate", workspace / "corpus.jsonl", "--years", "2002,2005,2008", "--threads", 3, "--cache-dir", tmp_path / "cache", "--out", tmp_path / "c.csv")
    assert res.exit_code == 0, res.output
    r = rows(tmp_path / "c.csv")
    assert r[0] == ["year", "h_vs_c3", "h_vs_aci", "h_vs_pci", "h_vs_aai"]
    assert [x[0] for x in r[1:]] == ["2002", "2005", "2008"]
    # second run served from cache, same bytes
    assert run("correlate", workspace / "corpus.jsonl", "--years", "2002,2005,2008", "--cache-dir", tmp_path / "cache", "--out", tmp_path / "c2.csv").exit_code == 0
    assert (tmp_path / "c.csv").read_bytes() == (tmp_path / "c2.csv").read_bytes()


def test_cohort(workspace, tmp_path):
    res = run("cohort", workspace / "corpus.jsonl", "--base-year", 2002, "--spec", "ACI>=0", "--years", "2002:2008:3", "--out", tmp_path / "co.csv")
    assert res.exit_code == 0, res.output
    r = rows(tmp_path / "co.csv")
    assert r[0] == ["author_id", "year", "h", "c3_disp"]
    assert {x[1] for x in r[1:]} == {"2002", "2005", "2008"}
    assert run("cohort", workspace / "corpus.jsonl", "--base-year", 2002, "--spec", "ACI<=7", "--out", tmp_path / "x.csv").exit_code == 2


def test_crossing_paper_thresholds(workspace, tmp_path):
    res = run(
        "crossing", workspace / "corpus.jsonl", "--bins", "7-8,9-10,11-12", "--thresholds", "0.02,0.03,0.04",
        "--years", "2000:2008:2", "--base-filter", "2000:0-0", "--out", tmp_path / "x.csv",
    )
    assert res.exit_code == 0, res.output
    r = rows(tmp_path / "x.csv")
    assert r[0] == ["bin", "threshold", "authors", "year", "fraction"]
    assert {x[0] for x in r[1:]} == {"7-8", "9-10", "11-12"}
    assert run("crossing", workspace / "corpus.jsonl", "--bins", "1-5,4-8", "--thresholds", "1,2", "--years", "2008", "--out", tmp_path / "y.csv").exit_code == 2


def test_hist(workspace, tmp_path):
    assert run("hist", workspace / "corpus.jsonl", "--metric", "g", "--out", tmp_path / "h.csv").exit_code == 0
    assert rows(tmp_path / "h.csv")[0] == ["value_plus_one", "authors"]
    assert run("hist", workspace / "corpus.jsonl", "--bins", "0,1-5,6-10,11-20,21+", "--out", tmp_path / "hb.csv").exit_code == 0
    assert [x[0] for x in rows(tmp_path / "hb.csv")[1:]] == ["0", "1-5", "6-10", "11-20", "21+"]


def test_scatter_and_layers(workspace, tmp_path):
    assert run("scatter", workspace / "corpus.jsonl", "--year", 2006, "--out", tmp_path / "s.csv").exit_code == 0
    assert rows(tmp_path / "s.csv")[0] == ["author_id", "year", "h", "g", "c3_disp"]
    assert run("layers", workspace / "corpus.jsonl", "--out-dir", tmp_path / "L").exit_code == 0
    for name in ("paper_citation", "author_citation", "coauthorship"):
        assert rows(tmp_path / "L" / f"{name}.csv")[0] == ["source", "target", "weight"]


@pytest.mark.parametrize("name", sorted(main.commands))
def test_help_lists_every_flag(name):
    cmd = main.commands[name]
    res = CliRunner().invoke(main, [name, "--help"])
    assert res.exit_code == 0
    for p in cmd.params:
        for opt in getattr(p, "opts", []):
            if opt.startswith("--"):
                assert opt in res.output

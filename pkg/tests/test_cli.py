import csv
import json
import math
import shutil
import sys

import pytest

from conftest import MOCK_ENGINE, fixture_path
from gameintel.cli import main
from gameintel.dataset import dataset_read


@pytest.fixture
def work(tmp_path, monkeypatch):
    shutil.copy(fixture_path("three_games.pgn"), tmp_path / "three_games.pgn")
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


def pipeline(work):
    assert run("ingest", "three_games.pgn", "-o", "games.jsonl") == 0
    assert run("analyze", "games.jsonl", "-o", "metrics.jsonl", "--csv", "metrics.csv") == 0


def test_analyze_matches_oracle(work, capsys):
    pipeline(work)
    out = capsys.readouterr().out
    assert "parsed=3 kept=3" in out and "games=3" in out
    rows = list(csv.DictReader(l for l in open("metrics.csv") if not l.startswith("#")))
    got = {(r["index"], r["color"]): r for r in rows}
    for o in csv.DictReader(open(fixture_path("oracle_metrics.csv"))):
        r = got[(o["index"], o["color"])]
        assert r["player"] == o["player"]
        for col in ("reward", "gpl", "gi", "egi", "accuracy"):
            assert float(r[col]) == pytest.approx(float(o[col]), abs=1e-9)


@pytest.mark.parametrize("argv,golden", [
    (("report", "metrics.jsonl", "--stat", "mean", "--format", "md"), "report_mean.md"),
    (("report", "metrics.jsonl", "--stat", "median", "--format", "csv"), "report_median.csv"),
    (("compare", "metrics.jsonl", "--format", "text"), "compare.txt"),
    (("compare", "metrics.jsonl", "--format", "csv"), "compare.csv"),
])
def test_goldens(work, argv, golden):
    pipeline(work)
    assert run(*argv, "-o", "out.txt") == 0
    assert open("out.txt", "rb").read() == open(fixture_path("golden/" + golden), "rb").read()


def test_stdout_when_no_output(work, capsys):
    pipeline(work)
    capsys.readouterr()
    assert run("report", "metrics.jsonl") == 0
    assert capsys.readouterr().out == open(fixture_path("golden/report_mean.md")).read()


def test_empty_report(work):
    assert run("ingest", "three_games.pgn", "-o", "games.jsonl", "--min-elo", "4000") == 0
    assert run("analyze", "games.jsonl", "-o", "metrics.jsonl") == 0
    assert run("report", "metrics.jsonl", "-o", "r.md") == 0
    lines = open("r.md").read().splitlines()
    assert lines[-2].startswith("| Player |") and lines[-1].startswith("|---")


def test_workers_deterministic(work):
    assert run("ingest", "three_games.pgn", fixture_path("twenty_ply.pgn"), "-o", "games.jsonl") == 0
    assert run("analyze", "games.jsonl", "-o", "m1.jsonl", "--workers", "1") == 0
    assert run("analyze", "games.jsonl", "-o", "m2.jsonl", "--workers", "2") == 0
    assert open("m1.jsonl", "rb").read() == open("m2.jsonl", "rb").read()


def test_analyze_pgn_directly(work):
    assert run("analyze", "three_games.pgn", "-o", "m.jsonl") == 0
    assert len(list(dataset_read("m.jsonl"))) == 3


def test_config_defaults_and_flags_win(work):
    pipeline(work)
    (work / "cfg.txt").write_text("# defaults\nstat = median\nformat=csv\n")
    assert run("--config", "cfg.txt", "report", "metrics.jsonl", "-o", "a.csv") == 0
    assert open("a.csv").read() == open(fixture_path("golden/report_median.csv")).read()
    assert run("--config", "cfg.txt", "report", "metrics.jsonl", "-o", "b.md", "--stat", "mean", "--format", "md") == 0
    assert open("b.md").read() == open(fixture_path("golden/report_mean.md")).read()


def test_config_unknown_key(work, capsys):
    pipeline(work)
    (work / "cfg.txt").write_text("colour=white\n")
    assert run("--config", "cfg.txt", "report", "metrics.jsonl") == 1
    err = capsys.readouterr().err
    assert err.startswith("error: ")
    summary = json.loads(err[len("error: "):])
    assert summary["command"] == "report" and "colour" in summary["message"]


def test_missing_file_error(work, capsys):
    assert run("report", "nope.jsonl") == 1
    assert "nope.jsonl" in capsys.readouterr().err


def test_report_wrong_kind(work, capsys):
    pipeline(work)
    assert run("report", "games.jsonl") == 1
    assert "SchemaError" in capsys.readouterr().err


def test_report_groups(work):
    pipeline(work)
    assert run("report", "metrics.jsonl", "--group", "player,color", "--format", "csv", "-o", "g.csv") == 0
    rows = list(csv.DictReader(l for l in open("g.csv") if not l.startswith("#")))
    assert {r["Player"] for r in rows} == {"Alpha / white", "Alpha / black", "Beta / white",
                                          "Beta / black", "Gamma / white", "Gamma / black"}
    assert run("report", "metrics.jsonl", "--group", "moon") == 1


def test_compare_color_and_players(work):
    pipeline(work)
    assert run("compare", "metrics.jsonl", "--players", "Gamma,Alpha", "--color", "black", "-o", "c.txt") == 0
    text = open("c.txt").read()
    assert "H1: row > column" in text and "color=black" in text
    assert run("compare", "metrics.jsonl", "--players", "Zed") == 1


def test_tpr_from_results(work):
    (work / "res.csv").write_text(
        "player,opponent_rating,score\n"
        + "".join(f"Ann,2800,{s}\n" for s in (1, 1, 1, 0))
        + "Bob,2700,1\nBob,2750,1\n"
    )
    assert run("tpr", "res.csv", "-o", "t.csv") == 0
    rows = {r["Player"]: r for r in csv.DictReader(l for l in open("t.csv") if not l.startswith("#"))}
    assert float(rows["Ann"]["TPR"]) == pytest.approx(2800 + 400 * math.log10(3), abs=0.05)
    assert float(rows["Ann"]["Expected"]) == pytest.approx(3.0, abs=1e-3)
    assert rows["Bob"]["TPR"] == "+inf"


def test_tpr_from_metrics(work):
    pipeline(work)
    assert run("tpr", "metrics.jsonl", "-o", "t.csv") == 0
    rows = list(csv.DictReader(l for l in open("t.csv") if not l.startswith("#")))
    assert [r["Player"] for r in rows] and all(r["Games"] == "2" for r in rows)


def test_hist(work):
    pipeline(work)
    assert run("hist", "metrics.jsonl", "--width", "0.5", "-o", "h.csv") == 0
    rows = list(csv.DictReader(l for l in open("h.csv") if not l.startswith("#")))
    assert sum(int(r["count"]) for r in rows) == 6
    assert run("hist", "metrics.jsonl", "--player", "Alpha", "--color", "white", "-o", "h2.csv") == 0
    rows = list(csv.DictReader(l for l in open("h2.csv") if not l.startswith("#")))
    assert sum(int(r["count"]) for r in rows) == 1


def test_lab(work, capsys):
    assert run("lab", "--seed", "7", "--games", "20") == 0
    out = capsys.readouterr().out
    lines = [l for l in out.splitlines() if l.startswith("property=")]
    assert len(lines) == 6 and all("status=PASS" in l for l in lines)
    assert out.rstrip().endswith("overall=PASS")
    assert run("lab", "--mechanism", "fancy") == 1


def test_annotate_with_mock(work, capsys):
    (work / "bare.pgn").write_text(
        '[White "A"]\n[Black "B"]\n[Result "1/2-1/2"]\n\n1. e4 {[%eval 0.3]} e5 2. Nf3 Nc6 1/2-1/2\n'
    )
    log = work / "calls.log"
    (work / "script.json").write_text(json.dumps({"default": "cp 20", "log": str(log)}))
    assert run("ingest", "bare.pgn", "-o", "g.jsonl", "--min-elo", "0") == 0
    engine = f"{sys.executable} {MOCK_ENGINE} {work / 'script.json'}"
    assert run("annotate", "g.jsonl", "-o", "ga.jsonl", "--engine-path", engine, "--depth", "12") == 0
    assert "filled=3 engine_calls=3 failures=0" in capsys.readouterr().out
    assert len(log.read_text().splitlines()) == 3
    (rec,) = dataset_read("ga.jsonl")
    assert all(p.eval_after is not None for p in rec.plies)
    assert run("analyze", "ga.jsonl", "-o", "m.jsonl") == 0


def test_annotate_needs_engine(work, monkeypatch, capsys):
    monkeypatch.delenv("GAMEINTEL_ENGINE", raising=False)
    pipeline(work)
    assert run("annotate", "games.jsonl", "-o", "x.jsonl") == 1
    assert "GAMEINTEL_ENGINE" in capsys.readouterr().err


def test_malformed_input_reported(work, capsys):
    shutil.copy(fixture_path("with_malformed.pgn"), "bad.pgn")
    assert run("ingest", "bad.pgn", "-o", "g.jsonl", "--min-elo", "0") == 0
    out = capsys.readouterr().out
    assert "parsed=2" in out and "diagnostics=1" in out

import json
import shutil
from pathlib import Path

import pytest

from ricalign.cli import EXIT_CONFIG, EXIT_OK, EXIT_STAGE, main
from ricalign.config import PipelineConfig, load_config
from ricalign.corpus import parse_corpus
from ricalign.errors import ConfigError

GOLDEN = Path(__file__).parent / "golden"
TABLES = [f"{name}.{ext}" for name in ("table1_left", "table1_right", "table2", "table3")
          for ext in ("csv", "md")]


def run(*argv):
    return main([str(a) for a in argv])


def report_files(out: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "manifest.json"}


# --- extract --------------------------------------------------------------

def test_extract_three_pages(sample_dir, tmp_path, capsys):
    html = tmp_path / "pages"
    html.mkdir()
    for name in ("a01", "a02", "a03"):
        shutil.copy(sample_dir / "html" / f"{name}.html", html)
    out = tmp_path / "c.jsonl"
    assert run("extract", html, "--config", sample_dir / "pipeline.ini", "--corpus", out) == EXIT_OK
    corpus = parse_corpus(out)
    assert [a.article_id for a in corpus] == ["a01", "a02", "a03"]
    assert "a01.html" in capsys.readouterr().out


def test_extract_empty_dir(sample_dir, tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert run("extract", tmp_path / "empty", "--config", sample_dir / "pipeline.ini") == EXIT_STAGE
    assert "no input pages" in capsys.readouterr().err


def test_extract_keep_partial(sample_dir, tmp_path, capsys):
    html = tmp_path / "pages"
    html.mkdir()
    shutil.copy(sample_dir / "html" / "a01.html", html)
    (html / "broken.html").write_text("<html><body><p>nothing to see</p></body></html>")
    out = tmp_path / "c.jsonl"
    args = ["extract", html, "--config", sample_dir / "pipeline.ini", "--corpus", out]
    assert run(*args) == EXIT_STAGE
    assert not out.exists() and not Path(str(out) + ".partial").exists()
    assert run(*args, "--keep-partial") == EXIT_STAGE
    assert not out.exists()
    partial = parse_corpus(Path(str(out) + ".partial"))
    assert [a.article_id for a in partial] == ["a01"]
    assert "broken.html" in capsys.readouterr().err


def test_extract_missing_selector_config(sample_dir, tmp_path):
    assert run("extract", sample_dir / "html", "--config", sample_dir / "pipeline.ini",
               "--extraction", tmp_path / "none.ini") == EXIT_CONFIG


# --- run-all --------------------------------------------------------------

def test_run_all_matches_golden(sample_dir):
    assert run("run-all", "--config", sample_dir / "pipeline.ini") == EXIT_OK
    out = sample_dir / "report"
    files = report_files(out)
    assert sorted(files) == sorted(TABLES)
    for name, data in files.items():
        assert data == (GOLDEN / name).read_bytes(), name
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["articles"] == 10 and manifest["statements"] == 37 and manifest["runs"] == 3
    assert manifest["scorer_id"].startswith("mock-seed2024@")
    assert manifest["config_hash"] == load_config(sample_dir / "pipeline.ini").config_hash()
    assert manifest["files"] == sorted(TABLES)


def test_run_all_warm_rerun_identical(sample_dir, monkeypatch):
    cfg = sample_dir / "pipeline.ini"
    assert run("run-all", "--config", cfg) == EXIT_OK
    first = report_files(sample_dir / "report")
    scores = (sample_dir / "work" / "scores.jsonl").read_bytes()
    calls = []
    from ricalign import scoring
    original = scoring.MockScorer.request
    monkeypatch.setattr(scoring.MockScorer, "request",
                        lambda self, st, r: calls.append(1) or original(self, st, r))
    assert run("run-all", "--config", cfg) == EXIT_OK
    assert calls == []
    assert report_files(sample_dir / "report") == first
    assert (sample_dir / "work" / "scores.jsonl").read_bytes() == scores


def test_run_all_format_restricts(sample_dir, tmp_path):
    out = tmp_path / "only-md"
    assert run("run-all", "--config", sample_dir / "pipeline.ini", "--out", out, "--format", "md") == 0
    assert sorted(report_files(out)) == sorted(t for t in TABLES if t.endswith(".md"))


def test_remote_without_key_is_config_error(sample_dir, monkeypatch, capsys):
    monkeypatch.delenv("SCORING_API_KEY", raising=False)
    code = run("run-all", "--config", sample_dir / "pipeline.ini", "--scorer", "remote")
    assert code == EXIT_CONFIG
    assert "SCORING_API_KEY" in capsys.readouterr().err
    assert not (sample_dir / "work").exists()


def test_bad_config_values(sample_dir, tmp_path):
    text = (sample_dir / "pipeline.ini").read_text()
    bad = sample_dir / "bad.ini"
    bad.write_text(text.replace("runs = 3", "runs = 0"))
    assert run("run-all", "--config", bad) == EXIT_CONFIG
    bad.write_text(text + "\n[extra]\nx = 1\n")
    assert run("run-all", "--config", bad) == EXIT_CONFIG
    bad.write_text(text.replace("seed = 2024", "seed = lots"))
    assert run("run-all", "--config", bad) == EXIT_CONFIG
    assert run("run-all", "--config", tmp_path / "missing.ini") == EXIT_CONFIG


def test_corrupt_corpus_is_stage_failure(sample_dir, capsys):
    (sample_dir / "corpus.jsonl").write_text("{broken\n")
    assert run("run-all", "--config", sample_dir / "pipeline.ini") == EXIT_STAGE
    assert "[ingest]" in capsys.readouterr().err


def test_config_hash_changes():
    base = PipelineConfig(base_dir=Path("/x"))
    assert base.config_hash() == PipelineConfig(base_dir=Path("/y")).config_hash()
    assert base.replace("scorer", seed=1).config_hash() != base.config_hash()
    assert base.replace("report", metric="nominal").config_hash() != base.config_hash()
    assert base.replace("paths", out="elsewhere").config_hash() != base.config_hash()


def test_validate_rejects_run_outside_range():
    with pytest.raises(ConfigError):
        PipelineConfig().replace("report", run=5).validate()


# --- individual stages ----------------------------------------------------

def test_stages_one_by_one_match_run_all(sample_dir, tmp_path, capsys):
    cfg = sample_dir / "pipeline.ini"
    assert run("score", "--config", cfg) == EXIT_OK
    assert "scored 111 statement runs" in capsys.readouterr().out
    assert run("agree", "--config", cfg) == EXIT_OK
    assert "10 articles" in capsys.readouterr().out
    alpha_csv = (sample_dir / "work" / "alpha.csv").read_text().splitlines()
    assert alpha_csv[0] == "article_id,alpha,d_o,d_e,n_units,n_pairable"
    assert len(alpha_csv) == 11
    assert run("enrich", "--config", cfg) == EXIT_OK
    assert "with citations" in capsys.readouterr().out
    out = tmp_path / "staged"
    assert run("report", "--config", cfg, "--out", out) == EXIT_OK
    for name, data in report_files(out).items():
        assert data == (GOLDEN / name).read_bytes(), name


def test_report_without_scores_fails(sample_dir):
    assert run("report", "--config", sample_dir / "pipeline.ini") == EXIT_STAGE


def test_score_runs_override(sample_dir, capsys):
    assert run("score", "--config", sample_dir / "pipeline.ini", "--runs", "1") == EXIT_OK
    assert "scored 37 statement runs" in capsys.readouterr().out


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    text = capsys.readouterr().out
    for cmd in ("extract", "score", "agree", "enrich", "report", "run-all"):
        assert cmd in text


from __future__ import annotations

import json
from pathlib import Path

import pytest

from templatic.analysis import MetricDelta, PreferenceAnnotation, Preference, affinity
from templatic.cli import Report, load_report, main, write_report

DATA = Path(__file__).parent / "data"

WORKED_LATEX = (
    "\\documentclass{beamer}\\begin{document}"
    "\\begin{frame}a b c\\end{frame}"
    "\\begin{frame}d e f\\end{frame}"
    "\\begin{frame}x y z\\end{frame}"
    "\\end{document}"
)


def write_jsonl(path: Path, rows) -> Path:
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    return path


@pytest.fixture
def worked_corpus(tmp_path):
    corpus = write_jsonl(
        tmp_path / "corpus.jsonl",
        [{"id": "w1", "template": "slides", "reference_panels": ["a b c", "d e f"]}],
    )
    generated = write_jsonl(
        tmp_path / "generated.jsonl", [{"id": "w1", "latex": WORKED_LATEX}]
    )
    return corpus, generated


@pytest.fixture
def gen_corpus(tmp_path):
    rows = [
        {
            "id": f"doc{i}",
            "template": "slides",
            "input_text": f"Document {i} talks about topic {i} in detail. " * 5,
            "reference_panels": [f"topic {i} intro", f"topic {i} details"],
        }
        for i in range(3)
    ]
    return write_jsonl(tmp_path / "gen_corpus.jsonl", rows)


class TestScore:
    def test_worked_example_row(self, worked_corpus, tmp_path, capsys):
        corpus, generated = worked_corpus
        out = tmp_path / "report.json"
        code = main([
            "score", "--corpus", str(corpus), "--generated", str(generated),
            "--metric", "rouge_l", "--out", str(out),
        ])
        assert code == 0
        report = load_report(out)
        row = report.rows[0]
        assert row["id"] == "w1"
        assert row["f1"] == pytest.approx(0.404354, abs=1e-6)
        assert report.aggregate["f1"] == pytest.approx(0.404354, abs=1e-6)
        assert report.metadata["config_hash"]

    def test_stdout_when_no_out(self, worked_corpus, capsys):
        corpus, generated = worked_corpus
        assert main(["score", "--corpus", str(corpus), "--generated", str(generated)]) == 0
        printed = json.loads(capsys.readouterr().out)
        assert printed["rows"][0]["id"] == "w1"

    def test_csv_format(self, worked_corpus, tmp_path):
        corpus, generated = worked_corpus
        out = tmp_path / "report.csv"
        assert main([
            "score", "--corpus", str(corpus), "--generated", str(generated),
            "--format", "csv", "--out", str(out),
        ]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("id,metric,q_p")
        assert lines[-1].startswith("__aggregate__")

    def test_missing_generated_id(self, worked_corpus, tmp_path):
        corpus, _ = worked_corpus
        empty = write_jsonl(tmp_path / "none.jsonl", [{"id": "other", "latex": "x"}])
        assert main(["score", "--corpus", str(corpus), "--generated", str(empty)]) == 1

    def test_reports_identical_except_timestamp(self, worked_corpus, tmp_path):
        corpus, generated = worked_corpus
        outs = [tmp_path / "r1.json", tmp_path / "r2.json"]
        for out in outs:
            main([
                "score", "--corpus", str(corpus), "--generated", str(generated),
                "--out", str(out), "--seed", "7",
            ])
        docs = [json.loads(p.read_text()) for p in outs]
        for doc in docs:
            doc["metadata"].pop("created_at")
        assert docs[0] == docs[1]


class TestExtract:
    def test_writes_panel_files(self, tmp_path, capsys):
        out_dir = tmp_path / "panels"
        code = main([
            "extract", "--in", str(DATA / "sample_deck.tex"),
            "--template", "slides", "--out", str(out_dir),
        ])
        assert code == 0
        assert (out_dir / "sample_deck.panels.json").exists()
        assert (out_dir / "sample_deck.panels.txt").exists()
        assert "3 panels" in capsys.readouterr().out

    def test_directory_input(self, tmp_path):
        src = tmp_path / "docs"
        src.mkdir()
        (src / "a.tex").write_text("\\begin{frame}one\\end{frame}")
        (src / "b.tex").write_text("\\begin{frame}two\\end{frame}")
        out_dir = tmp_path / "panels"
        assert main([
            "extract", "--in", str(src), "--template", "slides", "--out", str(out_dir),
        ]) == 0
        assert {p.name for p in out_dir.glob("*.json")} == {
            "a.panels.json", "b.panels.json",
        }


class TestGenerate:
    def test_stub_generation_deterministic(self, gen_corpus, tmp_path):
        outs = [tmp_path / "g1.jsonl", tmp_path / "g2.jsonl"]
        for out in outs:
            code = main([
                "generate", "--corpus", str(gen_corpus), "--stub",
                "--rep-mode", "json", "--out", str(out),
            ])
            assert code == 0
        assert outs[0].read_bytes() == outs[1].read_bytes()

    def test_rows_shape(self, gen_corpus, tmp_path):
        out = tmp_path / "gen.jsonl"
        main(["generate", "--corpus", str(gen_corpus), "--stub", "--out", str(out)])
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert [r["id"] for r in rows] == ["doc0", "doc1", "doc2"]
        for row in rows:
            assert row["mode"] == "json"
            assert row["style"] is True
            assert "\\begin{document}" in row["latex"]
            assert "ir" in row

    def test_none_mode_has_no_ir(self, gen_corpus, tmp_path):
        out = tmp_path / "gen.jsonl"
        main([
            "generate", "--corpus", str(gen_corpus), "--stub",
            "--rep-mode", "none", "--out", str(out),
        ])
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert all("ir" not in r for r in rows)

    def test_multiple_modes_rejected(self, gen_corpus, tmp_path):
        assert main([
            "generate", "--corpus", str(gen_corpus), "--stub",
            "--rep-mode", "json", "--rep-mode", "none",
            "--out", str(tmp_path / "g.jsonl"),
        ]) == 1

    def test_endpoint_required_without_stub(self, gen_corpus, tmp_path):
        assert main([
            "generate", "--corpus", str(gen_corpus), "--out", str(tmp_path / "g.jsonl"),
        ]) == 1


class TestBench:
    def test_two_by_two_matrix(self, gen_corpus, tmp_path):
        out = tmp_path / "bench.json"
        code = main([
            "bench", "--corpus", str(gen_corpus), "--stub",
            "--rep-mode", "none", "--rep-mode", "json",
            "--metric", "rouge_l", "--out", str(out),
        ])
        assert code == 0
        report = load_report(out)
        assert len(report.rows) == 4
        combos = {(r["mode"], r["style"]) for r in report.rows}
        assert combos == {("none", False), ("none", True), ("json", False), ("json", True)}
        for row in report.rows:
            assert row["n_docs"] == 3
            assert 0.0 <= row["f1"] <= 1.0

    def test_single_style_flag(self, gen_corpus, tmp_path):
        out = tmp_path / "bench.json"
        main([
            "bench", "--corpus", str(gen_corpus), "--stub",
            "--rep-mode", "none", "--style", "--out", str(out),
        ])
        report = load_report(out)
        assert len(report.rows) == 1
        assert report.rows[0]["style"] is True


@pytest.fixture
def human_eval_files(tmp_path):
    annotations = write_jsonl(
        tmp_path / "annotations.jsonl",
        [
            {"doc_id": "d1", "annotator_id": "a", "preferred": "with", "degree": 3},
            {"doc_id": "d1", "annotator_id": "b", "preferred": "with", "degree": 2},
            {"doc_id": "d2", "annotator_id": "a", "preferred": "skip", "degree": 1},
            {"doc_id": "d2", "annotator_id": "b", "preferred": "with", "degree": 1},
            {"doc_id": "d3", "annotator_id": "a", "preferred": "skip", "degree": 2},
            {"doc_id": "d3", "annotator_id": "b", "preferred": "skip", "degree": 3},
        ],
    )
    deltas = tmp_path / "deltas.csv"
    deltas.write_text(
        "doc_id,metric,with_score,skip_score\n"
        "d1,rouge_l,0.52,0.31\n"
        "d2,rouge_l,0.40,0.38\n"
        "d3,rouge_l,0.20,0.45\n"
        "d1,bleu,0.12,0.02\n"
        "d2,bleu,0.05,0.04\n"
        "d3,bleu,0.03,0.06\n"
    )
    return annotations, deltas


class TestCorrelate:
    def test_r_values_match_analysis_module(self, human_eval_files, tmp_path):
        annotations_path, deltas_path = human_eval_files
        out = tmp_path / "corr.json"
        code = main([
            "correlate", "--annotations", str(annotations_path),
            "--deltas", str(deltas_path), "--out", str(out),
        ])
        assert code == 0
        report = load_report(out)
        assert [r["metric"] for r in report.rows] == ["bleu", "rouge_l"]

        anns = [
            PreferenceAnnotation("d1", "a", Preference.WITH_REP, 3),
            PreferenceAnnotation("d1", "b", Preference.WITH_REP, 2),
            PreferenceAnnotation("d2", "a", Preference.SKIP_REP, 1),
            PreferenceAnnotation("d2", "b", Preference.WITH_REP, 1),
            PreferenceAnnotation("d3", "a", Preference.SKIP_REP, 2),
            PreferenceAnnotation("d3", "b", Preference.SKIP_REP, 3),
        ]
        expected_rouge = affinity(
            [MetricDelta("d1", "rouge_l", 0.52 - 0.31),
             MetricDelta("d2", "rouge_l", 0.40 - 0.38),
             MetricDelta("d3", "rouge_l", 0.20 - 0.45)],
            anns,
        )
        by_metric = {r["metric"]: r for r in report.rows}
        assert by_metric["rouge_l"]["r"] == pytest.approx(expected_rouge.r, abs=1e-12)
        assert by_metric["rouge_l"]["n"] == 6

    def test_metric_filter_unknown(self, human_eval_files, tmp_path):
        annotations_path, deltas_path = human_eval_files
        assert main([
            "correlate", "--annotations", str(annotations_path),
            "--deltas", str(deltas_path), "--metric", "meteor",
        ]) == 1

    def test_zero_variance_deltas_is_validation_error(self, human_eval_files, tmp_path, capsys):
        annotations_path, _ = human_eval_files
        flat = tmp_path / "flat.csv"
        flat.write_text(
            "doc_id,metric,with_score,skip_score\n"
            "d1,rouge_l,0.5,0.5\nd2,rouge_l,0.5,0.5\nd3,rouge_l,0.5,0.5\n"
        )
        assert main([
            "correlate", "--annotations", str(annotations_path), "--deltas", str(flat),
        ]) == 1
        assert "variance" in capsys.readouterr().err


class TestAgreement:
    def test_alpha_and_rates(self, human_eval_files, capsys):
        annotations_path, _ = human_eval_files
        assert main(["agreement", "--annotations", str(annotations_path)]) == 0
        row = json.loads(capsys.readouterr().out)["rows"][0]
        assert row["n_documents"] == 3
        assert row["n_annotations"] == 6
        # d1 unanimous with, d2 tie (counts against), d3 unanimous skip
        assert row["majority_rate"] == pytest.approx(1 / 3)
        assert row["unanimous_rate"] == pytest.approx(1 / 3)
        assert row["alpha"] <= 1.0


class TestExitCodes:
    def test_missing_corpus_is_validation_error(self, tmp_path, capsys):
        assert main([
            "score", "--corpus", str(tmp_path / "nope.jsonl"),
            "--generated", str(tmp_path / "also-nope.jsonl"),
        ]) == 1
        assert "error:" in capsys.readouterr().err

    def test_unknown_metric_is_validation_error(self, worked_corpus):
        corpus, generated = worked_corpus
        assert main([
            "score", "--corpus", str(corpus), "--generated", str(generated),
            "--metric", "nope",
        ]) == 1

    def test_corpus_parse_error_names_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": "a", "template": "slides"}\nbroken\n')
        generated = write_jsonl(tmp_path / "g.jsonl", [{"id": "a", "latex": "x"}])
        assert main(["score", "--corpus", str(bad), "--generated", str(generated)]) == 1
        assert "line 2" in capsys.readouterr().err

    def test_unreachable_endpoint_is_runtime_error(self, gen_corpus, tmp_path, capsys):
        code = main([
            "generate", "--corpus", str(gen_corpus),
            "--endpoint", "http://127.0.0.1:9/complete", "--model", "m",
            "--out", str(tmp_path / "g.jsonl"),
        ])
        assert code == 2
        assert "runtime error" in capsys.readouterr().err

    def test_empty_generated_mapping_validation(self, tmp_path):
        corpus = write_jsonl(
            tmp_path / "c.jsonl",
            [{"id": "a", "template": "slides", "reference_panels": []}],
        )
        generated = write_jsonl(tmp_path / "g.jsonl", [{"id": "a", "latex": "x"}])
        assert main(["score", "--corpus", str(corpus), "--generated", str(generated)]) == 1


class TestConfigFile:
    def test_config_file_supplies_values(self, worked_corpus, tmp_path):
        corpus, generated = worked_corpus
        out = tmp_path / "r.json"
        config = tmp_path / "run.json"
        config.write_text(json.dumps({
            "corpus": str(corpus),
            "generated": str(generated),
            "metric": "rouge_l",
            "out": str(out),
        }))
        assert main(["score", "--config", str(config)]) == 0
        assert out.exists()

    def test_flags_override_config(self, worked_corpus, tmp_path):
        corpus, generated = worked_corpus
        config = tmp_path / "run.json"
        out = tmp_path / "flag.json"
        config.write_text(json.dumps({
            "corpus": str(corpus),
            "generated": str(generated),
            "out": str(tmp_path / "config.json"),
        }))
        assert main(["score", "--config", str(config), "--out", str(out)]) == 0
        assert out.exists()
        assert not (tmp_path / "config.json").exists()

    def test_unknown_config_key(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"corpuss": "x"}))
        assert main(["score", "--config", str(config)]) == 1

    def test_null_config_values_ignored(self, worked_corpus, tmp_path):
        corpus, generated = worked_corpus
        config = tmp_path / "run.json"
        config.write_text(json.dumps({
            "corpus": str(corpus), "generated": str(generated), "metric": None,
        }))
        assert main(["score", "--config", str(config)]) == 0

    def test_bad_metric_type_is_validation_error(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"metric": 7}))
        assert main(["score", "--config", str(config)]) == 1

    def test_endpoint_object_in_config(self, gen_corpus, tmp_path, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({
            "corpus": str(gen_corpus),
            "endpoint": {"url": "http://127.0.0.1:9/x", "model": "m"},
            "out": str(tmp_path / "g.jsonl"),
        }))
        # endpoint settings flow through (unreachable -> runtime error, not
        # the missing-endpoint validation error)
        assert main(["generate", "--config", str(config)]) == 2


class TestWorkflow:
    def test_generate_score_correlate_pipeline(self, gen_corpus, tmp_path, capsys):
        """Full offline loop: two pipeline variants, per-document deltas,
        affinity against synthetic annotations."""
        reports = {}
        for mode in ("json", "none"):
            gen_out = tmp_path / f"gen-{mode}.jsonl"
            assert main([
                "generate", "--corpus", str(gen_corpus), "--stub",
                "--rep-mode", mode, "--out", str(gen_out),
            ]) == 0
            report_out = tmp_path / f"score-{mode}.json"
            assert main([
                "score", "--corpus", str(gen_corpus), "--generated", str(gen_out),
                "--metric", "rouge_l", "--out", str(report_out),
            ]) == 0
            reports[mode] = {r["id"]: r for r in load_report(report_out).rows}

        # stub views score identically across documents, so spread the
        # baseline side to give the deltas variance
        deltas = tmp_path / "deltas.csv"
        lines = ["doc_id,metric,with_score,skip_score"]
        for i, doc_id in enumerate(sorted(reports["json"])):
            with_score = reports["json"][doc_id]["f1"]
            skip_score = reports["none"][doc_id]["f1"] - 0.01 * (i + 1)
            lines.append(f"{doc_id},rouge_l,{with_score},{skip_score}")
        deltas.write_text("\n".join(lines) + "\n")

        annotations = write_jsonl(
            tmp_path / "ann.jsonl",
            [
                {"doc_id": d, "annotator_id": a, "preferred": p, "degree": g}
                for d, a, p, g in [
                    ("doc0", "a", "with", 3), ("doc0", "b", "with", 1),
                    ("doc1", "a", "skip", 2), ("doc1", "b", "with", 2),
                    ("doc2", "a", "with", 1), ("doc2", "b", "skip", 3),
                ]
            ],
        )
        out = tmp_path / "affinity.json"
        assert main([
            "correlate", "--annotations", str(annotations),
            "--deltas", str(deltas), "--out", str(out),
        ]) == 0
        rows = load_report(out).rows
        assert rows[0]["metric"] == "rouge_l"
        assert -1.0 <= rows[0]["r"] <= 1.0
        assert rows[0]["n"] == 6

    def test_bench_reruns_byte_identical_except_timestamp(self, gen_corpus, tmp_path):
        outs = [tmp_path / "b1.json", tmp_path / "b2.json"]
        for out in outs:
            assert main([
                "bench", "--corpus", str(gen_corpus), "--stub",
                "--rep-mode", "json", "--style", "--out", str(out),
            ]) == 0
        docs = [json.loads(p.read_text()) for p in outs]
        for doc in docs:
            doc["metadata"].pop("created_at")
        assert docs[0] == docs[1]


class TestReportIO:
    def test_load_report_checks_aggregate(self, tmp_path):
        path = tmp_path / "r.json"
        path.write_text(json.dumps({
            "rows": [{"f1": 1.0}, {"f1": 0.0}],
            "aggregate": {"f1": 0.9},
            "metadata": {},
        }))
        with pytest.raises(ValueError, match="aggregate"):
            load_report(path)

    def test_write_is_atomic_no_tmp_left(self, tmp_path):
        out = tmp_path / "r.json"
        write_report(Report(rows=[{"f1": 1.0}], aggregate=None, metadata={}), out)
        assert out.exists()
        assert not list(tmp_path.glob("*.tmp"))

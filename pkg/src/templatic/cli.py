"""Command-line surface tying everything together.

Subcommands: extract (documents -> panel files), score (reference vs
generated corpora), generate (run the two-step pipeline), bench (variant
sweep: representation modes x style x metrics), correlate (metric deltas
vs human preferences) and agreement (annotator agreement and preference
rates).

Exit codes: 0 success, 1 validation error (bad config/inputs, with the
offending field or file line named), 2 runtime error. Reports are written
atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .analysis import (
    AnnotationParseError,
    DegenerateInputError,
    InsufficientDataError,
    MissingDeltaError,
    affinity,
    krippendorff_alpha,
    load_annotations,
    load_deltas,
    preference_rate,
)
from .extract import (
    CorpusError,
    CorpusRecord,
    SourceFormat,
    extract_panels,
    load_corpus,
    save_panels,
    write_panels_text,
)
from .generate import (
    GenerationConfig,
    RepresentationMode,
    ensure_latex_document,
    generate_view,
)
from .llm import CompletionEndpointConfig, HttpCompletionClient, StubCompletionClient
from .metrics import MetricId
from .panels import Role, TemplateKind, make_sequence, template_from_name
from .tae import corpus_score

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

_SCORE_FIELDS = ("q_p", "q_r", "o_p", "o_r", "l", "precision", "recall", "f1")


class ValidationFailure(Exception):
    """User-facing configuration or input-file problem (exit code 1)."""


@dataclass
class RunConfig:
    subcommand: str = ""
    corpus: Optional[str] = None
    generated: Optional[str] = None
    inputs: Optional[str] = None
    annotations: Optional[str] = None
    deltas: Optional[str] = None
    metrics: list[str] = field(default_factory=list)
    template: Optional[str] = None
    source_format: Optional[str] = None
    role: str = "generated"
    rep_modes: list[str] = field(default_factory=list)
    style: Optional[bool] = None
    temperature: float = 0.0
    max_input_tokens: Optional[int] = None
    endpoint_url: Optional[str] = None
    endpoint_model: Optional[str] = None
    stub: bool = False
    stub_dir: Optional[str] = None
    out: Optional[str] = None
    format: str = "json"
    jobs: int = 1
    seed: int = 0

    def hash(self) -> str:
        # the output location does not affect results, so it stays out of
        # the reproducibility hash
        fields = {k: v for k, v in asdict(self).items() if k != "out"}
        canonical = json.dumps(fields, sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


@dataclass
class Report:
    rows: list[dict]
    aggregate: Optional[dict]
    metadata: dict


def _atomic_write(path: Path, body: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(body, encoding="utf-8")
    os.replace(tmp, path)


def write_report(report: Report, path: str | Path, fmt: str = "json") -> None:
    """Serialize a report atomically. CSV keeps rows (plus an aggregate
    row when present); metadata is JSON-only."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        body = json.dumps(
            {"rows": report.rows, "aggregate": report.aggregate, "metadata": report.metadata},
            indent=2,
            sort_keys=True,
        )
        _atomic_write(path, body + "\n")
        return
    if fmt != "csv":
        raise ValidationFailure(f"format must be json or csv, got {fmt!r}")
    fieldnames = list(report.rows[0].keys()) if report.rows else []
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, extrasaction="ignore")
    writer.writeheader()
    for row in report.rows:
        writer.writerow(row)
    if report.aggregate is not None and fieldnames:
        agg = {k: report.aggregate.get(k, "") for k in fieldnames}
        if "id" in agg:
            agg["id"] = "__aggregate__"
        writer.writerow(agg)
    _atomic_write(path, buf.getvalue())


def load_report(path: str | Path) -> Report:
    """Read a JSON report back, checking aggregate-vs-rows consistency."""
    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    report = Report(rows=doc["rows"], aggregate=doc.get("aggregate"), metadata=doc.get("metadata", {}))
    if report.aggregate:
        n = len(report.rows)
        for key in _SCORE_FIELDS:
            if key in report.aggregate and all(key in r for r in report.rows) and n:
                mean = sum(float(r[key]) for r in report.rows) / n
                if abs(mean - float(report.aggregate[key])) > 1e-9:
                    raise ValueError(
                        f"aggregate {key} does not equal the mean of rows: "
                        f"{report.aggregate[key]} vs {mean}"
                    )
    return report


def _metadata(cfg: RunConfig) -> dict:
    return {
        "config_hash": cfg.hash(),
        "created_at": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
        "seed": cfg.seed,
        "subcommand": cfg.subcommand,
    }


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValidationFailure(message)


def _require_file(path: Optional[str], flag: str) -> Path:
    _require(bool(path), f"{flag} is required")
    p = Path(path)  # type: ignore[arg-type]
    _require(p.exists(), f"{flag}: file not found: {p}")
    return p


def _template(cfg: RunConfig) -> TemplateKind:
    _require(bool(cfg.template), "--template is required")
    try:
        return template_from_name(cfg.template)  # type: ignore[arg-type]
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from None


def _source_format(cfg: RunConfig) -> Optional[SourceFormat]:
    if cfg.source_format is None:
        return None
    try:
        return SourceFormat(cfg.source_format)
    except ValueError:
        raise ValidationFailure(
            f"--source-format: unknown format {cfg.source_format!r}"
        ) from None


def _parse_metric(name: str) -> MetricId:
    try:
        metric = MetricId(name)
    except ValueError:
        raise ValidationFailure(f"--metric: unknown metric {name!r}") from None
    _require(
        metric in (MetricId.ROUGE_L, MetricId.BLEU, MetricId.METEOR),
        f"--metric: {metric.value} needs an embedding endpoint; not supported by the CLI scorer",
    )
    return metric


def _single_metric(cfg: RunConfig) -> MetricId:
    metrics = cfg.metrics or [MetricId.ROUGE_L.value]
    _require(len(metrics) == 1, "--metric: exactly one metric expected here")
    return _parse_metric(metrics[0])


def _completion_client(cfg: RunConfig):
    if cfg.stub or cfg.stub_dir:
        return StubCompletionClient(cfg.stub_dir)
    _require(
        bool(cfg.endpoint_url) and bool(cfg.endpoint_model),
        "--endpoint and --model are required unless --stub is set",
    )
    return HttpCompletionClient(
        CompletionEndpointConfig(url=cfg.endpoint_url, model=cfg.endpoint_model)  # type: ignore[arg-type]
    )


def _load_generated(path: Path) -> dict[str, str]:
    generated: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationFailure(f"--generated line {line_no}: invalid JSON: {exc.msg}")
            if "id" not in raw:
                raise ValidationFailure(f"--generated line {line_no}: missing field 'id'")
            text = raw.get("latex", raw.get("text"))
            if not isinstance(text, str):
                raise ValidationFailure(
                    f"--generated line {line_no}: missing field 'latex'"
                )
            rec_id = str(raw["id"])
            if rec_id in generated:
                raise ValidationFailure(f"--generated line {line_no}: duplicate id {rec_id!r}")
            generated[rec_id] = text
    return generated


# --- subcommands ------------------------------------------------------------


def cmd_extract(cfg: RunConfig) -> int:
    src = _require_file(cfg.inputs, "--in")
    template = _template(cfg)
    fmt = _source_format(cfg)
    _require(bool(cfg.out), "--out directory is required")
    out_dir = Path(cfg.out)  # type: ignore[arg-type]
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        role = Role(cfg.role)
    except ValueError:
        raise ValidationFailure(f"--role: must be reference or generated, got {cfg.role!r}") from None
    files = sorted(p for p in src.iterdir() if p.suffix in (".tex", ".txt", ".md")) if src.is_dir() else [src]
    _require(bool(files), f"--in: no .tex/.txt/.md files under {src}")
    for doc_path in files:
        result = extract_panels(
            doc_path.read_text(encoding="utf-8"), template, fmt, role=role
        )
        save_panels(result.sequence, out_dir / f"{doc_path.stem}.panels.json")
        write_panels_text(result.sequence, out_dir / f"{doc_path.stem}.panels.txt")
        note = " (degraded)" if result.degraded else ""
        print(f"{doc_path.name}: {len(result.sequence)} panels{note}")
    return EXIT_OK


def cmd_score(cfg: RunConfig) -> int:
    corpus_path = _require_file(cfg.corpus, "--corpus")
    generated_path = _require_file(cfg.generated, "--generated")
    metric = _single_metric(cfg)
    records = load_corpus(corpus_path)
    _require(bool(records), "--corpus: no records")
    generated = _load_generated(generated_path)

    pairs = []
    degraded_flags = []
    for rec in records:
        _require(
            bool(rec.reference_panels),
            f"record {rec.id!r}: reference_panels is empty (required for scoring)",
        )
        _require(rec.id in generated, f"no generated output for record {rec.id!r}")
        reference = make_sequence(rec.reference_panels, Role.REFERENCE, rec.template)
        extraction = extract_panels(
            generated[rec.id], rec.template, _source_format(cfg), role=Role.GENERATED
        )
        pairs.append((reference, extraction.sequence))
        degraded_flags.append(extraction.degraded)

    result = corpus_score(pairs, metric, jobs=max(1, cfg.jobs))
    rows = []
    for rec, score, degraded in zip(records, result.per_document, degraded_flags):
        row = {"id": rec.id, "metric": metric.value}
        row.update({f: getattr(score, f) for f in _SCORE_FIELDS})
        row.update(
            {"ref_count": score.ref_count, "gen_count": score.gen_count, "degraded": degraded}
        )
        rows.append(row)
    aggregate = {"metric": metric.value}
    aggregate.update({f: getattr(result.aggregate, f) for f in _SCORE_FIELDS})
    aggregate.update(
        {
            "ref_count": result.aggregate.ref_count,
            "gen_count": result.aggregate.gen_count,
            "n_docs": len(rows),
        }
    )
    report = Report(rows=rows, aggregate=aggregate, metadata=_metadata(cfg))
    _emit(report, cfg)
    return EXIT_OK


def _generation_config(cfg: RunConfig, template: TemplateKind, mode: str, style: bool) -> GenerationConfig:
    try:
        rep = RepresentationMode(mode)
    except ValueError:
        raise ValidationFailure(f"--rep-mode: unknown mode {mode!r}") from None
    try:
        return GenerationConfig(
            template=template,
            mode=rep,
            use_style=style,
            temperature=cfg.temperature,
            max_input_tokens=cfg.max_input_tokens,
        )
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from None


def _generate_rows(
    records: Sequence[CorpusRecord], cfg: RunConfig, mode: str, style: bool, client
) -> list[dict]:
    rows = []
    for rec in records:
        _require(
            bool(rec.input_text),
            f"record {rec.id!r}: input_text is empty (required for generation)",
        )
        template = _template(cfg) if cfg.template else rec.template
        gen_cfg = _generation_config(cfg, template, mode, style)
        result = generate_view(rec.input_text, gen_cfg, client)  # type: ignore[arg-type]
        row = {
            "id": rec.id,
            "mode": mode,
            "style": style,
            "latex": ensure_latex_document(result.latex),
        }
        if result.ir is not None:
            row["ir"] = result.ir.to_dict()
        rows.append(row)
    return rows


def cmd_generate(cfg: RunConfig) -> int:
    corpus_path = _require_file(cfg.corpus, "--corpus")
    _require(bool(cfg.out), "--out is required")
    records = load_corpus(corpus_path)
    _require(bool(records), "--corpus: no records")
    _require(
        len(cfg.rep_modes) <= 1, "--rep-mode: generate takes a single mode; use bench for sweeps"
    )
    client = _completion_client(cfg)
    mode = cfg.rep_modes[0] if cfg.rep_modes else RepresentationMode.JSON.value
    style = True if cfg.style is None else cfg.style
    rows = _generate_rows(records, cfg, mode, style, client)
    out = Path(cfg.out)  # type: ignore[arg-type]
    out.parent.mkdir(parents=True, exist_ok=True)
    body = "".join(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n" for row in rows)
    _atomic_write(out, body)
    print(f"wrote {len(rows)} generated documents to {out}")
    return EXIT_OK


def cmd_bench(cfg: RunConfig) -> int:
    corpus_path = _require_file(cfg.corpus, "--corpus")
    records = load_corpus(corpus_path)
    _require(bool(records), "--corpus: no records")
    for rec in records:
        _require(
            bool(rec.reference_panels),
            f"record {rec.id!r}: reference_panels is empty (required for bench)",
        )
    client = _completion_client(cfg)
    modes = cfg.rep_modes or [m.value for m in RepresentationMode]
    styles = [cfg.style] if cfg.style is not None else [False, True]
    metrics = [_parse_metric(name) for name in (cfg.metrics or [MetricId.ROUGE_L.value])]

    rows = []
    for mode in modes:
        for style in styles:
            gen_rows = _generate_rows(records, cfg, mode, style, client)
            pairs = []
            for rec, gen_row in zip(records, gen_rows):
                reference = make_sequence(rec.reference_panels, Role.REFERENCE, rec.template)
                extraction = extract_panels(
                    gen_row["latex"], rec.template, _source_format(cfg), role=Role.GENERATED
                )
                pairs.append((reference, extraction.sequence))
            for metric in metrics:
                result = corpus_score(pairs, metric, jobs=max(1, cfg.jobs))
                rows.append(
                    {
                        "mode": mode,
                        "style": style,
                        "metric": metric.value,
                        "precision": result.aggregate.precision,
                        "recall": result.aggregate.recall,
                        "f1": result.aggregate.f1,
                        "n_docs": len(pairs),
                    }
                )
    report = Report(rows=rows, aggregate=None, metadata=_metadata(cfg))
    _emit(report, cfg)
    return EXIT_OK


def cmd_correlate(cfg: RunConfig) -> int:
    annotations = load_annotations(_require_file(cfg.annotations, "--annotations"))
    deltas = load_deltas(_require_file(cfg.deltas, "--deltas"))
    _require(bool(annotations), "--annotations: no annotations")
    _require(bool(deltas), "--deltas: no deltas")
    by_metric: dict[str, list] = {}
    for delta in deltas:
        by_metric.setdefault(delta.metric, []).append(delta)
    names = cfg.metrics or sorted(by_metric)
    rows = []
    for name in names:
        _require(name in by_metric, f"--metric: no deltas for metric {name!r}")
        result = affinity(by_metric[name], annotations)
        rows.append({"metric": name, "r": result.r, "n": result.n, "p_value": result.p_value})
    report = Report(rows=rows, aggregate=None, metadata=_metadata(cfg))
    _emit(report, cfg)
    return EXIT_OK


def cmd_agreement(cfg: RunConfig) -> int:
    annotations = load_annotations(_require_file(cfg.annotations, "--annotations"))
    _require(bool(annotations), "--annotations: no annotations")
    alpha = krippendorff_alpha(annotations)
    rates = preference_rate(annotations)
    rows = [
        {
            "alpha": alpha,
            "majority_rate": rates.majority_rate,
            "unanimous_rate": rates.unanimous_rate,
            "n_documents": rates.n_documents,
            "n_annotations": len(annotations),
        }
    ]
    report = Report(rows=rows, aggregate=None, metadata=_metadata(cfg))
    _emit(report, cfg)
    return EXIT_OK


def _emit(report: Report, cfg: RunConfig) -> None:
    if cfg.out:
        write_report(report, cfg.out, cfg.format)
        print(f"wrote report to {cfg.out}")
    else:
        print(json.dumps({"rows": report.rows, "aggregate": report.aggregate}, indent=2, sort_keys=True))


# --- argument parsing -------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="templatic",
        description="Score and generate templatic document views (slides, posters, blogs).",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", help="JSON config file; flags override its values")
        sp.add_argument("--corpus", help="JSON-lines corpus file")
        sp.add_argument("--metric", action="append", dest="metrics", help="similarity metric id (repeatable)")
        sp.add_argument("--template", help="slides | poster | blog")
        sp.add_argument("--rep-mode", action="append", dest="rep_modes", help="none | own | text | json (repeatable)")
        sp.add_argument("--style", action=argparse.BooleanOptionalAction, default=None, help="include style parameters")
        sp.add_argument("--temperature", type=float, default=None)
        sp.add_argument("--max-input-tokens", type=int, default=None)
        sp.add_argument("--endpoint", dest="endpoint_url", help="completion endpoint URL")
        sp.add_argument("--model", dest="endpoint_model", help="completion model id")
        sp.add_argument("--stub", action="store_true", default=None, help="use the offline stub client")
        sp.add_argument("--stub-dir", help="directory of canned completions for the stub client")
        sp.add_argument("--source-format", help="latex_beamer | latex_generic | plain_text | markdown_like")
        sp.add_argument("--out", help="output path (report, corpus, or directory)")
        sp.add_argument("--format", choices=("json", "csv"), default=None, help="report format")
        sp.add_argument("--jobs", type=int, default=None, help="parallel documents")
        sp.add_argument("--seed", type=int, default=None, help="recorded in run metadata")

    sp_extract = sub.add_parser("extract", help="split documents into panel files")
    sp_extract.add_argument("--in", dest="inputs", help="document file or directory")
    sp_extract.add_argument("--role", choices=("reference", "generated"), default=None)
    common(sp_extract)

    sp_score = sub.add_parser("score", help="score generated views against references")
    sp_score.add_argument("--generated", help="JSON-lines generated corpus ({id, latex})")
    common(sp_score)

    common(sub.add_parser("generate", help="run the generation pipeline over a corpus"))
    common(sub.add_parser("bench", help="sweep representation modes x style x metrics"))

    sp_corr = sub.add_parser("correlate", help="metric affinity with human preferences")
    sp_corr.add_argument("--annotations", help="JSON-lines annotations")
    sp_corr.add_argument("--deltas", help="CSV or JSON-lines metric deltas")
    common(sp_corr)

    sp_agree = sub.add_parser("agreement", help="annotator agreement and preference rates")
    sp_agree.add_argument("--annotations", help="JSON-lines annotations")
    common(sp_agree)

    return parser


_LIST_KEYS = {"metrics": ("metric", "metrics"), "rep_modes": ("rep_mode", "rep_modes")}


def _config_from_sources(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=args.subcommand)
    file_values: dict = {}
    if getattr(args, "config", None):
        config_path = Path(args.config)
        if not config_path.exists():
            raise ValidationFailure(f"--config: file not found: {config_path}")
        try:
            file_values = json.loads(config_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationFailure(f"--config: invalid JSON: {exc.msg}") from None
        if not isinstance(file_values, dict):
            raise ValidationFailure("--config: top level must be a JSON object")

    known = {f for f in RunConfig.__dataclass_fields__ if f != "subcommand"}
    for key, value in file_values.items():
        if value is None:
            continue
        target = key
        for attr, aliases in _LIST_KEYS.items():
            if key in aliases:
                target = attr
                try:
                    value = [value] if isinstance(value, str) else [str(v) for v in value]
                except TypeError:
                    raise ValidationFailure(
                        f"--config: {key} must be a string or list of strings"
                    ) from None
        if key == "endpoint" and isinstance(value, dict):
            if "url" in value:
                setattr(cfg, "endpoint_url", str(value["url"]))
            if "model" in value:
                setattr(cfg, "endpoint_model", str(value["model"]))
            continue
        if key == "in":
            target = "inputs"
        if target not in known:
            raise ValidationFailure(f"--config: unknown key {key!r}")
        setattr(cfg, target, value)

    for attr in known:
        if hasattr(args, attr):
            value = getattr(args, attr)
            if value is not None:
                setattr(cfg, attr, value)
    return cfg


_COMMANDS = {
    "extract": cmd_extract,
    "score": cmd_score,
    "generate": cmd_generate,
    "bench": cmd_bench,
    "correlate": cmd_correlate,
    "agreement": cmd_agreement,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config_from_sources(args)
        return _COMMANDS[args.subcommand](cfg)
    except (
        ValidationFailure,
        CorpusError,
        AnnotationParseError,
        DegenerateInputError,
        InsufficientDataError,
        MissingDeltaError,
        FileNotFoundError,
    ) as exc:
        # bad inputs, named; distinct from crashes mid-run
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # runtime failures keep a distinct exit code
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

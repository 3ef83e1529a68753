"""Turn raw documents into panel sequences, and read/write corpus files.

Slides split into one panel per beamer frame, posters into one panel per
top-level section or block, and a blog is always a single panel holding
the whole stripped text. Malformed markup never aborts a run: extraction
degrades to the plain-text rule and flags the result instead.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .panels import (
    DEFAULT_TOKENIZER,
    PANEL_RULE_FRAMES,
    PANEL_RULE_WHOLE,
    PanelSequence,
    Role,
    TemplateKind,
    TokenizerConfig,
    make_sequence,
    template_from_name,
)

PANEL_DELIMITER = "==="


class SourceFormat(Enum):
    LATEX_BEAMER = "latex_beamer"
    LATEX_GENERIC = "latex_generic"
    PLAIN_TEXT = "plain_text"
    MARKDOWN_LIKE = "markdown_like"


class CorpusError(ValueError):
    """Invalid corpus file; carries the 1-based line number when known."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CorpusParseError(CorpusError):
    pass


class MissingFieldError(CorpusError):
    pass


class DuplicateIdError(CorpusError):
    pass


@dataclass(frozen=True)
class ExtractionResult:
    """Extracted panels plus a degradation flag.

    ``degraded`` is set when the requested markup rule found no structure
    and extraction fell back to plain-text splitting; ``notes`` says why.
    """

    sequence: PanelSequence
    degraded: bool = False
    notes: tuple[str, ...] = ()


# --- LaTeX stripping -------------------------------------------------------

_COMMENT_RE = re.compile(r"(?<!\\)%[^\n]*")
_MATH_ENV_RE = re.compile(
    r"\\begin\{(equation|align|gather|multline|eqnarray|math|displaymath)\*?\}"
    r".*?\\end\{\1\*?\}",
    re.DOTALL,
)
_DISPLAY_MATH_RE = re.compile(r"\$\$.*?\$\$|\\\[.*?\\\]", re.DOTALL)
_INLINE_MATH_RE = re.compile(r"\$[^$\n]*\$")

_DROP_COMMANDS = (
    "includegraphics", "label", "ref", "eqref", "pageref", "cite", "citep",
    "citet", "citealp", "url", "usepackage", "documentclass", "input",
    "include", "bibliography", "bibliographystyle", "graphicspath",
    "hypersetup", "usetheme", "usecolortheme", "usefonttheme",
    "setbeamertemplate", "setbeamercolor", "newcommand", "renewcommand",
    "definecolor", "geometry", "titlegraphic", "institute", "date",
    "vspace", "hspace", "pagenumbering", "setlength", "addtolength",
)
_DROP_WITH_ARG_RE = re.compile(
    r"\\(?:" + "|".join(_DROP_COMMANDS) + r")\*?\s*(?:\[[^\]]*\])*\{[^{}]*\}"
)
_HREF_RE = re.compile(r"\\href\s*\{[^{}]*\}")
_LAYOUT_ENV_ARG_RE = re.compile(
    r"\\begin\{(tabular|tabularx|columns|column|minipage)\*?\}"
    r"(?:\[[^\]]*\])*(?:\{[^{}]*\})+"
)
_BEGIN_END_RE = re.compile(r"\\(?:begin|end)\s*\{[a-zA-Z*]+\}(?:\[[^\]]*\])?")
_ITEM_RE = re.compile(r"\\item\s*(?:\[[^\]]*\])?")
_LINEBREAK_RE = re.compile(r"\\\\(?:\[[^\]]*\])?")
_UNWRAP_RE = re.compile(r"\\[a-zA-Z]+\*?\s*(?:\[[^\]]*\])?\{([^{}]*)\}")
_BARE_COMMAND_RE = re.compile(r"\\[a-zA-Z]+\*?")

_ESCAPES = {
    r"\%": "%", r"\&": "&", r"\_": "_", r"\#": "#", r"\$": "$",
    "``": '"', "''": '"', "~": " ",
}


def strip_latex(text: str) -> str:
    """Best-effort reduction of LaTeX markup to its textual content.

    Comments, math, environment delimiters and command names go away;
    textual arguments (titles, headings, emphasized text, frame/block
    titles) are kept. Total: never raises on malformed input.
    """
    out = _COMMENT_RE.sub(" ", text)
    out = _MATH_ENV_RE.sub(" ", out)
    out = _DISPLAY_MATH_RE.sub(" ", out)
    out = _INLINE_MATH_RE.sub(" ", out)
    out = _DROP_WITH_ARG_RE.sub(" ", out)
    out = _HREF_RE.sub(" ", out)
    out = _LAYOUT_ENV_ARG_RE.sub(" ", out)
    out = _BEGIN_END_RE.sub(" ", out)
    out = _ITEM_RE.sub(" ", out)
    out = _LINEBREAK_RE.sub(" ", out)
    for _ in range(50):
        new = _UNWRAP_RE.sub(r" \1 ", out)
        if new == out:
            break
        out = new
    out = _BARE_COMMAND_RE.sub(" ", out)
    for src, dst in _ESCAPES.items():
        out = out.replace(src, dst)
    out = re.sub(r"[{}\[\]]", " ", out)
    return re.sub(r"\s+", " ", out).strip()


# --- splitting rules -------------------------------------------------------

_FRAME_RE = re.compile(r"\\begin\{frame\}(.*?)\\end\{frame\}", re.DOTALL)
_FRAME_OPT_RE = re.compile(r"^\s*(?:<[^>]*>)?\s*(?:\[[^\]]*\])?")
_SECTION_RE = re.compile(r"\\section\*?\s*\{")
_BLOCK_RE = re.compile(r"\\(begin|end)\{(block|alertblock|exampleblock)\}")


def _split_frames(document: str) -> list[str]:
    texts = []
    for match in _FRAME_RE.finditer(document):
        body = _FRAME_OPT_RE.sub("", match.group(1), count=1)
        texts.append(strip_latex(body))
    return texts


def _split_sections(document: str) -> list[str]:
    boundaries = [m.start() for m in _SECTION_RE.finditer(document)]
    depth = 0
    for match in _BLOCK_RE.finditer(document):
        if match.group(1) == "begin":
            if depth == 0:
                boundaries.append(match.start())
            depth += 1
        else:
            depth = max(0, depth - 1)
    if not boundaries:
        return []
    boundaries = sorted(set(boundaries))
    starts = [0] + boundaries
    ends = boundaries + [len(document)]
    texts = [strip_latex(document[a:b]) for a, b in zip(starts, ends)]
    if not texts[0]:
        texts = texts[1:]  # nothing of substance before the first heading
    return texts


def _split_delimited(document: str) -> list[str]:
    blocks: list[list[str]] = [[]]
    for line in document.splitlines():
        if line.strip() == PANEL_DELIMITER:
            blocks.append([])
        else:
            blocks[-1].append(line)
    return ["\n".join(b).strip() for b in blocks]


def _split_markdown(document: str) -> list[str]:
    blocks: list[list[str]] = [[]]
    for line in document.splitlines():
        if line.lstrip().startswith("#"):
            blocks.append([line.lstrip().lstrip("#").strip()])
        else:
            blocks[-1].append(line)
    texts = ["\n".join(b).strip() for b in blocks]
    return [t for i, t in enumerate(texts) if t or i > 0]


def _whole_text(document: str, source_format: SourceFormat) -> str:
    if source_format in (SourceFormat.LATEX_BEAMER, SourceFormat.LATEX_GENERIC):
        return strip_latex(document)
    if source_format is SourceFormat.MARKDOWN_LIKE:
        return re.sub(r"[#*`>]+", " ", document).strip()
    return document.strip()


def default_format(template: TemplateKind) -> SourceFormat:
    if template.panel_rule == PANEL_RULE_FRAMES:
        return SourceFormat.LATEX_BEAMER
    return SourceFormat.LATEX_GENERIC


def extract_panels(
    document: str,
    template: TemplateKind,
    source_format: Optional[SourceFormat] = None,
    role: Role = Role.GENERATED,
    cfg: TokenizerConfig = DEFAULT_TOKENIZER,
) -> ExtractionResult:
    """Split a document into panels per the template's panel rule.

    A whole-document template (blog) always yields exactly one panel. For
    frame/section rules, markup that exposes no structure degrades to the
    plain-text rule (panels separated by ``===`` lines) with a note.
    """
    fmt = source_format or default_format(template)
    notes: list[str] = []
    degraded = False

    if template.panel_rule == PANEL_RULE_WHOLE:
        texts: list[str] = [_whole_text(document, fmt)]
    elif not document.strip():
        texts = []
    else:
        if fmt is SourceFormat.LATEX_BEAMER:
            texts = _split_frames(document)
        elif fmt is SourceFormat.LATEX_GENERIC:
            texts = _split_sections(document)
        elif fmt is SourceFormat.MARKDOWN_LIKE:
            texts = _split_markdown(document)
        else:
            texts = _split_delimited(document)
        if not texts:
            if fmt in (SourceFormat.LATEX_BEAMER, SourceFormat.LATEX_GENERIC):
                degraded = True
                notes.append(
                    f"no {template.panel_rule} found for {fmt.value}; "
                    "fell back to plain-text splitting"
                )
            whole = _whole_text(document, fmt)
            texts = [t for t in _split_delimited(whole) if t]
            if not texts and whole:
                texts = [whole]

    sequence = make_sequence(texts, role=role, template=template, cfg=cfg)
    return ExtractionResult(sequence=sequence, degraded=degraded, notes=tuple(notes))


# --- corpus files ----------------------------------------------------------


@dataclass(frozen=True)
class CorpusRecord:
    """One document of a JSON-lines corpus file.

    ``input_text`` feeds generation; ``reference_panels`` feeds scoring
    (must be non-empty for scoring records, which the scorer enforces).
    """

    id: str
    template: TemplateKind
    input_text: Optional[str] = None
    reference_panels: tuple[str, ...] = ()


def _template_to_json(template: TemplateKind):
    try:
        if template == template_from_name(template.name):
            return template.name
    except ValueError:
        pass
    return {"name": template.name, "panel_rule": template.panel_rule}


def _template_from_json(value, line: int) -> TemplateKind:
    if isinstance(value, str):
        try:
            return template_from_name(value)
        except ValueError as exc:
            raise CorpusParseError(str(exc), line) from None
    if isinstance(value, dict):
        try:
            return TemplateKind(str(value["name"]), str(value["panel_rule"]))
        except (KeyError, ValueError) as exc:
            raise CorpusParseError(f"bad template object: {exc}", line) from None
    raise CorpusParseError(f"template must be a string or object, got {type(value).__name__}", line)


def load_corpus(path: str | Path) -> list[CorpusRecord]:
    """Read a JSON-lines corpus, validating as it goes.

    Raises CorpusParseError/MissingFieldError/DuplicateIdError with the
    offending line number.
    """
    records: list[CorpusRecord] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(f"invalid JSON: {exc.msg}", line_no) from None
            if not isinstance(raw, dict):
                raise CorpusParseError("record must be a JSON object", line_no)
            for required in ("id", "template"):
                if required not in raw:
                    raise MissingFieldError(f"missing field {required!r}", line_no)
            rec_id = str(raw["id"])
            if rec_id in seen:
                raise DuplicateIdError(f"duplicate id {rec_id!r}", line_no)
            seen.add(rec_id)
            panels = raw.get("reference_panels", [])
            if not isinstance(panels, list) or not all(isinstance(p, str) for p in panels):
                raise CorpusParseError("reference_panels must be a list of strings", line_no)
            input_text = raw.get("input_text")
            if input_text is not None and not isinstance(input_text, str):
                raise CorpusParseError("input_text must be a string", line_no)
            records.append(
                CorpusRecord(
                    id=rec_id,
                    template=_template_from_json(raw["template"], line_no),
                    input_text=input_text,
                    reference_panels=tuple(panels),
                )
            )
    return records


def save_corpus(records: Iterable[CorpusRecord], path: str | Path) -> None:
    """Write records as JSON lines (lossless round-trip with load_corpus)."""
    with open(path, "w", encoding="utf-8") as handle:
        for rec in records:
            row: dict = {"id": rec.id, "template": _template_to_json(rec.template)}
            if rec.input_text is not None:
                row["input_text"] = rec.input_text
            if rec.reference_panels:
                row["reference_panels"] = list(rec.reference_panels)
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")


def save_panels(sequence: PanelSequence, path: str | Path) -> None:
    """Write a panel sequence (with its tokenizer config) as JSON."""
    doc = {
        "role": sequence.role.value,
        "template": {
            "name": sequence.template.name,
            "panel_rule": sequence.template.panel_rule,
        },
        "tokenizer": {
            "lowercase": sequence.tokenizer.lowercase,
            "strip_punctuation": sequence.tokenizer.strip_punctuation,
        },
        "panels": [{"index": p.index, "text": p.text} for p in sequence.panels],
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, ensure_ascii=False, indent=2)
        handle.write("\n")


def load_panels(path: str | Path) -> PanelSequence:
    """Inverse of save_panels; tokens are re-derived from the stored config."""
    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    cfg = TokenizerConfig(
        lowercase=bool(doc["tokenizer"]["lowercase"]),
        strip_punctuation=bool(doc["tokenizer"]["strip_punctuation"]),
    )
    template = TemplateKind(doc["template"]["name"], doc["template"]["panel_rule"])
    texts = [p["text"] for p in sorted(doc["panels"], key=lambda p: p["index"])]
    return make_sequence(texts, role=Role(doc["role"]), template=template, cfg=cfg)


def write_panels_text(sequence: PanelSequence, path: str | Path) -> None:
    """Human-inspectable dump: one panel per ``===`` delimiter line."""
    body = f"\n{PANEL_DELIMITER}\n".join(p.text for p in sequence.panels)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(body + "\n")

"""Two-step templatic-view generation.

Step one extracts a structured intermediate representation (title,
authors, per-section key sentences) from the input document; step two
turns that extract (or the raw document) into the final LaTeX view. Four
representation modes are supported:

* none: skip step one, prompt directly with the document;
* own:  run step one without the JSON schema, letting the model pick its
  own structure;
* text: run step one with the schema, then flatten the extract to plain
  text before step two;
* json: run step one with the schema and feed the serialized JSON to
  step two.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .llm import CompletionClient, CompletionEndpointConfig
from .panels import TemplateKind

IR_SCHEMA = (
    "{\n"
    '  "title": "...",\n'
    '  "authors": ["..."],\n'
    '  "sections": [\n'
    "    {\n"
    '      "heading": "...",\n'
    '      "sentences": ["..."]\n'
    "    }\n"
    "  ]\n"
    "}"
)

_IR_HEADER = (
    "Given the input text, extract the document title and authors.\n"
    "For each section in the given input text, extract the most important sentences.\n"
)
_SCHEMA_CLAUSE = "Format the output using the following JSON template:\n"

# short natural-language description of each target format, appended to the
# step-two prompt when styling is enabled
DEFAULT_STYLES = {
    "slides": (
        "Slides should include a title page. Following slides should contain "
        "an informative slide title and short, concise bullet points. Longer "
        "slides should be broken up into multiple slides."
    ),
    "poster": (
        "Posters should include a title section at the top. Each panel should "
        "include a heading and short, concise bullet points of the most "
        "important take-aways from that section."
    ),
    "blog": (
        "Blogs should include paragraphs introducing the topic, a summary of "
        "the input document, and important takeaways. The blog should be more "
        "readable to a general audience than the input document."
    ),
}

_TYPE_WORDS = {"slides": "slide deck", "poster": "poster", "blog": "blog"}


class IrParseError(ValueError):
    """Step-one output could not be parsed as the structured extract."""


class GenerationError(RuntimeError):
    """A pipeline step failed; ``step`` says which one."""

    def __init__(self, message: str, step: str) -> None:
        super().__init__(message)
        self.step = step


class RepresentationMode(Enum):
    NONE = "none"
    OWN = "own"
    TEXT = "text"
    JSON = "json"


@dataclass(frozen=True)
class Section:
    heading: str
    sentences: tuple[str, ...]


@dataclass(frozen=True)
class IntermediateRepresentation:
    title: str
    authors: tuple[str, ...]
    sections: tuple[Section, ...]

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "authors": list(self.authors),
            "sections": [
                {"heading": s.heading, "sentences": list(s.sentences)}
                for s in self.sections
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    @classmethod
    def from_dict(cls, raw: dict) -> "IntermediateRepresentation":
        sections = []
        for item in raw.get("sections") or []:
            if isinstance(item, dict):
                sentences = item.get("sentences") or []
                if isinstance(sentences, str):
                    sentences = [sentences]
                sections.append(
                    Section(
                        heading=str(item.get("heading") or ""),
                        sentences=tuple(str(s) for s in sentences),
                    )
                )
            else:
                sections.append(Section(heading="", sentences=(str(item),)))
        authors = raw.get("authors") or []
        if isinstance(authors, str):
            authors = [authors]
        return cls(
            title=str(raw.get("title") or ""),
            authors=tuple(str(a) for a in authors),
            sections=tuple(sections),
        )


@dataclass(frozen=True)
class StyleParameter:
    template: TemplateKind
    description: str

    def __post_init__(self) -> None:
        if not self.description:
            raise ValueError("style description must be non-empty when style is enabled")

    @classmethod
    def default_for(cls, template: TemplateKind) -> "StyleParameter":
        try:
            return cls(template, DEFAULT_STYLES[template.name])
        except KeyError:
            raise ValueError(
                f"no default style for template {template.name!r}; provide a description"
            ) from None


@dataclass(frozen=True)
class GenerationConfig:
    template: TemplateKind
    mode: RepresentationMode = RepresentationMode.JSON
    use_style: bool = True
    style_description: Optional[str] = None
    temperature: float = 0.0
    max_input_tokens: Optional[int] = None
    endpoint: Optional[CompletionEndpointConfig] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError("temperature must be in [0, 1]")
        if self.max_input_tokens is not None and self.max_input_tokens < 1:
            raise ValueError("max_input_tokens must be >= 1")

    def style(self) -> Optional[StyleParameter]:
        if not self.use_style:
            return None
        if self.style_description:
            return StyleParameter(self.template, self.style_description)
        return StyleParameter.default_for(self.template)


@dataclass(frozen=True)
class StepRecord:
    step: str
    prompt: str
    output: str
    prompt_tokens: int
    output_tokens: int
    elapsed_s: float


@dataclass(frozen=True)
class GenerationResult:
    latex: str
    ir: Optional[IntermediateRepresentation]
    trace: tuple[StepRecord, ...]


def count_tokens(text: str, chars_per_token: Optional[int] = None) -> int:
    """Conservative token count: whitespace tokens, each costing at least
    ceil(len/chars_per_token) when a chars-per-token rate is given."""
    if chars_per_token is None:
        return len(text.split())
    return sum(max(1, -(-len(tok) // chars_per_token)) for tok in text.split())


def truncate_to_window(
    text: str, token_budget: int, chars_per_token: Optional[int] = None
) -> str:
    """Keep the head of ``text`` within the token budget.

    Never splits inside a token; input already within budget is returned
    unchanged (byte-identical).
    """
    if token_budget < 1:
        raise ValueError("token budget must be >= 1")
    if count_tokens(text, chars_per_token) <= token_budget:
        return text
    spent = 0
    end = 0
    for match in re.finditer(r"\S+", text):
        cost = (
            1
            if chars_per_token is None
            else max(1, -(-len(match.group()) // chars_per_token))
        )
        if spent + cost > token_budget:
            break
        spent += cost
        end = match.end()
    return text[:end]


def build_ir_prompt(
    document: str,
    include_schema: bool,
    max_doc_tokens: Optional[int] = None,
) -> str:
    """Step-one prompt; the schema block is omitted in own-structure mode."""
    if not document:
        raise ValueError("document must be non-empty")
    if max_doc_tokens is not None:
        document = truncate_to_window(document, max_doc_tokens)
    parts = [_IR_HEADER]
    if include_schema:
        parts.append(_SCHEMA_CLAUSE + IR_SCHEMA + "\n")
    parts.append(f"\nInput: {document}\nOutput:")
    return "".join(parts)


def build_view_prompt(
    input_text: str,
    template: TemplateKind,
    style: Optional[StyleParameter] = None,
    max_doc_tokens: Optional[int] = None,
) -> str:
    """Step-two prompt; the style line is omitted entirely when disabled."""
    if not input_text:
        raise ValueError("input text must be non-empty")
    if max_doc_tokens is not None:
        input_text = truncate_to_window(input_text, max_doc_tokens)
    type_word = _TYPE_WORDS.get(template.name, template.name)
    parts = [f"Summarize the following input in a {type_word} style.\n"]
    if style is not None:
        parts.append(f"Style parameters: {style.description}\n")
    parts.append("Format the output document as a latex file:\n")
    parts.append(f"Input: {input_text}\n\nOutput:")
    return "".join(parts)


_FENCE_RE = re.compile(r"```(?:json)?\s*\n(.*?)```", re.DOTALL)


def parse_ir(model_output: str, strict: bool = False) -> IntermediateRepresentation:
    """Tolerant extraction of the structured block from step-one output.

    Fenced blocks are tried first, then any balanced JSON object in the
    text. In strict mode (the schema-constrained pipeline) failure raises
    IrParseError; otherwise the whole output is wrapped as unstructured
    text so downstream steps still have content.
    """
    candidates: list[str] = [m.group(1) for m in _FENCE_RE.finditer(model_output)]
    decoder = json.JSONDecoder()
    for candidate in candidates:
        try:
            parsed = json.loads(candidate)
        except json.JSONDecodeError:
            continue
        if isinstance(parsed, dict):
            return IntermediateRepresentation.from_dict(parsed)
    for match in re.finditer(r"\{", model_output):
        try:
            parsed, _ = decoder.raw_decode(model_output, match.start())
        except json.JSONDecodeError:
            continue
        if isinstance(parsed, dict):
            return IntermediateRepresentation.from_dict(parsed)
    if strict:
        raise IrParseError("no JSON object found in step-one output")
    body = model_output.strip()
    return IntermediateRepresentation(
        title="", authors=(), sections=(Section(heading="", sentences=(body,)),)
    )


def flatten_ir(ir: IntermediateRepresentation) -> str:
    """Plain-text projection of the extract: no structure markers left."""
    lines: list[str] = []
    if ir.title:
        lines.append(ir.title)
    if ir.authors:
        lines.append(", ".join(ir.authors))
    for section in ir.sections:
        if section.heading:
            lines.append(section.heading)
        lines.extend(section.sentences)
    return "\n".join(lines)


_DOCUMENT_ENV_RE = re.compile(r"\\begin\s*\{document\}")


def ensure_latex_document(text: str) -> str:
    """Wrap bare text in a document environment; already-wrapped input is
    returned unchanged."""
    if _DOCUMENT_ENV_RE.search(text):
        return text
    return "\\begin{document}\n" + text + "\n\\end{document}\n"


def generate_view(
    document: str,
    config: GenerationConfig,
    client: CompletionClient,
) -> GenerationResult:
    """Run the configured pipeline over one document.

    Mode none issues exactly one completion call; every other mode issues
    exactly two. Endpoint failures surface as GenerationError with the
    failing step named.
    """
    if not document:
        raise ValueError("document must be non-empty")

    trace: list[StepRecord] = []

    def call(step: str, prompt: str) -> str:
        start = time.perf_counter()
        try:
            output = client.complete(prompt, temperature=config.temperature)
        except Exception as exc:
            raise GenerationError(f"{step} completion failed: {exc}", step=step) from exc
        trace.append(
            StepRecord(
                step=step,
                prompt=prompt,
                output=output,
                prompt_tokens=count_tokens(prompt),
                output_tokens=count_tokens(output),
                elapsed_s=time.perf_counter() - start,
            )
        )
        return output

    budget = config.max_input_tokens
    style = config.style()
    ir: Optional[IntermediateRepresentation] = None

    if config.mode is RepresentationMode.NONE:
        view_input = document
    else:
        include_schema = config.mode is not RepresentationMode.OWN
        raw_ir = call("intermediate-representation", build_ir_prompt(document, include_schema, budget))
        if config.mode is RepresentationMode.JSON:
            ir = parse_ir(raw_ir, strict=True)
            view_input = ir.to_json()
        elif config.mode is RepresentationMode.TEXT:
            ir = parse_ir(raw_ir, strict=False)
            view_input = flatten_ir(ir)
        else:  # the model's own structure, passed through verbatim
            try:
                ir = parse_ir(raw_ir, strict=True)
            except IrParseError:
                ir = None
            view_input = raw_ir
        if not view_input.strip():
            raise GenerationError(
                "step one produced empty output", step="intermediate-representation"
            )

    latex = call(
        "view", build_view_prompt(view_input, config.template, style, budget)
    )
    return GenerationResult(latex=latex, ir=ir, trace=tuple(trace))

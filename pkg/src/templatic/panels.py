"""Canonical text containers and tokenization shared by every other module.

A *panel* is the unit of organization within a document view whose placement
and ordering matter: a slide in a deck, a section on a poster, or the whole
body of a blog post. Scoring operates on ordered sequences of panels.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

_WORD_RE = re.compile(r"\w+", re.UNICODE)

PANEL_RULE_FRAMES = "frames"
PANEL_RULE_SECTIONS = "sections"
PANEL_RULE_WHOLE = "whole"
PANEL_RULES = (PANEL_RULE_FRAMES, PANEL_RULE_SECTIONS, PANEL_RULE_WHOLE)


@dataclass(frozen=True)
class TokenizerConfig:
    """Normalization applied before any token-overlap computation.

    Splitting on Unicode whitespace is always on. ``strip_punctuation``
    separates punctuation runs from word characters and discards them.
    Both sides of a similarity computation must be tokenized with the
    same config.
    """

    lowercase: bool = True
    strip_punctuation: bool = True


DEFAULT_TOKENIZER = TokenizerConfig()


def tokenize(text: str, cfg: TokenizerConfig = DEFAULT_TOKENIZER) -> tuple[str, ...]:
    """Split ``text`` into normalized tokens.

    Total and deterministic: empty input yields an empty tuple and tokens
    never contain whitespace.
    """
    if cfg.lowercase:
        text = text.lower()
    if cfg.strip_punctuation:
        return tuple(_WORD_RE.findall(text))
    return tuple(text.split())


class Role(Enum):
    REFERENCE = "reference"
    GENERATED = "generated"


@dataclass(frozen=True)
class TemplateKind:
    """A document view type plus the rule used to delimit its panels."""

    name: str
    panel_rule: str

    def __post_init__(self) -> None:
        if self.panel_rule not in PANEL_RULES:
            raise ValueError(f"unknown panel rule: {self.panel_rule!r}")
        if not self.name:
            raise ValueError("template name must be non-empty")

    @classmethod
    def custom(cls, name: str, panel_rule: str) -> "TemplateKind":
        return cls(name=name, panel_rule=panel_rule)


SLIDES = TemplateKind("slides", PANEL_RULE_FRAMES)
POSTER = TemplateKind("poster", PANEL_RULE_SECTIONS)
BLOG = TemplateKind("blog", PANEL_RULE_WHOLE)

_BUILTIN_TEMPLATES = {t.name: t for t in (SLIDES, POSTER, BLOG)}


def template_from_name(name: str) -> TemplateKind:
    """Resolve one of the built-in template names (slides, poster, blog)."""
    try:
        return _BUILTIN_TEMPLATES[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown template {name!r}; expected one of {sorted(_BUILTIN_TEMPLATES)}"
        ) from None


@dataclass(frozen=True)
class Panel:
    """One textual unit of a document view.

    ``tokens`` is derived from ``text`` under the sequence's tokenizer
    config. Empty text is allowed (degenerate panels are the caller's
    concern) and scores zero against everything.
    """

    index: int
    text: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class PanelSequence:
    """Ordered panels of one document view, in source-document order."""

    panels: tuple[Panel, ...]
    role: Role
    template: TemplateKind
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER

    def __post_init__(self) -> None:
        for pos, panel in enumerate(self.panels):
            if panel.index != pos:
                raise ValueError(
                    f"panel indices must be contiguous from 0; got {panel.index} at position {pos}"
                )

    def __len__(self) -> int:
        return len(self.panels)

    def __iter__(self) -> Iterator[Panel]:
        return iter(self.panels)

    def __getitem__(self, i: int) -> Panel:
        return self.panels[i]

    @property
    def texts(self) -> tuple[str, ...]:
        return tuple(p.text for p in self.panels)


def make_sequence(
    texts: Sequence[str],
    role: Role,
    template: TemplateKind,
    cfg: TokenizerConfig = DEFAULT_TOKENIZER,
) -> PanelSequence:
    """Build a PanelSequence from raw panel strings, preserving order."""
    panels = tuple(
        Panel(index=i, text=t, tokens=tokenize(t, cfg)) for i, t in enumerate(texts)
    )
    return PanelSequence(panels=panels, role=role, template=template, tokenizer=cfg)

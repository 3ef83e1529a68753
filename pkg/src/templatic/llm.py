"""Completion-endpoint clients: HTTP with retry/backoff, plus an offline stub."""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol

import requests


class CompletionError(RuntimeError):
    """A completion request failed after any retries."""


@dataclass(frozen=True)
class CompletionEndpointConfig:
    url: str
    model: str
    auth_env: str = "COMPLETION_API_KEY"
    timeout: float = 60.0
    max_tokens: Optional[int] = None


@dataclass(frozen=True)
class RetryPolicy:
    attempts: int = 3
    base_delay: float = 0.5
    multiplier: float = 2.0

    def delay(self, attempt: int) -> float:
        return self.base_delay * self.multiplier**attempt


class CompletionClient(Protocol):
    def complete(self, prompt: str, temperature: float = 0.0) -> str: ...


class HttpCompletionClient:
    """POSTs {"model", "prompt", "temperature"[, "max_tokens"]} and expects
    {"text": str} back. Transient failures (timeouts, connection errors,
    5xx) are retried with exponential backoff; 4xx fails fast."""

    def __init__(
        self,
        config: CompletionEndpointConfig,
        retry: RetryPolicy = RetryPolicy(),
        sleep=time.sleep,
    ) -> None:
        self.config = config
        self.retry = retry
        self._sleep = sleep

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.config.auth_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def complete(self, prompt: str, temperature: float = 0.0) -> str:
        payload: dict = {
            "model": self.config.model,
            "prompt": prompt,
            "temperature": temperature,
        }
        if self.config.max_tokens is not None:
            payload["max_tokens"] = self.config.max_tokens
        last_error: Exception | None = None
        for attempt in range(self.retry.attempts):
            try:
                resp = requests.post(
                    self.config.url,
                    json=payload,
                    headers=self._headers(),
                    timeout=self.config.timeout,
                )
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_error = exc
            else:
                if resp.status_code >= 500:
                    last_error = CompletionError(f"server error {resp.status_code}")
                elif resp.status_code >= 400:
                    raise CompletionError(
                        f"completion request rejected: {resp.status_code} {resp.text[:200]}"
                    )
                else:
                    try:
                        text = resp.json()["text"]
                    except (ValueError, KeyError, TypeError) as exc:
                        raise CompletionError(f"malformed completion response: {exc}") from exc
                    if not isinstance(text, str):
                        raise CompletionError("completion response 'text' is not a string")
                    return text
            if attempt + 1 < self.retry.attempts:
                self._sleep(self.retry.delay(attempt))
        raise CompletionError(f"completion endpoint unavailable: {last_error}")


def prompt_key(prompt: str) -> str:
    """Filename key under which the stub client looks up a canned completion."""
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


class StubCompletionClient:
    """Deterministic offline client for tests and dry runs.

    Canned completions are read from ``root`` as ``<prompt-hash>.txt``
    (see :func:`prompt_key`). When no canned file exists and
    ``synthesize`` is on, the completion is derived from the prompt hash:
    intermediate-representation prompts get a valid JSON extract and view
    prompts get a small beamer document, so full pipelines run offline.
    """

    _IR_MARKER = "extract the document title and authors"

    def __init__(self, root: Optional[str | Path] = None, synthesize: bool = True) -> None:
        self.root = Path(root) if root is not None else None
        self.synthesize = synthesize
        self.calls: list[str] = []

    def complete(self, prompt: str, temperature: float = 0.0) -> str:
        self.calls.append(prompt)
        key = prompt_key(prompt)
        if self.root is not None:
            path = self.root / f"{key}.txt"
            if path.exists():
                return path.read_text(encoding="utf-8")
        if not self.synthesize:
            raise CompletionError(f"no canned completion for prompt hash {key}")
        if self._IR_MARKER in prompt:
            return self._synthesize_ir(prompt)
        return self._synthesize_view(prompt)

    @staticmethod
    def _digest(prompt: str) -> str:
        return hashlib.sha256(prompt.encode("utf-8")).hexdigest()

    def _synthesize_ir(self, prompt: str) -> str:
        d = self._digest(prompt)
        doc = {
            "title": f"Study {d[:6]}",
            "authors": [f"Author {d[6:10]}", f"Author {d[10:14]}"],
            "sections": [
                {
                    "heading": f"Background {d[14:18]}",
                    "sentences": [
                        f"Finding {d[18:26]} frames the problem {d[26:30]}.",
                        f"Method {d[30:38]} builds on {d[38:42]}.",
                    ],
                },
                {
                    "heading": f"Results {d[42:46]}",
                    "sentences": [f"Result {d[46:54]} improves over {d[54:58]}."],
                },
            ],
        }
        return json.dumps(doc, indent=2)

    def _synthesize_view(self, prompt: str) -> str:
        d = self._digest(prompt)
        return (
            "\\documentclass{beamer}\n"
            "\\begin{document}\n"
            f"\\begin{{frame}}{{Overview {d[:6]}}}\n"
            "\\begin{itemize}\n"
            f"\\item Point {d[6:14]} about {d[14:18]}.\n"
            f"\\item Point {d[18:26]}.\n"
            "\\end{itemize}\n"
            "\\end{frame}\n"
            f"\\begin{{frame}}{{Details {d[26:32]}}}\n"
            "\\begin{itemize}\n"
            f"\\item Detail {d[32:40]} supports {d[40:44]}.\n"
            "\\end{itemize}\n"
            "\\end{frame}\n"
            "\\end{document}\n"
        )

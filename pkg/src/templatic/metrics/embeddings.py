"""Embedding-based similarity: segment cosine and greedy token matching.

Vectors come from a provider behind a small interface so tests and offline
runs can use a deterministic in-memory stub, and scoring runs can wrap any
provider in an on-disk cache keyed by (model id, content hash). Cosines
are linearly rescaled from [-1, 1] to [0, 1] so every similarity the
scorer consumes lives in the same range.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Protocol, Sequence

import numpy as np
import requests

from ._prf import PRF


class ProviderError(RuntimeError):
    """Base class for embedding-provider failures."""


class ProviderUnavailableError(ProviderError):
    """Timeout or HTTP failure that persisted through retries; retryable."""


class ProviderResponseError(ProviderError):
    """Malformed provider response; not retryable."""


@dataclass(frozen=True)
class EmbeddingProviderConfig:
    endpoint: str
    model: str
    auth_env: str = "EMBEDDING_API_KEY"
    batch_size: int = 32
    timeout: float = 30.0
    retries: int = 3
    max_concurrency: int = 4

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")


class EmbeddingProvider(Protocol):
    @property
    def model_id(self) -> str: ...

    def embed(self, texts: Sequence[str]) -> list[list[float]]: ...


class HttpEmbeddingProvider:
    """POSTs {"model", "inputs"} and expects {"vectors": [[float]]} back.

    Callers may share one instance across threads; in-flight requests are
    bounded by ``config.max_concurrency``.
    """

    def __init__(self, config: EmbeddingProviderConfig, sleep=time.sleep) -> None:
        self.config = config
        self._sleep = sleep
        self._gate = threading.BoundedSemaphore(config.max_concurrency)

    @property
    def model_id(self) -> str:
        return self.config.model

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.config.auth_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def _post_batch(self, texts: Sequence[str]) -> list[list[float]]:
        payload = {"model": self.config.model, "inputs": list(texts)}
        last_error: Exception | None = None
        for attempt in range(self.config.retries):
            try:
                with self._gate:
                    resp = requests.post(
                        self.config.endpoint,
                        json=payload,
                        headers=self._headers(),
                        timeout=self.config.timeout,
                    )
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_error = exc
            else:
                if resp.status_code >= 500:
                    last_error = ProviderError(f"server error {resp.status_code}")
                elif resp.status_code >= 400:
                    raise ProviderResponseError(
                        f"embedding request rejected: {resp.status_code} {resp.text[:200]}"
                    )
                else:
                    return self._parse(resp, len(texts))
            if attempt + 1 < self.config.retries:
                self._sleep(0.5 * 2**attempt)
        raise ProviderUnavailableError(f"embedding endpoint unavailable: {last_error}")

    @staticmethod
    def _parse(resp: requests.Response, expected: int) -> list[list[float]]:
        try:
            body = resp.json()
            vectors = body["vectors"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderResponseError(f"malformed embedding response: {exc}") from exc
        if not isinstance(vectors, list) or len(vectors) != expected:
            raise ProviderResponseError(
                f"expected {expected} vectors, got {len(vectors) if isinstance(vectors, list) else type(vectors)}"
            )
        return [[float(x) for x in vec] for vec in vectors]

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        out: list[list[float]] = []
        step = self.config.batch_size
        for start in range(0, len(texts), step):
            out.extend(self._post_batch(texts[start : start + step]))
        return out


class StaticEmbeddingProvider:
    """In-memory provider with fixed vectors, for tests and offline runs."""

    def __init__(self, vectors: Mapping[str, Sequence[float]], model_id: str = "static") -> None:
        self._vectors = {k: [float(x) for x in v] for k, v in vectors.items()}
        self._model_id = model_id
        self.calls: list[tuple[str, ...]] = []

    @property
    def model_id(self) -> str:
        return self._model_id

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        self.calls.append(tuple(texts))
        try:
            return [list(self._vectors[t]) for t in texts]
        except KeyError as exc:
            raise ProviderResponseError(f"no stub vector for {exc.args[0]!r}") from None


class CachedEmbeddingProvider:
    """On-disk vector cache in front of another provider.

    One JSON file per (model id, sha256 of text); writes go through a
    temp-file rename so concurrent readers never see partial files.
    """

    def __init__(self, provider: EmbeddingProvider, cache_dir: str | Path) -> None:
        self._provider = provider
        self._dir = Path(cache_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    @property
    def model_id(self) -> str:
        return self._provider.model_id

    def _path(self, text: str) -> Path:
        digest = hashlib.sha256(
            f"{self.model_id}\x00{text}".encode("utf-8")
        ).hexdigest()
        return self._dir / f"{digest}.json"

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        out: dict[int, list[float]] = {}
        missing: list[tuple[int, str]] = []
        for i, text in enumerate(texts):
            path = self._path(text)
            if path.exists():
                out[i] = json.loads(path.read_text(encoding="utf-8"))["vector"]
            else:
                missing.append((i, text))
        if missing:
            fetched = self._provider.embed([t for _, t in missing])
            with self._write_lock:
                for (i, text), vec in zip(missing, fetched):
                    out[i] = vec
                    path = self._path(text)
                    tmp = path.with_suffix(".tmp")
                    tmp.write_text(json.dumps({"vector": vec}), encoding="utf-8")
                    os.replace(tmp, path)
        return [out[i] for i in range(len(texts))]


def _cosine(u: Sequence[float], v: Sequence[float]) -> float:
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    c = float(np.dot(a, b) / (na * nb))
    return max(-1.0, min(1.0, c))


def _rescale(cosine: float) -> float:
    return (cosine + 1.0) / 2.0


def embedding_cosine(a: str, b: str, provider: EmbeddingProvider) -> float:
    """Rescaled cosine of the two segment embeddings, in [0, 1]."""
    va, vb = provider.embed([a, b])
    return _rescale(_cosine(va, vb))


def token_greedy_embedding(
    a_tokens: Sequence[str], b_tokens: Sequence[str], provider: EmbeddingProvider
) -> PRF:
    """Greedy max-cosine token matching (no idf weighting).

    precision is the mean over candidate tokens of the best rescaled
    cosine against any reference token; recall is the mirror image.
    """
    if not a_tokens or not b_tokens:
        return PRF.from_pr(0.0, 0.0)
    unique = list(dict.fromkeys([*a_tokens, *b_tokens]))
    vectors = dict(zip(unique, provider.embed(unique)))
    mat = np.empty((len(a_tokens), len(b_tokens)))
    for i, ta in enumerate(a_tokens):
        for j, tb in enumerate(b_tokens):
            mat[i, j] = _rescale(_cosine(vectors[ta], vectors[tb]))
    precision = float(mat.max(axis=1).mean())
    recall = float(mat.max(axis=0).mean())
    return PRF.from_pr(precision, recall)

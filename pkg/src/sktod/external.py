"""HTTP clients for the external scorer, ABSA tagger, and generator services.

Wire protocol (JSON over POST, UTF-8):

    {base}/score        {"task": "ks"|"ktd", "context": [{"speaker","text"},...], "snippet": str}
                        -> {"logit": real}
    {base}/score_batch  {"requests": [<score request>, ...]} -> {"logits": [real, ...]}  (positional)
    {base}/absa         {"sentence": str} -> {"aspect": str|null, "polarity": "positive|neutral|negative|none"}
    {base}/generate     {"context": [...], "snippets": [str, ...]} -> {"response": str}

Non-2xx replies and transport failures raise ExternalServiceError after
bounded retries; malformed 2xx replies raise ProtocolError.  Batch
scoring runs with bounded in-flight parallelism and restores request
order, so results are positionally aligned with inputs.  A failed
instance is surfaced as an error, never scored as zero.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import requests

from .corpus import DialogueContext, KnowledgeSnippet
from .errors import ExternalServiceError, ProtocolError
from .select import CandidateSet, ScoredSnippet

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 30.0
DEFAULT_RETRIES = 3
DEFAULT_PARALLELISM = 8
BATCH_SIZE = 32


def context_payload(context: DialogueContext) -> list[dict[str, str]]:
    return [{"speaker": u.speaker.value, "text": u.text} for u in context.utterances]


class ExternalClient:
    def __init__(
        self,
        base_url: str,
        timeout: float = DEFAULT_TIMEOUT,
        retries: int = DEFAULT_RETRIES,
        parallelism: int = DEFAULT_PARALLELISM,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.parallelism = max(1, parallelism)
        self.session = session or requests.Session()

    def _post(self, path: str, payload: dict) -> dict:
        url = f"{self.base_url}{path}"
        last_exc: Exception | None = None
        for attempt in range(self.retries):
            try:
                resp = self.session.post(url, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                last_exc = exc
                logger.warning("POST %s failed (attempt %d/%d): %s", url, attempt + 1, self.retries, exc)
                time.sleep(min(2 ** attempt * 0.2, 2.0))
                continue
            if resp.status_code // 100 != 2:
                last_exc = ExternalServiceError(f"POST {url} -> HTTP {resp.status_code}")
                logger.warning("POST %s -> HTTP %d (attempt %d/%d)", url, resp.status_code, attempt + 1, self.retries)
                time.sleep(min(2 ** attempt * 0.2, 2.0))
                continue
            try:
                return resp.json()
            except ValueError as exc:
                raise ProtocolError(f"POST {url}: reply is not JSON") from exc
        raise ExternalServiceError(f"POST {url}: retries exhausted") from last_exc

    def score(self, task: str, context: DialogueContext, snippet_text: str) -> float:
        doc = self._post("/score", {
            "task": task,
            "context": context_payload(context),
            "snippet": snippet_text,
        })
        return _require_number(doc, "logit")

    def score_batch(self, reqs: Sequence[dict]) -> list[float]:
        if not reqs:
            return []
        doc = self._post("/score_batch", {"requests": list(reqs)})
        logits = doc.get("logits")
        if not isinstance(logits, list) or len(logits) != len(reqs):
            raise ProtocolError("score_batch reply misaligned with request batch")
        return [float(x) for x in logits]

    def tag(self, sentence: str) -> dict:
        doc = self._post("/absa", {"sentence": sentence})
        polarity = doc.get("polarity")
        if polarity not in ("positive", "neutral", "negative", "none"):
            raise ProtocolError(f"ABSA service returned bad polarity {polarity!r}")
        aspect = doc.get("aspect")
        if aspect is not None and not isinstance(aspect, str):
            raise ProtocolError("ABSA service returned non-string aspect")
        return {"aspect": aspect, "polarity": polarity}

    def generate(self, context: list[dict], snippets: list[str]) -> str:
        doc = self._post("/generate", {"context": context, "snippets": snippets})
        text = doc.get("response")
        if not isinstance(text, str):
            raise ProtocolError("generator service reply missing 'response'")
        return text


def _require_number(doc: dict, key: str) -> float:
    value = doc.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ProtocolError(f"service reply missing numeric {key!r}")
    return float(value)


class ExternalSnippetScorer:
    """Neural knowledge-selection scorer behind the wire protocol.

    Scores are relevance logits; candidates are batched and the batches
    scored with bounded parallelism, results restored to input order.
    """

    name = "external"

    def __init__(self, client: ExternalClient):
        self.client = client

    def score_candidates(self, context: DialogueContext, candidates: CandidateSet) -> list[ScoredSnippet]:
        snippets: Sequence[KnowledgeSnippet] = candidates.candidates
        if not snippets:
            return []
        ctx = context_payload(context)
        reqs = [{"task": "ks", "context": ctx, "snippet": sn.text} for sn in snippets]
        batches = [reqs[i:i + BATCH_SIZE] for i in range(0, len(reqs), BATCH_SIZE)]
        if len(batches) == 1:
            flat = self.client.score_batch(batches[0])
        else:
            with ThreadPoolExecutor(max_workers=self.client.parallelism) as pool:
                results = list(pool.map(self.client.score_batch, batches))
            flat = [x for chunk in results for x in chunk]
        scored = [ScoredSnippet(sn.ref, logit) for sn, logit in zip(snippets, flat)]
        return sorted(scored, key=lambda s: (-s.score, s.ref))

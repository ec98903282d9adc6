"""Intent extraction: prompt text -> update marker.

Three interchangeable extractors share the same contract:

* keyword   - deterministic rule table, no dependencies, used offline
* svm       - text embedding + one-vs-rest linear classifiers
* llm       - templated few-shot input to a chat model, JSON response

Every extractor returns a marker with components in {-1, 0, +1}; prompts
that cannot be interpreted map to (0, 0).
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import time
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

EMBED_ENDPOINT_ENV = "VNET_EMBED_ENDPOINT"
LLM_ENDPOINT_ENV = "VNET_LLM_ENDPOINT"
LLM_API_KEY_ENV = "VNET_LLM_API_KEY"
LLM_MODEL_ENV = "VNET_LLM_MODEL"

TOPICS = ("cpu", "latency_bound")


@dataclass(frozen=True)
class UpdateMarker:
    cpu: int
    latency_bound: int

    def __post_init__(self):
        if self.cpu not in (-1, 0, +1) or self.latency_bound not in (-1, 0, +1):
            raise ValueError(f"marker components must be in {{-1,0,+1}}: {self}")

    def component(self, topic: str) -> int:
        return self.cpu if topic == "cpu" else self.latency_bound


NO_CHANGE = UpdateMarker(0, 0)


@dataclass(frozen=True)
class LabeledSample:
    prompt: str
    marker: UpdateMarker


class MarkerSyntaxError:
    """Sentinel value: no legal marker object found in an LLM response."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "MarkerSyntaxError"


SYNTAX_ERROR = MarkerSyntaxError()


@dataclass
class Diagnostics:
    extractor: str
    elapsed: float = 0.0
    syntax_error: bool = False
    unavailable: bool = False
    raw_response: str | None = None

    def to_dict(self) -> dict:
        return {
            "extractor": self.extractor,
            "elapsed": self.elapsed,
            "syntax_error": self.syntax_error,
            "unavailable": self.unavailable,
        }


# --------------------------------------------------------------------------
# Keyword baseline

# Multi-word phrases are matched on the lowercased text, single words on
# token boundaries. Negative-direction cues are checked before positive
# ones for CPU ("more than I can afford"), and the reverse for the
# latency bound ("don't need less latency").
_CPU_TOPIC = ("cpu", "cpus")
_CPU_DOWN = ("less", "fewer", "reduce", "decrease", "free up", "afford",
             "no longer need")
_CPU_UP = ("more", "upgrade", "increase", "insufficient", "not sufficient",
           "underperforming")
_LB_TOPIC = ("latency", "late", "speed")
_LB_UP = ("don't need", "don't want", "do not need", "do not want",
          "too reduced", "ease")
_LB_DOWN = ("reduce", "lower", "less", "late")


def _has_cue(text: str, tokens: list[str], cues: tuple[str, ...]) -> bool:
    for cue in cues:
        if " " in cue:
            if cue in text:
                return True
        elif cue in tokens:
            return True
    return False


def keyword_extract(prompt: str) -> UpdateMarker:
    text = prompt.lower()
    tokens = re.findall(r"[a-z']+", text)
    cpu = 0
    if _has_cue(text, tokens, _CPU_TOPIC):
        if _has_cue(text, tokens, _CPU_DOWN):
            cpu = -1
        elif _has_cue(text, tokens, _CPU_UP):
            cpu = +1
    lb = 0
    if _has_cue(text, tokens, _LB_TOPIC):
        if _has_cue(text, tokens, _LB_UP):
            lb = +1
        elif _has_cue(text, tokens, _LB_DOWN):
            lb = -1
    return UpdateMarker(cpu, lb)


# --------------------------------------------------------------------------
# Embedding providers

HASH_EMBED_DIM = 512


def hash_embed(text: str, dim: int = HASH_EMBED_DIM) -> np.ndarray:
    """Offline fallback: feature-hashed, L2-normalized bag of words."""
    vec = np.zeros(dim)
    for feat in re.findall(r"[a-z0-9']+", text.lower()):
        digest = hashlib.md5(feat.encode()).digest()
        idx = int.from_bytes(digest[:4], "little") % dim
        sign = 1.0 if digest[4] % 2 == 0 else -1.0
        vec[idx] += sign
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


class HashEmbedder:
    """Deterministic local embedder, no network needed."""

    def __init__(self, dim: int = HASH_EMBED_DIM):
        self.dim = dim

    def embed(self, texts: list[str]) -> np.ndarray:
        return np.stack([hash_embed(t, self.dim) for t in texts])


class RemoteEmbedder:
    """Client for the embedding endpoint: POST {"texts": [...]} -> {"vectors": [[...]]}."""

    def __init__(self, endpoint: str | None = None, timeout: float = 30.0):
        self.endpoint = endpoint or os.environ.get(EMBED_ENDPOINT_ENV)
        if not self.endpoint:
            raise RuntimeError(f"no embedding endpoint ({EMBED_ENDPOINT_ENV} unset)")
        self.timeout = timeout
        self.dim: int | None = None

    def embed(self, texts: list[str]) -> np.ndarray:
        import httpx

        resp = httpx.post(self.endpoint, json={"texts": texts}, timeout=self.timeout)
        resp.raise_for_status()
        vectors = np.asarray(resp.json()["vectors"], dtype=float)
        if self.dim is None:
            self.dim = vectors.shape[1]
        elif vectors.shape[1] != self.dim:
            raise RuntimeError(
                f"embedding dimension changed: {vectors.shape[1]} != {self.dim}")
        return vectors


# --------------------------------------------------------------------------
# Linear classifier (one-vs-rest hinge loss)

CLASSES = (-1, 0, +1)


@dataclass
class ClassifierModel:
    topic: str
    weights: dict[int, np.ndarray]  # class -> weight vector
    biases: dict[int, float]
    dim: int


def train_classifier(samples: list[LabeledSample], topic: str,
                     embedder=None, seed: int = 0,
                     epochs: int = 200, reg: float = 1e-3) -> ClassifierModel:
    """One-vs-rest linear classifiers via hinge-loss subgradient descent.

    Deterministic given (sample order, seed). A class absent from the
    samples gets a zero weight vector and a logged warning.
    """
    if not samples:
        raise ValueError("empty sample list")
    embedder = embedder or HashEmbedder()
    X = embedder.embed([s.prompt for s in samples])
    y = np.array([s.marker.component(topic) for s in samples])
    dim = X.shape[1]

    weights: dict[int, np.ndarray] = {}
    biases: dict[int, float] = {}
    rng = np.random.RandomState(seed)
    for cls in CLASSES:
        target = np.where(y == cls, 1.0, -1.0)
        w = np.zeros(dim)
        b = 0.0
        if not np.any(y == cls):
            logger.warning("topic %s: no training samples for class %+d", topic, cls)
            weights[cls] = w
            biases[cls] = b
            continue
        t = 0
        for _ in range(epochs):
            order = rng.permutation(len(samples))
            for i in order:
                t += 1
                lr = 1.0 / (reg * t)
                margin = target[i] * (X[i] @ w + b)
                w *= (1.0 - lr * reg)
                if margin < 1.0:
                    w += lr * target[i] * X[i]
                    b += lr * target[i]
        weights[cls] = w
        biases[cls] = b
    return ClassifierModel(topic=topic, weights=weights, biases=biases, dim=dim)


def classify(model: ClassifierModel, e: np.ndarray) -> int:
    """Argmax class score; ties break toward 0, then -1."""
    if e.shape[-1] != model.dim:
        raise ValueError(f"embedding dim {e.shape[-1]} != model dim {model.dim}")
    best_cls = 0
    best_score = -np.inf
    for cls in (0, -1, +1):  # tie-break preference order
        score = float(model.weights[cls] @ e + model.biases[cls])
        if score > best_score:
            best_score = score
            best_cls = cls
    return best_cls


# --------------------------------------------------------------------------
# LLM pipeline

_CPU_WORDS = {+1: "increase", -1: "decrease", 0: "none"}
_LB_WORDS = {+1: "ease", -1: "reduce", 0: "none"}
_CPU_VALUES = {v: k for k, v in _CPU_WORDS.items()}
_LB_VALUES = {v: k for k, v in _LB_WORDS.items()}


def marker_to_json(marker: UpdateMarker) -> str:
    return json.dumps({"cpu": _CPU_WORDS[marker.cpu],
                       "latencybound": _LB_WORDS[marker.latency_bound]},
                      indent=4)


def render_llm_input(template: str, examples: list[LabeledSample], prompt: str) -> str:
    """Fill the {{example}} and {{prompt}} placeholders of the input template."""
    for ph in ("{{example}}", "{{prompt}}"):
        if ph not in template:
            raise ValueError(f"template is missing placeholder {ph}")
    blocks = []
    for ex in examples:
        blocks.append(f"Prompt: {ex.prompt}\n```\n{marker_to_json(ex.marker)}\n```")
    return (template
            .replace("{{example}}", "\n\n".join(blocks))
            .replace("{{prompt}}", prompt))


_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)
_BRACE_RE = re.compile(r"\{[^{}]*\}", re.DOTALL)


def parse_llm_response(text: str) -> UpdateMarker | MarkerSyntaxError:
    """Extract the marker from a model response.

    Scans fenced code blocks and bare JSON objects; the last candidate
    with legal "cpu" and "latencybound" values wins.
    """
    candidates = [m.group(1) for m in _FENCE_RE.finditer(text)]
    candidates += [m.group(0) for m in _BRACE_RE.finditer(text)]
    result: UpdateMarker | MarkerSyntaxError = SYNTAX_ERROR
    for cand in candidates:
        try:
            obj = json.loads(cand.strip())
        except json.JSONDecodeError:
            continue
        if not isinstance(obj, dict):
            continue
        cpu = obj.get("cpu")
        lb = obj.get("latencybound")
        if cpu in _CPU_VALUES and lb in _LB_VALUES:
            result = UpdateMarker(_CPU_VALUES[cpu], _LB_VALUES[lb])
    return result


class HttpLlmClient:
    """POST {"model", "prompt", "temperature"} -> {"text": ...}, bearer auth."""

    def __init__(self, endpoint: str | None = None, api_key: str | None = None,
                 model: str | None = None, timeout: float = 120.0):
        self.endpoint = endpoint or os.environ.get(LLM_ENDPOINT_ENV)
        if not self.endpoint:
            raise RuntimeError(f"no LLM endpoint ({LLM_ENDPOINT_ENV} unset)")
        self.api_key = api_key or os.environ.get(LLM_API_KEY_ENV, "")
        self.model = model or os.environ.get(LLM_MODEL_ENV, "")
        self.timeout = timeout

    def complete(self, prompt: str) -> str:
        import httpx

        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        resp = httpx.post(self.endpoint,
                          json={"model": self.model, "prompt": prompt,
                                "temperature": 0},
                          headers=headers, timeout=self.timeout)
        resp.raise_for_status()
        return resp.json()["text"]


# --------------------------------------------------------------------------
# Extractor front ends

class KeywordExtractor:
    kind = "keyword"

    def extract(self, prompt: str) -> tuple[UpdateMarker, Diagnostics]:
        start = time.perf_counter()
        marker = keyword_extract(prompt)
        return marker, Diagnostics("keyword", elapsed=time.perf_counter() - start)


class SvmExtractor:
    """Embedding + per-topic linear classifiers."""

    kind = "svm"

    def __init__(self, samples: list[LabeledSample], embedder=None, seed: int = 0):
        self.embedder = embedder or HashEmbedder()
        self.models = {
            topic: train_classifier(samples, topic, embedder=self.embedder, seed=seed)
            for topic in TOPICS
        }

    def extract(self, prompt: str) -> tuple[UpdateMarker, Diagnostics]:
        start = time.perf_counter()
        try:
            e = self.embedder.embed([prompt])[0]
        except Exception:
            logger.exception("embedding endpoint unavailable")
            return NO_CHANGE, Diagnostics("svm", unavailable=True,
                                          elapsed=time.perf_counter() - start)
        marker = UpdateMarker(classify(self.models["cpu"], e),
                              classify(self.models["latency_bound"], e))
        return marker, Diagnostics("svm", elapsed=time.perf_counter() - start)


class LlmExtractor:
    """Few-shot templated LLM call with JSON parsing and graceful degradation."""

    kind = "llm"

    def __init__(self, client, template: str, examples: list[LabeledSample] | None = None,
                 retries: int = 1):
        self.client = client
        self.template = template
        self.examples = list(examples or [])
        self.retries = retries

    def extract(self, prompt: str) -> tuple[UpdateMarker, Diagnostics]:
        start = time.perf_counter()
        rendered = render_llm_input(self.template, self.examples, prompt)
        text = None
        for attempt in range(self.retries + 1):
            try:
                text = self.client.complete(rendered)
                break
            except Exception:
                logger.warning("LLM call failed (attempt %d)", attempt + 1,
                               exc_info=True)
        if text is None:
            return NO_CHANGE, Diagnostics("llm", unavailable=True,
                                          elapsed=time.perf_counter() - start)
        parsed = parse_llm_response(text)
        diag = Diagnostics("llm", elapsed=time.perf_counter() - start,
                           raw_response=text)
        if isinstance(parsed, MarkerSyntaxError):
            diag.syntax_error = True
            return NO_CHANGE, diag
        return parsed, diag


def load_dataset(data: str) -> list[LabeledSample]:
    """Parse the TSV dataset: header `prompt\\tdelta_cpu\\tdelta_lb`."""
    lines = [ln for ln in data.splitlines() if ln.strip()]
    header = lines[0].split("\t")
    if header != ["prompt", "delta_cpu", "delta_lb"]:
        raise ValueError(f"unexpected dataset header: {header}")
    samples = []
    for ln in lines[1:]:
        prompt, dc, dl = ln.split("\t")
        samples.append(LabeledSample(prompt, UpdateMarker(int(dc), int(dl))))
    return samples

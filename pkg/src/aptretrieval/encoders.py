"""Raw feature extraction: text/visual adapters, sentence splitting, tagging.

Adapters turn records into model-ready matrices. The "synthetic" adapter is
fully self-contained and deterministic (hash-seeded token vectors), so the
whole pipeline runs without any pretrained weights. The "joint" and
"separate-*" adapters describe the two pretrained-backbone regimes; they are
optional plug-ins that refuse to encode unless weights are supplied, keeping
the repository free of mandatory large downloads.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

import numpy as np

from .dataset import STOP_WORDS, tokenize
from .taxonomy import UNKNOWN_CLASS_INDEX, CONFIDENCE_THRESHOLD, FurnitureTag

ADAPTER_CACHE_ENV = "APTRETRIEVAL_ADAPTER_CACHE"

GRANULARITIES = ("token", "sentence")


class AdapterUnavailableError(RuntimeError):
    """A pretrained adapter cannot run (no weights); use "synthetic" instead."""


@dataclass
class VisualFeatureSet:
    """Per-apartment V x F feature matrix with its backbone provenance."""

    features: np.ndarray
    provenance: str  # "synthetic" | "joint" | "separate"

    def __post_init__(self) -> None:
        feats = np.asarray(self.features, dtype=np.float32)
        if feats.ndim != 2 or feats.shape[0] < 1:
            raise ValueError("visual features must be a V x F matrix with V >= 1")
        if not np.isfinite(feats).all():
            raise ValueError("visual features contain NaN or Inf")
        self.features = feats


@dataclass
class TextFeatureSequence:
    """Per-apartment S x F matrix; rows are sentences or tokens."""

    features: np.ndarray
    granularity: str

    def __post_init__(self) -> None:
        if self.granularity not in GRANULARITIES:
            raise ValueError(f"granularity must be one of {GRANULARITIES}")
        feats = np.asarray(self.features, dtype=np.float32)
        if feats.ndim != 2 or feats.shape[0] < 1:
            raise ValueError("text features must be an S x F matrix with S >= 1")
        if not np.isfinite(feats).all():
            raise ValueError("text features contain NaN or Inf")
        self.features = feats


def split_sentences(text: str) -> list[str]:
    """Split a description at periods, trimming whitespace and dropping empty
    fragments. Degenerate inputs with no sentence content pass through as a
    single-element list."""
    if not text:
        raise ValueError("cannot split empty text")
    parts = [p.strip() for p in text.split(".")]
    parts = [p for p in parts if p]
    if not parts:
        return [text]
    return parts


def tag_viewpoint(raw_detection: tuple[int, float]) -> FurnitureTag:
    """Collapse a raw (class, confidence) detection into a furniture tag.

    Confidence below the 10% threshold (strictly) maps to "unknown"; exactly at
    the threshold keeps the class.
    """
    raw_class, confidence = raw_detection
    if not 0.0 <= confidence <= 1.0:
        raise ValueError(f"confidence must be in [0, 1], got {confidence}")
    if not 0 <= raw_class < UNKNOWN_CLASS_INDEX:
        raise ValueError(
            f"raw detection class {raw_class} outside [0, {UNKNOWN_CLASS_INDEX - 1}]"
        )
    if confidence < CONFIDENCE_THRESHOLD:
        return FurnitureTag(UNKNOWN_CLASS_INDEX)
    return FurnitureTag(raw_class)


# ---------------------------------------------------------------------------
# Adapters
# ---------------------------------------------------------------------------


class SyntheticAdapter:
    """Deterministic weight-free stand-in for a jointly-trained backbone.

    Token vectors are unit Gaussians seeded by a stable hash of the token, so
    the same text always maps to the same matrix, in any process. Sentence
    vectors are the normalized mean of their content-token vectors (stop words
    dropped unless nothing else remains). Visual encoding is a validated
    pass-through of the feature-level corpus.
    """

    name = "synthetic"
    provenance = "synthetic"

    def __init__(self, feature_dim: int = 512):
        self.visual_dim = feature_dim
        self.text_dim = feature_dim
        self._token_cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._token_cache.get(token)
        if vec is None:
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "little"))
            vec = rng.standard_normal(self.text_dim)
            vec = (vec / np.linalg.norm(vec)).astype(np.float32)
            self._token_cache[token] = vec
        return vec

    def _embed_tokens(self, tokens: list[str]) -> np.ndarray:
        vecs = np.stack([self._token_vector(t) for t in tokens])
        return vecs

    def encode_sentence(self, sentence: str) -> np.ndarray:
        tokens = tokenize(sentence)
        content = [t for t in tokens if t not in STOP_WORDS] or tokens
        if not content:
            # No alphanumeric content at all: fall back to a hash of the raw text.
            return self._token_vector(sentence)
        mean = self._embed_tokens(content).mean(axis=0)
        norm = np.linalg.norm(mean)
        return (mean / norm).astype(np.float32) if norm > 0 else mean.astype(np.float32)

    def encode_sentences(self, sentences: list[str]) -> np.ndarray:
        return np.stack([self.encode_sentence(s) for s in sentences])

    def encode_token_stream(self, tokens: list[str]) -> np.ndarray:
        if not tokens:
            raise ValueError("cannot encode empty token stream")
        return self._embed_tokens(tokens)

    def encode_viewpoints(self, features: np.ndarray) -> np.ndarray:
        feats = np.asarray(features, dtype=np.float32)
        if feats.ndim != 2:
            raise ValueError("viewpoint features must be a V x F matrix")
        if feats.shape[1] != self.visual_dim:
            raise ValueError(
                f"feature dim {feats.shape[1]} does not match adapter dim {self.visual_dim}"
            )
        return feats


class _PretrainedAdapter:
    """Shared base for the optional pretrained plug-ins: declares dimensions
    and provenance, and raises a uniform error when weights are absent."""

    name = ""
    provenance = ""
    visual_dim = 0
    text_dim = 0

    def _unavailable(self) -> AdapterUnavailableError:
        cache = os.environ.get(ADAPTER_CACHE_ENV)
        where = f" (checked {ADAPTER_CACHE_ENV}={cache!r})" if cache else (
            f" (set {ADAPTER_CACHE_ENV} to a directory with the weights)"
        )
        return AdapterUnavailableError(
            f"adapter {self.name!r} needs pretrained weights that are not available{where}; "
            f"use the 'synthetic' adapter for a weight-free run"
        )

    def _weights_present(self) -> bool:
        cache = os.environ.get(ADAPTER_CACHE_ENV)
        return bool(cache) and os.path.isdir(os.path.join(cache, self.name))

    def encode_sentences(self, sentences: list[str]) -> np.ndarray:
        raise self._unavailable()

    def encode_token_stream(self, tokens: list[str]) -> np.ndarray:
        raise self._unavailable()

    def encode_viewpoints(self, features: np.ndarray) -> np.ndarray:
        # Feature-level corpora pass through, but the width must match the
        # backbone this corpus claims to come from.
        feats = np.asarray(features, dtype=np.float32)
        if feats.ndim != 2 or feats.shape[1] != self.visual_dim:
            raise ValueError(
                f"adapter {self.name!r} expects F={self.visual_dim}, got matrix "
                f"of shape {feats.shape}"
            )
        return feats


class JointBackboneAdapter(_PretrainedAdapter):
    """Vision transformer + text transformer trained jointly; both sides embed
    into the same 512-wide space."""

    name = "joint"
    provenance = "joint"
    visual_dim = 512
    text_dim = 512


class SeparateVisionAdapter(_PretrainedAdapter):
    """ImageNet-pretrained CNN features (2048-wide), unrelated to any text space."""

    name = "separate-vision"
    provenance = "separate"
    visual_dim = 2048
    text_dim = 0


class SeparateTextAdapter(_PretrainedAdapter):
    """Masked-language-model sentence features (768-wide), mean over final-layer
    token states."""

    name = "separate-text"
    provenance = "separate"
    visual_dim = 0
    text_dim = 768


ADAPTER_NAMES = ("synthetic", "joint", "separate-vision", "separate-text")


def get_adapter(name: str, feature_dim: int = 512):
    if name == "synthetic":
        return SyntheticAdapter(feature_dim=feature_dim)
    if name == "joint":
        return JointBackboneAdapter()
    if name == "separate-vision":
        return SeparateVisionAdapter()
    if name == "separate-text":
        return SeparateTextAdapter()
    raise ValueError(f"unknown adapter {name!r}; choose from {ADAPTER_NAMES}")


def encode_text(sentences: list[str], granularity: str, adapter) -> TextFeatureSequence:
    """Encode a sentence list at sentence granularity (one row per sentence) or
    token granularity (one row per token across the whole description)."""
    if granularity not in GRANULARITIES:
        raise ValueError(f"granularity must be one of {GRANULARITIES}")
    if not sentences:
        raise ValueError("cannot encode an empty sentence list")
    if granularity == "sentence":
        feats = adapter.encode_sentences(sentences)
    else:
        tokens = tokenize(" ".join(sentences))
        if not tokens:
            tokens = [" ".join(sentences)]
        feats = adapter.encode_token_stream(tokens)
    return TextFeatureSequence(feats, granularity)


def encode_images(record, adapter) -> VisualFeatureSet:
    """Produce the visual feature set for a record via the given adapter (a
    validated pass-through for feature-level corpora)."""
    feats = adapter.encode_viewpoints(record.viewpoint_features)
    return VisualFeatureSet(feats, provenance=adapter.provenance)

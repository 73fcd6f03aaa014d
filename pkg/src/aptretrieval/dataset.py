"""Synthetic apartment corpus: generation, splits, serialization, statistics.

A corpus is a list of apartment records plus a manifest. Each record carries a
V x F viewpoint feature matrix, one furniture tag per viewpoint, and a
multi-sentence furniture description. Generation is a pure function of
(n, seed, config): the same inputs reproduce byte-identical corpora on disk.

The generator is calibrated so that, at default settings, description lengths
are log-normally distributed with mean ~319 words and sentences average ~16.4
words. Calibration is constructive: the expected sentence length is computed
exactly from the phrase tables, and the item-count distribution is scaled so
the product of the two expectations hits the configured word target.

On-disk layout of a corpus directory:

    manifest.json       num_apartments, feature_dim, seed, splits, ...
    features.bin        per record: u16 id-len, id, u32 V, u32 F, V*F float32
    tags.bin            per record: u16 id-len, id, u32 V, V bytes (uint8)
    descriptions.txt    one record per line: "<id>\\t<description>"

All integers are little-endian; features round-trip bit-identically.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .taxonomy import (
    FURNITURE_CLASSES,
    UNKNOWN_CLASS_INDEX,
    FurnitureTag,
    class_index,
)


class ConfigError(ValueError):
    """Invalid generator or split configuration."""


class CorpusLoadError(ValueError):
    """Malformed or inconsistent corpus files."""


# Viewpoint count is clamp(#distinct furniture categories, MIN, MAX): bounded
# and monotone in scene richness.
MIN_VIEWPOINTS = 3
MAX_VIEWPOINTS = 15

SPLIT_NAMES = ("train", "val", "test")

DEFAULT_STYLES = (
    "japanese", "minimalist", "modern", "classic", "industrial", "nordic",
    "rustic", "vintage", "contemporary", "baroque", "bohemian", "scandinavian",
)
DEFAULT_THEMES = (
    "smooth", "net", "bright", "dark", "warm", "cool",
    "soft", "bold", "airy", "calm", "vivid", "plain",
)
DEFAULT_MATERIALS = (
    "wooden", "composite", "metallic", "glass", "marble", "leather",
    "fabric", "bamboo", "ceramic", "stone", "plastic", "velvet",
)

# Sentence grammar: "<opener> <quantifier> <style> <theme> <material> <category> <tail>".
# Openers/tails include connective filler ("moreover", "additionally", ...) so
# descriptions read like advertisement prose rather than bare item lists.
_OPENERS = (
    "",
    "the apartment features",
    "moreover the scene also includes",
    "additionally there is",
    "inside this place you can also find",
    "furthermore the cozy home offers",
    "the living space presents",
    "you will also notice",
    "next to it stands",
    "moreover the interior shows",
    "additionally the layout includes",
    "the residence also provides",
    "furthermore one can spot",
)
_QUANTIFIERS = ("a", "one", "a lovely", "a single", "one charming")
_TAILS = (
    "",
    "placed near the large bright window",
    "situated in the quiet corner of the room",
    "arranged neatly along the main wall",
    "positioned quite close to the entrance",
    "set against the far wall of the area",
    "standing right beside the wooden doorway",
    "located at the very center of the space",
    "resting under the soft ceiling light",
    "aligned with the rest of the decor",
    "occupying a cozy spot near the corner",
    "facing the open side of the room",
)

# Classic English stop-word list (the usual IR core list plus the connective
# fillers used by the grammar above), applied before token-frequency counting.
STOP_WORDS = frozenset(
    """
    a about above after again against all am an and any are as at be because
    been before being below between both but by can could did do does doing
    down during each few for from further had has have having he her here hers
    herself him himself his how i if in into is it its itself just me more
    most my myself no nor not now of off on once only or other our ours
    ourselves out over own same she should so some such than that the their
    theirs them themselves then there these they this those through to too
    under until up very was we were what when where which while who whom why
    will with you your yours yourself yourselves
    moreover additionally furthermore also besides
    """.split()
)


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs for the synthetic corpus generator.

    ``separability`` is the lambda in [0, 1] weighting class prototypes against
    noise in the viewpoint features: 1 gives exactly the prototype (noiseless),
    0 gives pure noise. ``tag_noise_rate`` is the probability that a viewpoint
    tag is replaced by a different class (possibly "unknown"), emulating
    detector error.
    """

    categories: tuple[str, ...] = FURNITURE_CLASSES
    styles: tuple[str, ...] = DEFAULT_STYLES
    themes: tuple[str, ...] = DEFAULT_THEMES
    materials: tuple[str, ...] = DEFAULT_MATERIALS
    separability: float = 1.0
    tag_noise_rate: float = 0.0
    feature_dim: int = 512
    target_description_words: float = 319.0
    target_sentence_words: float = 16.4
    item_count_sigma: float = 0.55
    max_items: int = 160
    prototype_seed: int = 8193
    vocab_version: str = "v1"

    def __post_init__(self) -> None:
        if not 0.0 <= self.separability <= 1.0:
            raise ConfigError(f"separability must be in [0, 1], got {self.separability}")
        if not 0.0 <= self.tag_noise_rate <= 1.0:
            raise ConfigError(f"tag_noise_rate must be in [0, 1], got {self.tag_noise_rate}")
        for name in ("categories", "styles", "themes", "materials"):
            table = getattr(self, name)
            if len(table) == 0:
                raise ConfigError(f"vocab table {name!r} is empty")
        for cat in self.categories:
            if cat not in FURNITURE_CLASSES:
                raise ConfigError(f"category {cat!r} is not in the fixed 25-class taxonomy")
        if self.feature_dim < 1:
            raise ConfigError("feature_dim must be >= 1")
        if self.target_description_words <= 0 or self.target_sentence_words <= 0:
            raise ConfigError("word-count targets must be positive")
        if self.item_count_sigma <= 0:
            raise ConfigError("item_count_sigma must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        d = dict(d)
        for key in ("categories", "styles", "themes", "materials"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass(eq=False)
class ApartmentRecord:
    """One apartment: viewpoint features, per-viewpoint tags, description."""

    id: str
    viewpoint_features: np.ndarray  # V x F, float32
    viewpoint_tags: list[FurnitureTag]
    description: str

    def __post_init__(self) -> None:
        feats = np.asarray(self.viewpoint_features, dtype=np.float32)
        if feats.ndim != 2 or feats.shape[0] < 1:
            raise ValueError(f"record {self.id}: features must be a V x F matrix with V >= 1")
        if len(self.viewpoint_tags) != feats.shape[0]:
            raise ValueError(
                f"record {self.id}: {len(self.viewpoint_tags)} tags for {feats.shape[0]} viewpoints"
            )
        if not self.description.strip():
            raise ValueError(f"record {self.id}: empty description")
        self.viewpoint_features = feats

    @property
    def num_viewpoints(self) -> int:
        return self.viewpoint_features.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ApartmentRecord):
            return NotImplemented
        return (
            self.id == other.id
            and self.description == other.description
            and self.viewpoint_tags == other.viewpoint_tags
            and self.viewpoint_features.shape == other.viewpoint_features.shape
            and np.array_equal(self.viewpoint_features, other.viewpoint_features)
        )


@dataclass
class CorpusManifest:
    num_apartments: int
    feature_dim: int
    generator_seed: int
    vocab_version: str
    feature_source: str  # "synthetic" | "joint-backbone" | "separate-backbone"
    split_assignments: dict[str, str]  # id -> "train" | "val" | "test"

    def __post_init__(self) -> None:
        if len(self.split_assignments) != self.num_apartments:
            raise ValueError("split assignments must cover every apartment id exactly once")
        bad = {s for s in self.split_assignments.values()} - set(SPLIT_NAMES)
        if bad:
            raise ValueError(f"unknown split names: {sorted(bad)}")

    def ids_for_split(self, split: str) -> list[str]:
        if split not in SPLIT_NAMES:
            raise ValueError(f"unknown split {split!r}")
        return [i for i, s in self.split_assignments.items() if s == split]

    def to_dict(self) -> dict:
        return {
            "num_apartments": self.num_apartments,
            "feature_dim": self.feature_dim,
            "generator_seed": self.generator_seed,
            "vocab_version": self.vocab_version,
            "feature_source": self.feature_source,
            "split_assignments": self.split_assignments,
        }


@dataclass
class Corpus:
    records: list[ApartmentRecord]
    manifest: CorpusManifest

    def __len__(self) -> int:
        return len(self.records)

    def by_id(self, record_id: str) -> ApartmentRecord:
        for rec in self.records:
            if rec.id == record_id:
                return rec
        raise KeyError(record_id)

    def split(self, name: str) -> list[ApartmentRecord]:
        wanted = set(self.manifest.ids_for_split(name))
        return [r for r in self.records if r.id in wanted]


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


def class_prototypes(config: GeneratorConfig) -> np.ndarray:
    """Unit-norm prototype vector per taxonomy class, seeded independently of
    the corpus seed so corpora with different seeds share the same class
    geometry."""
    rng = np.random.default_rng(config.prototype_seed)
    protos = rng.standard_normal((len(FURNITURE_CLASSES), config.feature_dim))
    protos /= np.linalg.norm(protos, axis=1, keepdims=True)
    return protos.astype(np.float32)


def _phrase_words(phrase: str) -> int:
    return len(phrase.split())


def expected_sentence_words(config: GeneratorConfig) -> float:
    """Exact expectation of the per-sentence word count under uniform choices
    from the phrase tables (the sampler draws each slot independently)."""

    def mean_len(options: tuple[str, ...]) -> float:
        return sum(_phrase_words(o) for o in options) / len(options)

    return (
        mean_len(_OPENERS)
        + mean_len(_QUANTIFIERS)
        + mean_len(config.styles)
        + mean_len(config.themes)
        + mean_len(config.materials)
        + mean_len(config.categories)
        + mean_len(_TAILS)
    )


def _compose_sentence(rng: np.random.Generator, config: GeneratorConfig, category: str) -> str:
    parts = [
        _OPENERS[rng.integers(len(_OPENERS))],
        _QUANTIFIERS[rng.integers(len(_QUANTIFIERS))],
        config.styles[rng.integers(len(config.styles))],
        config.themes[rng.integers(len(config.themes))],
        config.materials[rng.integers(len(config.materials))],
        category,
        _TAILS[rng.integers(len(_TAILS))],
    ]
    return " ".join(p for p in parts if p)


def _sample_item_count(rng: np.random.Generator, config: GeneratorConfig) -> int:
    target_items = config.target_description_words / expected_sentence_words(config)
    mu = math.log(target_items) - config.item_count_sigma**2 / 2.0
    raw = rng.lognormal(mean=mu, sigma=config.item_count_sigma)
    return max(1, min(config.max_items, int(round(raw))))


def _viewpoint_categories(rng: np.random.Generator, distinct: list[str]) -> list[str]:
    """Which category each viewpoint depicts: every distinct category once
    (shuffled), cycled up to the minimum or truncated at the maximum."""
    order = list(distinct)
    rng.shuffle(order)
    k = len(order)
    v = min(max(k, MIN_VIEWPOINTS), MAX_VIEWPOINTS)
    return [order[i % k] for i in range(v)]


def generate_corpus(n: int, seed: int, config: GeneratorConfig | None = None) -> Corpus:
    """Generate ``n`` apartments deterministically from ``seed`` and ``config``.

    Viewpoint features are ``lambda * prototype(class) + (1 - lambda) * noise``
    with unit-scale Gaussian noise, so at lambda=1 each viewpoint feature is
    exactly its class prototype.
    """
    if n < 1:
        raise ConfigError(f"corpus size must be >= 1, got {n}")
    config = config or GeneratorConfig()
    rng = np.random.default_rng(seed)
    protos = class_prototypes(config)
    lam = config.separability
    dim = config.feature_dim

    records: list[ApartmentRecord] = []
    for i in range(n):
        record_id = f"apt{i:06d}"
        m = _sample_item_count(rng, config)
        item_cats = [config.categories[j] for j in rng.integers(len(config.categories), size=m)]
        sentences = [_compose_sentence(rng, config, cat) for cat in item_cats]
        description = ". ".join(sentences) + "."

        distinct = sorted(set(item_cats))
        view_cats = _viewpoint_categories(rng, distinct)
        features = np.empty((len(view_cats), dim), dtype=np.float32)
        tags: list[FurnitureTag] = []
        for v, cat in enumerate(view_cats):
            ci = class_index(cat)
            noise = rng.standard_normal(dim) / math.sqrt(dim)
            features[v] = lam * protos[ci] + (1.0 - lam) * noise
            true_index = ci
            if config.tag_noise_rate > 0 and rng.random() < config.tag_noise_rate:
                # Corrupted tags always differ from the truth so the measured
                # corruption rate matches the configured one.
                offset = int(rng.integers(1, UNKNOWN_CLASS_INDEX + 1))
                true_index = (ci + offset) % (UNKNOWN_CLASS_INDEX + 1)
            tags.append(FurnitureTag(true_index))
        records.append(ApartmentRecord(record_id, features, tags, description))

    manifest = CorpusManifest(
        num_apartments=n,
        feature_dim=dim,
        generator_seed=seed,
        vocab_version=config.vocab_version,
        feature_source="synthetic",
        split_assignments=_assign_splits([r.id for r in records], (0.7, 0.15, 0.15), seed),
    )
    return Corpus(records, manifest)


# ---------------------------------------------------------------------------
# Splits
# ---------------------------------------------------------------------------


def _assign_splits(ids: list[str], ratios: tuple[float, float, float], seed: int) -> dict[str, str]:
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"split ratios must sum to 1, got {ratios}")
    if ratios[2] <= 0.0:
        raise ConfigError("test split ratio must be positive (evaluation is impossible without it)")
    n = len(ids)
    n_train = round(n * ratios[0])
    n_val = round(n * ratios[1])
    if n_train + n_val > n:
        n_val = n - n_train
    order = list(ids)
    np.random.default_rng(seed).shuffle(order)
    assignments = {}
    for pos, record_id in enumerate(order):
        if pos < n_train:
            assignments[record_id] = "train"
        elif pos < n_train + n_val:
            assignments[record_id] = "val"
        else:
            assignments[record_id] = "test"
    return {i: assignments[i] for i in ids}  # keyed in corpus order


def split_corpus(corpus: Corpus, ratios: tuple[float, float, float], seed: int) -> CorpusManifest:
    """Re-split deterministically; returns a new manifest, leaving the corpus
    untouched."""
    m = corpus.manifest
    return CorpusManifest(
        num_apartments=m.num_apartments,
        feature_dim=m.feature_dim,
        generator_seed=m.generator_seed,
        vocab_version=m.vocab_version,
        feature_source=m.feature_source,
        split_assignments=_assign_splits([r.id for r in corpus.records], ratios, seed),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_MANIFEST_FILE = "manifest.json"
_FEATURES_FILE = "features.bin"
_TAGS_FILE = "tags.bin"
_DESCRIPTIONS_FILE = "descriptions.txt"


def _write_entry_header(buf: bytearray, record_id: str, v: int) -> None:
    raw = record_id.encode("utf-8")
    buf += struct.pack("<H", len(raw))
    buf += raw
    buf += struct.pack("<I", v)


def _read_entry_header(data: bytes, off: int) -> tuple[str, int, int]:
    (id_len,) = struct.unpack_from("<H", data, off)
    off += 2
    record_id = data[off : off + id_len].decode("utf-8")
    off += id_len
    (v,) = struct.unpack_from("<I", data, off)
    return record_id, v, off + 4


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus directory; output bytes depend only on the corpus."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)

    feat_buf = bytearray()
    tag_buf = bytearray()
    desc_lines = []
    for rec in corpus.records:
        v, f = rec.viewpoint_features.shape
        _write_entry_header(feat_buf, rec.id, v)
        feat_buf += struct.pack("<I", f)
        feat_buf += rec.viewpoint_features.astype("<f4").tobytes(order="C")
        _write_entry_header(tag_buf, rec.id, v)
        tag_buf += bytes(t.class_index for t in rec.viewpoint_tags)
        if "\n" in rec.description or "\t" in rec.description:
            raise ValueError(f"record {rec.id}: description contains newline or tab")
        desc_lines.append(f"{rec.id}\t{rec.description}\n")

    (path / _FEATURES_FILE).write_bytes(bytes(feat_buf))
    (path / _TAGS_FILE).write_bytes(bytes(tag_buf))
    (path / _DESCRIPTIONS_FILE).write_text("".join(desc_lines), encoding="utf-8")
    manifest_json = json.dumps(corpus.manifest.to_dict(), indent=2, sort_keys=True)
    (path / _MANIFEST_FILE).write_text(manifest_json + "\n", encoding="utf-8")


def load_corpus(path: str | Path) -> Corpus:
    path = Path(path)
    try:
        manifest_raw = json.loads((path / _MANIFEST_FILE).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CorpusLoadError(f"missing {_MANIFEST_FILE} in {path}") from None
    except json.JSONDecodeError as exc:
        raise CorpusLoadError(f"malformed {_MANIFEST_FILE}: {exc}") from None
    try:
        manifest = CorpusManifest(
            num_apartments=manifest_raw["num_apartments"],
            feature_dim=manifest_raw["feature_dim"],
            generator_seed=manifest_raw["generator_seed"],
            vocab_version=manifest_raw["vocab_version"],
            feature_source=manifest_raw["feature_source"],
            split_assignments=manifest_raw["split_assignments"],
        )
    except (KeyError, ValueError) as exc:
        raise CorpusLoadError(f"invalid manifest: {exc}") from None

    descriptions: dict[str, str] = {}
    for line_no, line in enumerate(
        (path / _DESCRIPTIONS_FILE).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if "\t" not in line:
            raise CorpusLoadError(f"{_DESCRIPTIONS_FILE}:{line_no}: missing id prefix")
        record_id, desc = line.split("\t", 1)
        descriptions[record_id] = desc

    tags: dict[str, list[FurnitureTag]] = {}
    tag_data = (path / _TAGS_FILE).read_bytes()
    off = 0
    while off < len(tag_data):
        record_id, v, off = _read_entry_header(tag_data, off)
        raw = tag_data[off : off + v]
        off += v
        for b in raw:
            if b > UNKNOWN_CLASS_INDEX:
                raise CorpusLoadError(f"record {record_id}: tag index {b} outside [0, 25]")
        tags[record_id] = [FurnitureTag(b) for b in raw]

    records: list[ApartmentRecord] = []
    feat_data = (path / _FEATURES_FILE).read_bytes()
    off = 0
    while off < len(feat_data):
        record_id, v, off = _read_entry_header(feat_data, off)
        (f,) = struct.unpack_from("<I", feat_data, off)
        off += 4
        if f != manifest.feature_dim:
            raise CorpusLoadError(
                f"record {record_id}: feature dim {f} != manifest feature_dim {manifest.feature_dim}"
            )
        count = v * f
        feats = np.frombuffer(feat_data, dtype="<f4", count=count, offset=off).reshape(v, f)
        off += count * 4
        if record_id not in tags:
            raise CorpusLoadError(f"record {record_id}: missing tags entry")
        if record_id not in descriptions:
            raise CorpusLoadError(f"record {record_id}: missing description line")
        if len(tags[record_id]) != v:
            raise CorpusLoadError(
                f"record {record_id}: {len(tags[record_id])} tags for {v} viewpoints"
            )
        records.append(
            ApartmentRecord(record_id, feats.copy(), tags[record_id], descriptions[record_id])
        )

    if len(records) != manifest.num_apartments:
        raise CorpusLoadError(
            f"manifest says {manifest.num_apartments} apartments, found {len(records)}"
        )
    missing = set(manifest.split_assignments) - {r.id for r in records}
    if missing:
        raise CorpusLoadError(f"split assignments reference unknown ids: {sorted(missing)[:3]}")
    return Corpus(records, manifest)


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


@dataclass
class CorpusStatistics:
    num_records: int
    description_words_mean: float
    description_words_min: int
    description_words_max: int
    sentence_words_mean: float
    sentence_words_min: int
    sentence_words_max: int
    sentences_per_description_mean: float
    top_tokens: list[tuple[str, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["top_tokens"] = [[t, f] for t, f in self.top_tokens]
        return d


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens, punctuation stripped."""
    out = []
    for raw in text.lower().split():
        tok = "".join(c for c in raw if c.isalnum())
        if tok:
            out.append(tok)
    return out


def corpus_statistics(corpus: Corpus, top_k: int = 30) -> CorpusStatistics:
    """Word-count summary plus top-k token frequencies after stop-word removal.

    Frequencies are counts normalized by the total number of retained tokens,
    so they lie in [0, 1] and sum to at most 1 over the full vocabulary.
    """
    from .encoders import split_sentences

    if not corpus.records:
        raise ValueError("empty corpus")

    desc_counts = []
    sent_counts = []
    token_counts: dict[str, int] = {}
    total_tokens = 0
    for rec in corpus.records:
        desc_counts.append(len(rec.description.split()))
        for sent in split_sentences(rec.description):
            sent_counts.append(len(sent.split()))
        for tok in tokenize(rec.description):
            if tok in STOP_WORDS:
                continue
            token_counts[tok] = token_counts.get(tok, 0) + 1
            total_tokens += 1

    ranked = sorted(token_counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    top = [(tok, cnt / total_tokens) for tok, cnt in ranked] if total_tokens else []
    return CorpusStatistics(
        num_records=len(corpus.records),
        description_words_mean=float(np.mean(desc_counts)),
        description_words_min=int(min(desc_counts)),
        description_words_max=int(max(desc_counts)),
        sentence_words_mean=float(np.mean(sent_counts)),
        sentence_words_min=int(min(sent_counts)),
        sentence_words_max=int(max(sent_counts)),
        sentences_per_description_mean=len(sent_counts) / len(desc_counts),
        top_tokens=top,
    )

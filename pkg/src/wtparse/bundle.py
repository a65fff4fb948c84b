"""Model bundles and contextual embeddings.

A :class:`ModelBundle` packages everything the expert heads need: the
attention matrices for head selection, the relation classifier, the LM-head
lemma table, the five morphology classifiers, the per-letter-group
segmentation classifiers, and the NER classifier, together with every label
inventory. Bundles are stored in a versioned little-endian binary format
(see docs/bundle-format.md) so they can be produced by external export
tools and loaded here bit-exactly.

Embeddings enter the engine one of two ways: a deterministic synthetic
encoder (keyed hashing of seed/position/surface, for desk-scale testing)
or an embedding-dump file of precomputed rows keyed by token sequence.
Row 0 is always the sequence-start row used as the root candidate.
"""

from __future__ import annotations

import hashlib
import struct
import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import BinaryIO, Iterable

import numpy as np

from .conllu import WholeToken
from .errors import EngineError
from .profile import LanguageProfile

BUNDLE_MAGIC = b"WTPB"
BUNDLE_FORMAT_VERSION = 1
DUMP_MAGIC = b"WTPE"
DUMP_FORMAT_VERSION = 1

DEFAULT_HEAD_DIM = 128

#: Label meaning "slot has no value" in feature slots and suffix functions.
NO_VALUE = "_"

UPOS_LABELS = [
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
]

RELATION_LABELS = [
    "acl", "acl:relcl", "advcl", "advmod", "amod", "appos", "aux", "case",
    "cc", "ccomp", "compound", "compound:affix", "conj", "cop", "csubj",
    "dep", "det", "discourse", "dislocated", "expl", "fixed", "flat",
    "goeswith", "iobj", "list", "mark", "nmod", "nmod:poss", "nsubj",
    "nummod", "obj", "obl", "orphan", "parataxis", "punct", "reparandum",
    "root", "vocative", "xcomp",
]

PROCLITIC_LABELS = ["CCONJ", "SCONJ", "ADP", "DET"]

NER_CLASSES = [
    "ANG", "DUC", "EVE", "FAC", "GPE", "INF", "LOC", "MISC", "ORG", "PER",
    "TIMEX", "TTL", "WOA",
]


class BundleError(EngineError):
    """Unreadable, truncated, or dimensionally inconsistent bundle data."""


class EmbeddingLookupError(EngineError):
    """An embedding dump has no record for the requested sentence."""


@dataclass(frozen=True)
class SlotSpec:
    """One categorical slot of a multi-slot classifier."""

    name: str
    values: tuple[str, ...]  # values[0] is conventionally NO_VALUE


def default_feature_slots() -> list[SlotSpec]:
    return [
        SlotSpec("Gender", (NO_VALUE, "Masc", "Fem")),
        SlotSpec("Number", (NO_VALUE, "Sing", "Plur")),
        SlotSpec("Person", (NO_VALUE, "1", "2", "3")),
        SlotSpec("Tense", (NO_VALUE, "Past", "Pres", "Fut")),
    ]


def default_suffix_feature_slots() -> list[SlotSpec]:
    # a pronominal suffix always carries person and number; only gender
    # can be unmarked (1st person forms)
    return [
        SlotSpec("Gender", (NO_VALUE, "Masc", "Fem")),
        SlotSpec("Number", ("Sing", "Plur")),
        SlotSpec("Person", ("1", "2", "3")),
    ]


def default_ner_labels() -> list[str]:
    labels = ["O"]
    for cls in NER_CLASSES:
        labels.append(f"B-{cls}")
        labels.append(f"I-{cls}")
    return labels


@dataclass
class ModelBundle:
    """Weights and label inventories for all expert heads.

    All weight matrices are float32 with the input dimension first, so a
    head evaluation is ``embedding_row @ matrix``.
    """

    d: int
    d_head: int
    wq: np.ndarray  # (d, d_head)
    wk: np.ndarray  # (d, d_head)
    relations: list[str]
    w_label: np.ndarray  # (2d, len(relations))
    vocab: list[str]
    blank_id: int
    lm_head: np.ndarray  # (d, len(vocab))
    upos_labels: list[str]
    w_pos: np.ndarray  # (d, len(upos_labels))
    proclitic_labels: list[str]
    w_proclitic: np.ndarray  # (d, len(proclitic_labels))
    feature_slots: list[SlotSpec]
    w_feats: np.ndarray  # (d, sum of slot sizes)
    suffix_function_labels: list[str]  # includes NO_VALUE for "no suffix"
    w_suffix_function: np.ndarray  # (d, len(suffix_function_labels))
    suffix_feature_slots: list[SlotSpec]
    w_suffix_feats: np.ndarray  # (d, sum of slot sizes)
    seg_groups: list[str]
    w_seg: np.ndarray  # (len(seg_groups), d, 2): columns (present, absent)
    ner_labels: list[str]
    w_ner: np.ndarray  # (d, len(ner_labels))
    format_version: int = BUNDLE_FORMAT_VERSION
    embed_seed: int | None = None  # set on synthetic bundles
    root_vector: np.ndarray | None = None  # optional dedicated root row

    def validate(self) -> None:
        """Check dimensional consistency; raise BundleError naming the head."""
        def expect(name: str, matrix: np.ndarray, shape: tuple[int, ...]):
            if tuple(matrix.shape) != shape:
                raise BundleError(
                    f"{name}: expected shape {shape}, got {tuple(matrix.shape)}")
        expect("head-attention wq", self.wq, (self.d, self.d_head))
        expect("head-attention wk", self.wk, (self.d, self.d_head))
        if not self.relations:
            raise BundleError("relation inventory is empty")
        expect("relation classifier", self.w_label, (2 * self.d, len(self.relations)))
        if not self.vocab:
            raise BundleError("lemma vocabulary is empty")
        if not 0 <= self.blank_id < len(self.vocab):
            raise BundleError(f"blank id {self.blank_id} outside vocabulary")
        expect("lemma head", self.lm_head, (self.d, len(self.vocab)))
        if not self.upos_labels:
            raise BundleError("POS inventory is empty")
        expect("pos classifier", self.w_pos, (self.d, len(self.upos_labels)))
        expect("proclitic classifier", self.w_proclitic,
               (self.d, len(self.proclitic_labels)))
        expect("feature classifier", self.w_feats,
               (self.d, sum(len(s.values) for s in self.feature_slots)))
        if NO_VALUE not in self.suffix_function_labels:
            raise BundleError("suffix-function inventory lacks a no-suffix label")
        expect("suffix-function classifier", self.w_suffix_function,
               (self.d, len(self.suffix_function_labels)))
        expect("suffix-feature classifier", self.w_suffix_feats,
               (self.d, sum(len(s.values) for s in self.suffix_feature_slots)))
        if not self.seg_groups:
            raise BundleError("segmentation group inventory is empty")
        expect("segmentation classifiers", self.w_seg, (len(self.seg_groups), self.d, 2))
        expect("ner classifier", self.w_ner, (self.d, len(self.ner_labels)))
        _validate_ner_labels(self.ner_labels)
        if self.root_vector is not None:
            expect("root vector", self.root_vector, (self.d,))


def _validate_ner_labels(labels: list[str]) -> None:
    if labels.count("O") != 1:
        raise BundleError("ner inventory must contain exactly one O label")
    classes_b, classes_i = set(), set()
    for label in labels:
        if label == "O":
            continue
        kind, _, cls = label.partition("-")
        if kind not in ("B", "I") or not cls:
            raise BundleError(f"bad ner label {label!r}")
        (classes_b if kind == "B" else classes_i).add(cls)
    if classes_b != classes_i:
        raise BundleError("ner B/I labels do not pair up by class")
    if len(labels) != 2 * len(classes_b) + 1:
        raise BundleError(
            f"ner inventory has {len(labels)} labels for {len(classes_b)} classes")


# ---------------------------------------------------------------------------
# binary format
# ---------------------------------------------------------------------------

_FLAG_EMBED_SEED = 1
_FLAG_ROOT_VECTOR = 2


class _Reader:
    """Tracks the byte offset so truncation errors can name it."""

    def __init__(self, fh: BinaryIO):
        self.fh = fh
        self.offset = 0
        self.crc = 0

    def take(self, size: int, checksummed: bool = True) -> bytes:
        data = self.fh.read(size)
        if len(data) != size:
            raise BundleError(
                f"truncated file: wanted {size} bytes at offset {self.offset}, "
                f"got {len(data)}")
        self.offset += size
        if checksummed:
            self.crc = zlib.crc32(data, self.crc)
        return data

    def u32(self, checksummed: bool = True) -> int:
        return struct.unpack("<I", self.take(4, checksummed))[0]

    def i64(self) -> int:
        return struct.unpack("<q", self.take(8))[0]

    def string(self) -> str:
        length = self.u32()
        data = self.take(length)
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as err:
            raise BundleError(
                f"corrupt label table near offset {self.offset}: {err}") from err

    def strings(self) -> list[str]:
        return [self.string() for _ in range(self.u32())]

    def tensor(self) -> np.ndarray:
        rank = self.u32()
        shape = tuple(self.u32() for _ in range(rank))
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        data = self.take(4 * count)
        return np.frombuffer(data, dtype="<f4").reshape(shape).copy()


class _Writer:
    def __init__(self, fh: BinaryIO):
        self.fh = fh
        self.crc = 0

    def put(self, data: bytes, checksummed: bool = True) -> None:
        self.fh.write(data)
        if checksummed:
            self.crc = zlib.crc32(data, self.crc)

    def u32(self, value: int, checksummed: bool = True) -> None:
        self.put(struct.pack("<I", value), checksummed)

    def i64(self, value: int) -> None:
        self.put(struct.pack("<q", value))

    def string(self, value: str) -> None:
        data = value.encode("utf-8")
        self.u32(len(data))
        self.put(data)

    def strings(self, values: Iterable[str]) -> None:
        values = list(values)
        self.u32(len(values))
        for value in values:
            self.string(value)

    def tensor(self, array: np.ndarray) -> None:
        array = np.ascontiguousarray(array, dtype="<f4")
        self.u32(array.ndim)
        for dim in array.shape:
            self.u32(dim)
        self.put(array.tobytes())


def _write_slots(writer: _Writer, slots: list[SlotSpec]) -> None:
    writer.u32(len(slots))
    for slot in slots:
        writer.string(slot.name)
        writer.strings(slot.values)


def _read_slots(reader: _Reader) -> list[SlotSpec]:
    return [SlotSpec(reader.string(), tuple(reader.strings()))
            for _ in range(reader.u32())]


def save_bundle(bundle: ModelBundle, path: str | Path) -> None:
    """Write a validated bundle; round-trips bit-exactly through load."""
    bundle.validate()
    with open(path, "wb") as fh:
        writer = _Writer(fh)
        writer.put(BUNDLE_MAGIC, checksummed=False)
        writer.u32(bundle.format_version, checksummed=False)
        flags = (_FLAG_EMBED_SEED if bundle.embed_seed is not None else 0) | (
            _FLAG_ROOT_VECTOR if bundle.root_vector is not None else 0)
        writer.u32(flags)
        writer.u32(bundle.d)
        writer.u32(bundle.d_head)
        if bundle.embed_seed is not None:
            writer.i64(bundle.embed_seed)
        if bundle.root_vector is not None:
            writer.tensor(bundle.root_vector)
        writer.strings(bundle.relations)
        writer.tensor(bundle.wq)
        writer.tensor(bundle.wk)
        writer.tensor(bundle.w_label)
        writer.strings(bundle.vocab)
        writer.u32(bundle.blank_id)
        writer.tensor(bundle.lm_head)
        writer.strings(bundle.upos_labels)
        writer.tensor(bundle.w_pos)
        writer.strings(bundle.proclitic_labels)
        writer.tensor(bundle.w_proclitic)
        _write_slots(writer, bundle.feature_slots)
        writer.tensor(bundle.w_feats)
        writer.strings(bundle.suffix_function_labels)
        writer.tensor(bundle.w_suffix_function)
        _write_slots(writer, bundle.suffix_feature_slots)
        writer.tensor(bundle.w_suffix_feats)
        writer.strings(bundle.seg_groups)
        writer.tensor(bundle.w_seg)
        writer.strings(bundle.ner_labels)
        writer.tensor(bundle.w_ner)
        writer.u32(writer.crc, checksummed=False)


def load_bundle(path: str | Path) -> ModelBundle:
    """Read and validate a bundle file.

    Rejects bad magic, unsupported versions, truncation (with the byte
    offset), checksum mismatches, and any dimensional inconsistency.
    """
    with open(path, "rb") as fh:
        reader = _Reader(fh)
        magic = reader.take(4, checksummed=False)
        if magic != BUNDLE_MAGIC:
            raise BundleError(f"not a model bundle (magic {magic!r})")
        version = reader.u32(checksummed=False)
        if version != BUNDLE_FORMAT_VERSION:
            raise BundleError(f"unsupported bundle format version {version}")
        flags = reader.u32()
        d = reader.u32()
        d_head = reader.u32()
        embed_seed = reader.i64() if flags & _FLAG_EMBED_SEED else None
        root_vector = reader.tensor() if flags & _FLAG_ROOT_VECTOR else None
        bundle = ModelBundle(
            d=d,
            d_head=d_head,
            relations=reader.strings(),
            wq=reader.tensor(),
            wk=reader.tensor(),
            w_label=reader.tensor(),
            vocab=reader.strings(),
            blank_id=reader.u32(),
            lm_head=reader.tensor(),
            upos_labels=reader.strings(),
            w_pos=reader.tensor(),
            proclitic_labels=reader.strings(),
            w_proclitic=reader.tensor(),
            feature_slots=_read_slots(reader),
            w_feats=reader.tensor(),
            suffix_function_labels=reader.strings(),
            w_suffix_function=reader.tensor(),
            suffix_feature_slots=_read_slots(reader),
            w_suffix_feats=reader.tensor(),
            seg_groups=reader.strings(),
            w_seg=reader.tensor(),
            ner_labels=reader.strings(),
            w_ner=reader.tensor(),
            format_version=version,
            embed_seed=embed_seed,
            root_vector=root_vector,
        )
        expected_crc = reader.crc
        stored_crc = reader.u32(checksummed=False)
        if stored_crc != expected_crc:
            raise BundleError(
                f"checksum mismatch: stored {stored_crc:#010x}, "
                f"computed {expected_crc:#010x}")
    bundle.validate()
    return bundle


# ---------------------------------------------------------------------------
# synthetic bundles and embeddings
# ---------------------------------------------------------------------------

def synthetic_bundle(seed: int, d: int, profile: LanguageProfile, *,
                     d_head: int = DEFAULT_HEAD_DIM,
                     vocab_size: int = 200) -> ModelBundle:
    """A deterministic random bundle for desk-scale runs and tests."""
    if d < 4:
        raise ValueError(f"embedding dimension must be >= 4, got {d}")
    rng = np.random.default_rng(seed)

    def weights(*shape: int) -> np.ndarray:
        return (rng.standard_normal(shape) / np.sqrt(d)).astype(np.float32)

    vocab = ["[BLANK]"] + [f"lemma{i}" for i in range(1, vocab_size)]
    feature_slots = default_feature_slots()
    suffix_slots = default_suffix_feature_slots()
    suffix_functions = [NO_VALUE] + profile.suffix_functions()
    ner_labels = default_ner_labels()
    bundle = ModelBundle(
        d=d,
        d_head=d_head,
        wq=weights(d, d_head),
        wk=weights(d, d_head),
        relations=list(RELATION_LABELS),
        w_label=weights(2 * d, len(RELATION_LABELS)),
        vocab=vocab,
        blank_id=0,
        lm_head=weights(d, len(vocab)),
        upos_labels=list(UPOS_LABELS),
        w_pos=weights(d, len(UPOS_LABELS)),
        proclitic_labels=list(PROCLITIC_LABELS),
        w_proclitic=weights(d, len(PROCLITIC_LABELS)),
        feature_slots=feature_slots,
        w_feats=weights(d, sum(len(s.values) for s in feature_slots)),
        suffix_function_labels=suffix_functions,
        w_suffix_function=weights(d, len(suffix_functions)),
        suffix_feature_slots=suffix_slots,
        w_suffix_feats=weights(d, sum(len(s.values) for s in suffix_slots)),
        seg_groups=list(profile.letter_groups),
        w_seg=weights(len(profile.letter_groups), d, 2),
        ner_labels=ner_labels,
        w_ner=weights(d, len(ner_labels)),
        embed_seed=seed,
    )
    bundle.validate()
    return bundle


def _hashed_row(seed: int, position: int, surface: str, d: int) -> np.ndarray:
    digest = hashlib.sha256(f"{seed}|{position}|{surface}".encode()).digest()
    words = np.frombuffer(digest, dtype="<u8")
    return np.random.default_rng(words).standard_normal(d).astype(np.float32)


def sentence_key(tokens: list[WholeToken]) -> bytes:
    """Dump lookup key: SHA-256 of the space-joined token surfaces."""
    return hashlib.sha256(" ".join(t.surface for t in tokens).encode()).digest()


@dataclass
class EmbeddingDump:
    """Precomputed embedding records keyed by token sequence."""

    d: int
    records: dict[bytes, np.ndarray] = field(default_factory=dict)

    def add(self, tokens: list[WholeToken], rows: np.ndarray) -> None:
        rows = np.ascontiguousarray(rows, dtype=np.float32)
        if rows.shape != (len(tokens) + 1, self.d):
            raise BundleError(
                f"embedding record must be ({len(tokens) + 1}, {self.d}), "
                f"got {rows.shape}")
        self.records[sentence_key(tokens)] = rows


def save_embedding_dump(dump: EmbeddingDump, path: str | Path) -> None:
    with open(path, "wb") as fh:
        writer = _Writer(fh)
        writer.put(DUMP_MAGIC, checksummed=False)
        writer.u32(DUMP_FORMAT_VERSION, checksummed=False)
        writer.u32(dump.d)
        writer.u32(len(dump.records))
        for key, rows in dump.records.items():
            writer.put(key)
            writer.u32(rows.shape[0])
            writer.put(np.ascontiguousarray(rows, dtype="<f4").tobytes())
        writer.u32(writer.crc, checksummed=False)


def load_embedding_dump(path: str | Path) -> EmbeddingDump:
    with open(path, "rb") as fh:
        reader = _Reader(fh)
        magic = reader.take(4, checksummed=False)
        if magic != DUMP_MAGIC:
            raise BundleError(f"not an embedding dump (magic {magic!r})")
        version = reader.u32(checksummed=False)
        if version != DUMP_FORMAT_VERSION:
            raise BundleError(f"unsupported dump format version {version}")
        d = reader.u32()
        count = reader.u32()
        dump = EmbeddingDump(d=d)
        for _ in range(count):
            key = reader.take(32)
            rows = reader.u32()
            data = reader.take(4 * rows * d)
            dump.records[key] = np.frombuffer(data, dtype="<f4").reshape(rows, d).copy()
        expected_crc = reader.crc
        stored_crc = reader.u32(checksummed=False)
        if stored_crc != expected_crc:
            raise BundleError(
                f"checksum mismatch: stored {stored_crc:#010x}, "
                f"computed {expected_crc:#010x}")
    return dump


def embed(tokens: list[WholeToken],
          source: ModelBundle | EmbeddingDump) -> np.ndarray:
    """Embedding matrix for a sentence: (n+1, d), row 0 = root row.

    With a synthetic bundle, each row is derived from a keyed hash of
    (seed, position, surface), so identical sentences embed identically.
    With an embedding dump, the whole record is looked up by sentence key.
    """
    if not tokens:
        raise ValueError("cannot embed an empty sentence")
    if isinstance(source, EmbeddingDump):
        key = sentence_key(tokens)
        record = source.records.get(key)
        if record is None:
            text = " ".join(t.surface for t in tokens)
            raise EmbeddingLookupError(f"no embedding record for: {text}")
        return record
    if source.embed_seed is None:
        raise BundleError(
            "bundle has no synthetic embedder; supply an embedding dump")
    rows = np.empty((len(tokens) + 1, source.d), dtype=np.float32)
    rows[0] = (source.root_vector if source.root_vector is not None
               else _hashed_row(source.embed_seed, 0, "", source.d))
    for token in tokens:
        rows[token.index] = _hashed_row(
            source.embed_seed, token.index, token.surface, source.d)
    return rows


def with_root_vector(bundle: ModelBundle, vector: np.ndarray) -> ModelBundle:
    """Copy of the bundle using a dedicated root row instead of the hash."""
    return replace(bundle, root_vector=np.asarray(vector, dtype=np.float32))


def vocab_coverage(lemmas: Iterable[str], vocab: Iterable[str]) -> float:
    """Fraction of lemma occurrences present in a vocabulary list."""
    vocab_set = set(vocab)
    total = hits = 0
    for lemma in lemmas:
        total += 1
        hits += lemma in vocab_set
    if total == 0:
        raise ValueError("no lemmas supplied")
    return hits / total

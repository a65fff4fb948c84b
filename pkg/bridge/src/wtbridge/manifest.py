"""Export manifests: what to pull from a checkpoint and where to put it.

A manifest is a JSON file describing one export job:

```json
{
  "format_version": 1,
  "checkpoint": "path/to/checkpoint-dir",
  "embedding_dim": 768,
  "head_dim": 128,
  "vocab_size": 128000,
  "heads": {"dep.query": [768, 128], ...},
  "bundle_path": "model.wtpb",
  "embeddings_path": "rows.wtpe"
}
```

The checkpoint directory holds the encoder and tokenizer in standard
`save_pretrained` layout plus two bridge-specific files: ``heads.pt``
(a torch state dict of the fine-tuned expert-head matrices, input
dimension first) and ``labels.json`` (every label inventory). The manifest
shapes must agree exactly with the inventories; mismatches are refused
before anything is written.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

#: Expert-head tensors every checkpoint must provide, with shape builders
#: keyed on (embedding_dim, head_dim, labels).
HEAD_NAMES = [
    "dep.query", "dep.key", "relations.weight", "lemma.weight", "morph.pos",
    "morph.proclitic", "morph.features", "morph.suffix_function",
    "morph.suffix_features", "seg.groups", "ner.weight",
]

MANIFEST_VERSION = 1


class BridgeError(Exception):
    """Any export problem: missing heads, shape mismatches, corruption."""


@dataclass
class Labels:
    """Label inventories read from the checkpoint's labels.json."""

    relations: list[str]
    vocab: list[str]
    blank_id: int
    upos: list[str]
    proclitic: list[str]
    feature_slots: list[dict]
    suffix_functions: list[str]
    suffix_feature_slots: list[dict]
    seg_groups: list[str]
    ner: list[str]

    @staticmethod
    def load(path: Path) -> "Labels":
        raw = json.loads(path.read_text(encoding="utf-8"))
        missing = {f.name for f in
                   Labels.__dataclass_fields__.values()} - raw.keys()  # type: ignore[attr-defined]
        if missing:
            raise BridgeError(f"labels.json missing keys: {sorted(missing)}")
        return Labels(**{key: raw[key] for key in
                         Labels.__dataclass_fields__})  # type: ignore[attr-defined]

    def slot_width(self, slots: list[dict]) -> int:
        return sum(len(slot["values"]) for slot in slots)


@dataclass
class ExportManifest:
    checkpoint: Path
    embedding_dim: int
    head_dim: int
    vocab_size: int
    heads: dict[str, tuple[int, ...]]
    bundle_path: Path
    embeddings_path: Path | None = None
    format_version: int = MANIFEST_VERSION
    labels: Labels = field(init=False)

    def __post_init__(self):
        self.labels = Labels.load(Path(self.checkpoint) / "labels.json")
        self.validate()

    def expected_shapes(self) -> dict[str, tuple[int, ...]]:
        d, dh, labels = self.embedding_dim, self.head_dim, self.labels
        return {
            "dep.query": (d, dh),
            "dep.key": (d, dh),
            "relations.weight": (2 * d, len(labels.relations)),
            "lemma.weight": (d, len(labels.vocab)),
            "morph.pos": (d, len(labels.upos)),
            "morph.proclitic": (d, len(labels.proclitic)),
            "morph.features": (d, labels.slot_width(labels.feature_slots)),
            "morph.suffix_function": (d, len(labels.suffix_functions)),
            "morph.suffix_features":
                (d, labels.slot_width(labels.suffix_feature_slots)),
            "seg.groups": (len(labels.seg_groups), d, 2),
            "ner.weight": (d, len(labels.ner)),
        }

    def validate(self) -> None:
        if len(self.labels.vocab) != self.vocab_size:
            raise BridgeError(
                f"manifest vocab_size {self.vocab_size} != labels vocabulary "
                f"size {len(self.labels.vocab)}")
        if not 0 <= self.labels.blank_id < self.vocab_size:
            raise BridgeError(f"blank_id {self.labels.blank_id} out of range")
        expected = self.expected_shapes()
        missing = expected.keys() - self.heads.keys()
        if missing:
            raise BridgeError(f"manifest missing heads: {sorted(missing)}")
        unknown = self.heads.keys() - expected.keys()
        if unknown:
            raise BridgeError(f"manifest has unknown heads: {sorted(unknown)}")
        for name, shape in expected.items():
            declared = tuple(self.heads[name])
            if declared != shape:
                raise BridgeError(
                    f"head {name}: manifest declares shape {declared}, "
                    f"label inventories require {shape}")


def load_manifest(path: str | Path) -> ExportManifest:
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    if raw.get("format_version") != MANIFEST_VERSION:
        raise BridgeError(
            f"unsupported manifest format_version {raw.get('format_version')}")
    required = {"checkpoint", "embedding_dim", "head_dim", "vocab_size",
                "heads", "bundle_path"}
    missing = required - raw.keys()
    if missing:
        raise BridgeError(f"manifest missing keys: {sorted(missing)}")
    base = path.parent
    embeddings = raw.get("embeddings_path")
    return ExportManifest(
        checkpoint=base / raw["checkpoint"],
        embedding_dim=int(raw["embedding_dim"]),
        head_dim=int(raw["head_dim"]),
        vocab_size=int(raw["vocab_size"]),
        heads={name: tuple(shape) for name, shape in raw["heads"].items()},
        bundle_path=base / raw["bundle_path"],
        embeddings_path=base / embeddings if embeddings else None,
    )

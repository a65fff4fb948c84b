"""The three export operations: bundle, embeddings, verification."""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .formats import (BUNDLE_MAGIC, FORMAT_VERSION, Reader, write_bundle,
                      write_embedding_dump)
from .manifest import BridgeError, ExportManifest


def _load_head_weights(manifest: ExportManifest) -> dict[str, np.ndarray]:
    import torch

    heads_path = Path(manifest.checkpoint) / "heads.pt"
    if not heads_path.exists():
        raise BridgeError(f"checkpoint has no heads.pt: {heads_path}")
    state = torch.load(heads_path, map_location="cpu", weights_only=True)
    expected = manifest.expected_shapes()
    missing = expected.keys() - state.keys()
    if missing:
        raise BridgeError(
            f"checkpoint heads missing: expected {sorted(expected)}, "
            f"found {sorted(state)}")
    weights: dict[str, np.ndarray] = {}
    for name, shape in expected.items():
        tensor = state[name].detach().to(torch.float32).cpu().numpy()
        if tuple(tensor.shape) != shape:
            raise BridgeError(
                f"head {name}: checkpoint shape {tuple(tensor.shape)} != "
                f"required {shape}")
        weights[name] = tensor
    return weights


def export_bundle(manifest: ExportManifest) -> Path:
    """Write the bundle declared by the manifest; refuses before writing
    anything when a head is missing or a shape disagrees."""
    weights = _load_head_weights(manifest)
    write_bundle(manifest.bundle_path, d=manifest.embedding_dim,
                 d_head=manifest.head_dim, labels=manifest.labels,
                 weights=weights)
    return Path(manifest.bundle_path)


def sentence_key(surfaces: list[str]) -> bytes:
    return hashlib.sha256(" ".join(surfaces).encode()).digest()


def _encoder(manifest: ExportManifest):
    import torch
    from transformers import AutoModel, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(str(manifest.checkpoint))
    model = AutoModel.from_pretrained(str(manifest.checkpoint))
    model.eval()
    torch.set_grad_enabled(False)
    return tokenizer, model


def export_embeddings(manifest: ExportManifest,
                      sentences_path: str | Path) -> Path:
    """Dump one embedding record per input line.

    Each record holds the sequence-start row plus the first-word-piece row
    of every whitespace token, in order. A token the tokenizer maps to zero
    word pieces aborts the export (the engine could never align it).
    """
    if manifest.embeddings_path is None:
        raise BridgeError("manifest declares no embeddings_path")
    tokenizer, model = _encoder(manifest)
    records: list[tuple[bytes, np.ndarray]] = []
    lines = [line for line in
             Path(sentences_path).read_text(encoding="utf-8").splitlines()
             if line.strip()]
    for number, line in enumerate(lines, start=1):
        surfaces = line.split()
        encoded = tokenizer(surfaces, is_split_into_words=True,
                            return_tensors="pt")
        hidden = model(**encoded).last_hidden_state[0].numpy()
        if hidden.shape[1] != manifest.embedding_dim:
            raise BridgeError(
                f"encoder emits dimension {hidden.shape[1]}, manifest "
                f"declares {manifest.embedding_dim}")
        word_ids = encoded.word_ids(0)
        first_piece: dict[int, int] = {}
        for position, word in enumerate(word_ids):
            if word is not None and word not in first_piece:
                first_piece[word] = position
        rows = np.empty((len(surfaces) + 1, manifest.embedding_dim),
                        dtype=np.float32)
        rows[0] = hidden[0]  # sequence-start row
        for index, surface in enumerate(surfaces):
            if index not in first_piece:
                raise BridgeError(
                    f"sentence {number}: token {surface!r} produced no "
                    f"word pieces")
            rows[index + 1] = hidden[first_piece[index]]
        records.append((sentence_key(surfaces), rows))
    write_embedding_dump(manifest.embeddings_path, manifest.embedding_dim,
                         records)
    return Path(manifest.embeddings_path)


def verify_bundle(path: str | Path) -> dict:
    """Re-read a bundle structurally: header, shapes, checksum.

    Returns a report of what was found; raises BridgeError naming the byte
    offset on truncation and reporting both checksums on corruption.
    """
    with open(path, "rb") as fh:
        reader = Reader(fh)
        magic = reader.take(4, checksummed=False)
        if magic != BUNDLE_MAGIC:
            raise BridgeError(f"not a bundle: magic {magic!r} at offset 0")
        version = reader.u32(checksummed=False)
        if version != FORMAT_VERSION:
            raise BridgeError(f"unsupported format version {version}")
        flags = reader.u32()
        d = reader.u32()
        d_head = reader.u32()
        if flags & 1:
            reader.take(8)  # synthetic embedding seed
        if flags & 2:
            shape = reader.tensor_shape()
            if shape != (d,):
                raise BridgeError(f"root vector has shape {shape}, not ({d},)")

        def expect(name: str, shape: tuple[int, ...], *wanted: int):
            if shape != tuple(wanted):
                raise BridgeError(
                    f"{name}: shape {shape} != {tuple(wanted)} "
                    f"(before offset {reader.offset})")

        relations = reader.strings()
        expect("dep.query", reader.tensor_shape(), d, d_head)
        expect("dep.key", reader.tensor_shape(), d, d_head)
        expect("relations.weight", reader.tensor_shape(),
               2 * d, len(relations))
        vocab = reader.strings()
        blank_id = reader.u32()
        if blank_id >= len(vocab):
            raise BridgeError(f"blank id {blank_id} outside vocabulary")
        expect("lemma.weight", reader.tensor_shape(), d, len(vocab))
        upos = reader.strings()
        expect("morph.pos", reader.tensor_shape(), d, len(upos))
        proclitic = reader.strings()
        expect("morph.proclitic", reader.tensor_shape(), d, len(proclitic))
        feature_width = reader.slots_width()
        expect("morph.features", reader.tensor_shape(), d, feature_width)
        suffix_functions = reader.strings()
        expect("morph.suffix_function", reader.tensor_shape(),
               d, len(suffix_functions))
        suffix_width = reader.slots_width()
        expect("morph.suffix_features", reader.tensor_shape(), d, suffix_width)
        seg_groups = reader.strings()
        expect("seg.groups", reader.tensor_shape(), len(seg_groups), d, 2)
        ner = reader.strings()
        expect("ner.weight", reader.tensor_shape(), d, len(ner))
        computed = reader.crc
        stored = reader.u32(checksummed=False)
        if stored != computed:
            raise BridgeError(
                f"checksum mismatch: stored {stored:#010x}, computed "
                f"{computed:#010x}")
        size = reader.offset
    return {
        "ok": True,
        "d": d,
        "d_head": d_head,
        "relations": len(relations),
        "vocab": len(vocab),
        "seg_groups": len(seg_groups),
        "ner_labels": len(ner),
        "bytes": size,
    }
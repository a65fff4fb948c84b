"""Writers and a structural verifier for the engine's binary formats.

Implemented from the format document (bundle-format.md) rather than shared
code, since the byte layout is the contract between this exporter and any
consumer. Everything is little-endian; a zlib CRC32 over the payload
(everything after the 8-byte magic + version prefix) trails each file.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path
from typing import BinaryIO, Iterable

import numpy as np

from .manifest import BridgeError

BUNDLE_MAGIC = b"WTPB"
DUMP_MAGIC = b"WTPE"
FORMAT_VERSION = 1

FLAG_EMBED_SEED = 1
FLAG_ROOT_VECTOR = 2


class Writer:
    def __init__(self, fh: BinaryIO):
        self.fh = fh
        self.crc = 0

    def raw(self, data: bytes, checksummed: bool = True) -> None:
        self.fh.write(data)
        if checksummed:
            self.crc = zlib.crc32(data, self.crc)

    def u32(self, value: int, checksummed: bool = True) -> None:
        self.raw(struct.pack("<I", value), checksummed)

    def string(self, value: str) -> None:
        data = value.encode("utf-8")
        self.u32(len(data))
        self.raw(data)

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
        self.raw(array.tobytes())

    def slots(self, slots: list[dict]) -> None:
        self.u32(len(slots))
        for slot in slots:
            self.string(slot["name"])
            self.strings(slot["values"])

    def finish(self) -> None:
        self.u32(self.crc, checksummed=False)


def write_bundle(path: str | Path, *, d: int, d_head: int, labels,
                 weights: dict[str, np.ndarray]) -> None:
    """Write a complete bundle file from validated inventories + matrices."""
    with open(path, "wb") as fh:
        out = Writer(fh)
        out.raw(BUNDLE_MAGIC, checksummed=False)
        out.u32(FORMAT_VERSION, checksummed=False)
        out.u32(0)  # exported bundles carry no synthetic seed or root vector
        out.u32(d)
        out.u32(d_head)
        out.strings(labels.relations)
        out.tensor(weights["dep.query"])
        out.tensor(weights["dep.key"])
        out.tensor(weights["relations.weight"])
        out.strings(labels.vocab)
        out.u32(labels.blank_id)
        out.tensor(weights["lemma.weight"])
        out.strings(labels.upos)
        out.tensor(weights["morph.pos"])
        out.strings(labels.proclitic)
        out.tensor(weights["morph.proclitic"])
        out.slots(labels.feature_slots)
        out.tensor(weights["morph.features"])
        out.strings(labels.suffix_functions)
        out.tensor(weights["morph.suffix_function"])
        out.slots(labels.suffix_feature_slots)
        out.tensor(weights["morph.suffix_features"])
        out.strings(labels.seg_groups)
        out.tensor(weights["seg.groups"])
        out.strings(labels.ner)
        out.tensor(weights["ner.weight"])
        out.finish()


def write_embedding_dump(path: str | Path, d: int,
                         records: list[tuple[bytes, np.ndarray]]) -> None:
    with open(path, "wb") as fh:
        out = Writer(fh)
        out.raw(DUMP_MAGIC, checksummed=False)
        out.u32(FORMAT_VERSION, checksummed=False)
        out.u32(d)
        out.u32(len(records))
        for key, rows in records:
            if len(key) != 32:
                raise BridgeError("record keys must be 32-byte digests")
            out.raw(key)
            out.u32(rows.shape[0])
            out.raw(np.ascontiguousarray(rows, dtype="<f4").tobytes())
        out.finish()


class Reader:
    """Offset-tracking reader used by the structural verifier."""

    def __init__(self, fh: BinaryIO):
        self.fh = fh
        self.offset = 0
        self.crc = 0

    def take(self, size: int, checksummed: bool = True) -> bytes:
        data = self.fh.read(size)
        if len(data) != size:
            raise BridgeError(
                f"truncated file at offset {self.offset}: wanted {size} "
                f"bytes, got {len(data)}")
        self.offset += size
        if checksummed:
            self.crc = zlib.crc32(data, self.crc)
        return data

    def u32(self, checksummed: bool = True) -> int:
        return struct.unpack("<I", self.take(4, checksummed))[0]

    def string(self) -> str:
        length = self.u32()
        data = self.take(length)
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as err:
            raise BridgeError(
                f"corrupt string near offset {self.offset}: {err}") from err

    def strings(self) -> list[str]:
        return [self.string() for _ in range(self.u32())]

    def tensor_shape(self) -> tuple[int, ...]:
        """Read a tensor header and skip its payload."""
        rank = self.u32()
        shape = tuple(self.u32() for _ in range(rank))
        count = 1
        for dim in shape:
            count *= dim
        self.take(4 * count)
        return shape

    def slots_width(self) -> int:
        width = 0
        for _ in range(self.u32()):
            self.string()
            width += len(self.strings())
        return width

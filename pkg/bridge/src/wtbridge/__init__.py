"""Checkpoint-to-bundle export bridge.

Extracts fine-tuned expert-head weights and first-word-piece contextual
embeddings from a transformer checkpoint directory and writes them in the
engine's binary bundle / embedding-dump formats (see the engine's
docs/bundle-format.md). The bridge owns tokenization and word-piece
pooling; the consuming engine only ever sees one embedding row per whole
token plus the sequence-start row.
"""

__version__ = "0.1.0"

from .manifest import BridgeError, ExportManifest, load_manifest
from .export import export_bundle, export_embeddings, verify_bundle

__all__ = ["BridgeError", "ExportManifest", "load_manifest",
           "export_bundle", "export_embeddings", "verify_bundle",
           "__version__"]

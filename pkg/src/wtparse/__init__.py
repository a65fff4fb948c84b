"""Whole-token parsing engine for morphologically rich languages.

Five independent expert classifiers predict dependency structure, lemmas,
morphology, prefix segmentation, and named entities directly on
space-delimited tokens; a deterministic synthesis stage then merges the
predictions into a segmented Universal Dependencies analysis.
"""

__version__ = "0.1.0"

from .bundle import (EmbeddingDump, ModelBundle, embed, load_bundle,
                     load_embedding_dump, save_bundle, save_embedding_dump,
                     synthetic_bundle)
from .conllu import (UdNode, UdSentence, WholeToken, make_tokens,
                     parse_conllu, serialize_conllu, validate_tree)
from .decoder import argmax_heads, brute_force_mst, mst_decode
from .errors import EngineError
from .pipeline import ParseResult, parse_line, parse_tokens, run_heads
from .profile import (LanguageProfile, builtin_profile_path,
                      enumerate_valid_prefix_sets, load_profile)
from .scoring import (ScoreReport, multiset_f1, ner_token_f1, score_corpus,
                      whole_token_scores)
from .synthesis import SynthesisInput, convert_to_ud, decompose_ud

__all__ = [
    "EmbeddingDump", "ModelBundle", "embed", "load_bundle",
    "load_embedding_dump", "save_bundle", "save_embedding_dump",
    "synthetic_bundle", "UdNode", "UdSentence", "WholeToken", "make_tokens",
    "parse_conllu", "serialize_conllu", "validate_tree", "argmax_heads",
    "brute_force_mst", "mst_decode", "EngineError", "ParseResult",
    "parse_line", "parse_tokens", "run_heads", "LanguageProfile",
    "builtin_profile_path", "enumerate_valid_prefix_sets", "load_profile",
    "ScoreReport", "multiset_f1", "ner_token_f1", "score_corpus",
    "whole_token_scores", "SynthesisInput", "convert_to_ud", "decompose_ud",
    "__version__",
]

"""End-to-end orchestration: embeddings -> expert heads -> tree -> UD."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bundle import EmbeddingDump, ModelBundle, embed
from .conllu import UdSentence, WholeToken, make_tokens
from .decoder import mst_decode
from .heads import (DepPrediction, NerPrediction, label_relations,
                    predict_lemmas, predict_morph, predict_ner, predict_seg,
                    score_heads)
from .profile import LanguageProfile
from .synthesis import SynthesisInput, convert_to_ud


@dataclass
class ParseResult:
    sentence: UdSentence
    ner: NerPrediction


def run_heads(embeddings: np.ndarray, tokens: list[WholeToken],
              bundle: ModelBundle, profile: LanguageProfile
              ) -> tuple[SynthesisInput, NerPrediction]:
    """Evaluate all five experts and assemble the synthesis input."""
    scores = score_heads(embeddings, bundle)
    heads = mst_decode(scores)
    relations = label_relations(embeddings, heads, bundle)
    deps = [DepPrediction(head=h, relation=r)
            for h, r in zip(heads, relations)]
    synthesis_input = SynthesisInput(
        tokens=tokens,
        deps=deps,
        morphs=predict_morph(embeddings, bundle),
        segs=predict_seg(embeddings, tokens, bundle, profile),
        lemmas=predict_lemmas(embeddings, tokens, bundle),
    )
    return synthesis_input, predict_ner(embeddings, bundle)


def parse_tokens(tokens: list[WholeToken], bundle: ModelBundle,
                 profile: LanguageProfile,
                 embeddings: EmbeddingDump | None = None) -> ParseResult:
    """Parse one sentence of whole tokens into a segmented UD analysis."""
    rows = embed(tokens, embeddings if embeddings is not None else bundle)
    synthesis_input, ner = run_heads(rows, tokens, bundle, profile)
    return ParseResult(sentence=convert_to_ud(synthesis_input, profile), ner=ner)


def parse_line(line: str, bundle: ModelBundle, profile: LanguageProfile,
               embeddings: EmbeddingDump | None = None) -> ParseResult:
    """Parse one whitespace-tokenized input line."""
    return parse_tokens(make_tokens(line.split()), bundle, profile, embeddings)


def parse_lines(lines: list[str], bundle: ModelBundle,
                profile: LanguageProfile,
                embeddings: EmbeddingDump | None = None,
                threads: int = 1, batch: int = 32) -> list[ParseResult | Exception]:
    """Parse many lines, preserving input order.

    Sentences are independent, so batches run on a thread pool; a failed
    sentence yields its exception in place of a result so callers can
    report it and continue.
    """
    def safe(line: str) -> ParseResult | Exception:
        try:
            return parse_line(line, bundle, profile, embeddings)
        except Exception as err:  # noqa: BLE001 - isolated per sentence
            return err

    if threads <= 1:
        return [safe(line) for line in lines]
    results: list[ParseResult | Exception] = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for start in range(0, len(lines), max(batch, 1)):
            chunk = lines[start:start + max(batch, 1)]
            results.extend(pool.map(safe, chunk))
    return results

"""Shared test tooling.

The central piece is :func:`oracle_bundle`: given a sentence and the exact
predictions every head should emit, it solves small least-squares problems
against the deterministic synthetic embeddings so that each classifier
reproduces its targets with a wide margin. That turns any hand-written
fixture into an end-to-end pipeline test.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from wtparse.bundle import NO_VALUE, ModelBundle, embed, synthetic_bundle
from wtparse.profile import LanguageProfile
from wtparse.synthesis import SynthesisInput

FIXTURES = Path(__file__).parent / "fixtures"

MARGIN = 8.0


def read_fixture(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def ladder_fixture_paths() -> list[Path]:
    return sorted((FIXTURES / "ladder").glob("*.conllu"))


def _signed_targets(rows: int, width: int, hot: list[list[int]]) -> np.ndarray:
    targets = np.full((rows, width), -MARGIN)
    for r, cols in enumerate(hot):
        for c in cols:
            targets[r, c] = MARGIN
    return targets


def _fit(inputs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    solution, *_ = np.linalg.lstsq(inputs, targets, rcond=None)
    residual = inputs @ solution - targets
    assert np.max(np.abs(residual)) < 1e-6, "oracle fit did not converge"
    return solution.astype(np.float32)


def oracle_bundle(inp: SynthesisInput, profile: LanguageProfile,
                  ner_tags: list[str] | None = None, seed: int = 1234,
                  d: int = 16) -> ModelBundle:
    """A bundle whose heads emit exactly the given predictions for ``inp``."""
    tokens = inp.tokens
    n = len(tokens)
    base = synthetic_bundle(seed, d, profile)
    assert n + 1 <= d, "oracle fitting needs d >= token count + 1"
    assert n + 1 <= base.d_head
    rows = embed(tokens, base).astype(np.float64)
    body = rows[1:]

    # head selection: make the desired head the per-row maximum by a margin
    desired_heads = [dep.head for dep in inp.deps]
    score_targets = _signed_targets(
        n + 1, n + 1, [[]] + [[h] for h in desired_heads])
    wk = _fit(rows, np.concatenate(
        [np.eye(n + 1), np.zeros((n + 1, base.d_head - n - 1))], axis=1))
    wq = _fit(rows, np.concatenate(
        [score_targets * np.sqrt(base.d_head),
         np.zeros((n + 1, base.d_head - n - 1))], axis=1))

    rel_index = {rel: i for i, rel in enumerate(base.relations)}
    pairs = np.concatenate([body, rows[desired_heads]], axis=1)
    w_label = _fit(pairs, _signed_targets(
        n, len(base.relations), [[rel_index[dep.relation]] for dep in inp.deps]))

    vocab = ["[BLANK]"] + sorted(
        {lemma.lemma for lemma in inp.lemmas if lemma.from_vocab})
    vocab_index = {word: i for i, word in enumerate(vocab)}
    lm_head = _fit(body, _signed_targets(
        n, len(vocab),
        [[vocab_index[lemma.lemma] if lemma.from_vocab else 0]
         for lemma in inp.lemmas]))

    pos_index = {p: i for i, p in enumerate(base.upos_labels)}
    w_pos = _fit(body, _signed_targets(
        n, len(base.upos_labels), [[pos_index[m.upos]] for m in inp.morphs]))

    proc_index = {p: i for i, p in enumerate(base.proclitic_labels)}
    w_proclitic = _fit(body, _signed_targets(
        n, len(base.proclitic_labels),
        [[proc_index[f] for f in m.proclitic_functions] for m in inp.morphs]))

    def slot_targets(slots, values_per_token):
        hot = []
        for values in values_per_token:
            cols, offset = [], 0
            for slot in slots:
                value = values.get(slot.name, NO_VALUE)
                if value not in slot.values:
                    value = slot.values[0]
                cols.append(offset + slot.values.index(value))
                offset += len(slot.values)
            hot.append(cols)
        width = sum(len(slot.values) for slot in slots)
        return _signed_targets(len(values_per_token), width, hot)

    w_feats = _fit(body, slot_targets(
        base.feature_slots, [m.features for m in inp.morphs]))

    sfx_index = {f: i for i, f in enumerate(base.suffix_function_labels)}
    w_suffix_function = _fit(body, _signed_targets(
        n, len(base.suffix_function_labels),
        [[sfx_index[m.suffix.function if m.suffix else NO_VALUE]]
         for m in inp.morphs]))
    w_suffix_feats = _fit(body, slot_targets(
        base.suffix_feature_slots,
        [m.suffix.features if m.suffix else {} for m in inp.morphs]))

    seg_weights = np.empty((len(base.seg_groups), d, 2), dtype=np.float32)
    for g, group in enumerate(base.seg_groups):
        hot = [[0] if group in seg.prefixes else [1] for seg in inp.segs]
        seg_weights[g] = _fit(body, _signed_targets(n, 2, hot))

    ner_tags = ner_tags or ["O"] * n
    ner_index = {t: i for i, t in enumerate(base.ner_labels)}
    w_ner = _fit(body, _signed_targets(
        n, len(base.ner_labels), [[ner_index[t]] for t in ner_tags]))

    bundle = ModelBundle(
        d=d, d_head=base.d_head, wq=wq, wk=wk,
        relations=base.relations, w_label=w_label,
        vocab=vocab, blank_id=0, lm_head=lm_head,
        upos_labels=base.upos_labels, w_pos=w_pos,
        proclitic_labels=base.proclitic_labels, w_proclitic=w_proclitic,
        feature_slots=base.feature_slots, w_feats=w_feats,
        suffix_function_labels=base.suffix_function_labels,
        w_suffix_function=w_suffix_function,
        suffix_feature_slots=base.suffix_feature_slots,
        w_suffix_feats=w_suffix_feats,
        seg_groups=base.seg_groups, w_seg=seg_weights,
        ner_labels=base.ner_labels, w_ner=w_ner,
        embed_seed=seed,
    )
    bundle.validate()
    return bundle

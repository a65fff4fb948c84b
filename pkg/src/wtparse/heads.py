"""The five independent expert classifiers.

Every head is a pure function of the embedding matrix and the bundle
weights; no head reads another head's output, so they may be evaluated in
any order or in parallel. Ties are always broken toward the lowest label or
column index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bundle import NO_VALUE, ModelBundle
from .conllu import WholeToken
from .profile import LanguageProfile, enumerate_valid_prefix_sets


@dataclass(frozen=True)
class DepPrediction:
    """Whole-token head index (0 = root) and relation label."""

    head: int
    relation: str


@dataclass(frozen=True)
class SuffixPrediction:
    """Predicted pronominal suffix: function tag plus feature values."""

    function: str
    features: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):  # frozen dataclass with a dict payload
        object.__setattr__(self, "features", dict(self.features))

    def __hash__(self):
        return hash((self.function, tuple(sorted(self.features.items()))))


@dataclass(frozen=True)
class MorphPrediction:
    """Whole-token morphology: POS, features, proclitics, optional suffix."""

    upos: str
    features: dict[str, str] = field(default_factory=dict)
    proclitic_functions: tuple[str, ...] = ()
    suffix: SuffixPrediction | None = None

    def __post_init__(self):
        object.__setattr__(self, "features", dict(self.features))
        object.__setattr__(self, "proclitic_functions",
                           tuple(self.proclitic_functions))


@dataclass(frozen=True)
class SegPrediction:
    """Letter-groups stripped off the front of the token surface."""

    prefixes: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "prefixes", tuple(self.prefixes))


@dataclass(frozen=True)
class LemmaPrediction:
    lemma: str
    from_vocab: bool = True


@dataclass(frozen=True)
class NerPrediction:
    """Per-token BIO tags plus the decoded entity spans."""

    tags: tuple[str, ...]
    spans: tuple[tuple[int, int, str], ...]


def _check_embeddings(embeddings: np.ndarray, bundle: ModelBundle) -> int:
    if embeddings.ndim != 2 or embeddings.shape[1] != bundle.d:
        raise ValueError(
            f"embedding matrix must be (n+1, {bundle.d}), got {embeddings.shape}")
    if embeddings.shape[0] < 2:
        raise ValueError("embedding matrix must contain a root row and a token row")
    return embeddings.shape[0] - 1


def score_heads(embeddings: np.ndarray, bundle: ModelBundle) -> np.ndarray:
    """Scaled dot-product head-selection scores.

    Returns an (n+1, n+1) float64 matrix where entry (i, j) scores token j
    as the head of token i (column 0 is the root). The diagonal and the
    unused row 0 are -inf.
    """
    _check_embeddings(embeddings, bundle)
    if not np.isfinite(embeddings).all():
        raise ValueError("embedding matrix contains non-finite entries")
    queries = embeddings @ bundle.wq
    keys = embeddings @ bundle.wk
    scores = (queries @ keys.T).astype(np.float64) / np.sqrt(bundle.d_head)
    np.fill_diagonal(scores, -np.inf)
    scores[0, :] = -np.inf
    return scores


def label_relations(embeddings: np.ndarray, heads: list[int],
                    bundle: ModelBundle) -> list[str]:
    """Relation label per token for the chosen head assignment."""
    n = _check_embeddings(embeddings, bundle)
    if len(heads) != n:
        raise ValueError(f"expected {n} head indices, got {len(heads)}")
    for dep, head in enumerate(heads, start=1):
        if not 0 <= head <= n or head == dep:
            raise ValueError(f"token {dep}: invalid head index {head}")
    pairs = np.concatenate([embeddings[1:], embeddings[list(heads)]], axis=1)
    logits = pairs @ bundle.w_label
    return [bundle.relations[i] for i in np.argmax(logits, axis=1)]


def predict_lemmas(embeddings: np.ndarray, tokens: list[WholeToken],
                   bundle: ModelBundle) -> list[LemmaPrediction]:
    """LM-head lemma per token; the BLANK sentinel falls back to the surface."""
    _check_embeddings(embeddings, bundle)
    if not bundle.vocab:
        raise ValueError("bundle has an empty lemma vocabulary")
    logits = embeddings[1:] @ bundle.lm_head
    out: list[LemmaPrediction] = []
    for token, best in zip(tokens, np.argmax(logits, axis=1)):
        if best == bundle.blank_id:
            out.append(LemmaPrediction(lemma=token.surface, from_vocab=False))
        else:
            out.append(LemmaPrediction(lemma=bundle.vocab[best], from_vocab=True))
    return out


def _slot_argmax_rows(logits: np.ndarray, slots) -> list[dict[str, str]]:
    """Per-slot argmax for every row at once; NO_VALUE slots are omitted."""
    values: list[dict[str, str]] = [{} for _ in range(logits.shape[0])]
    offset = 0
    for slot in slots:
        picks = np.argmax(logits[:, offset:offset + len(slot.values)], axis=1)
        for i, pick in enumerate(picks):
            value = slot.values[pick]
            if value != NO_VALUE:
                values[i][slot.name] = value
        offset += len(slot.values)
    return values


def predict_morph(embeddings: np.ndarray,
                  bundle: ModelBundle) -> list[MorphPrediction]:
    """Five-classifier morphology prediction per whole token.

    The suffix-feature classifier is only consulted when the
    suffix-function classifier predicts an actual suffix; proclitic
    functions are multi-label with a 0.5 probability threshold (logit > 0).
    """
    _check_embeddings(embeddings, bundle)
    rows = embeddings[1:]
    pos_ids = np.argmax(rows @ bundle.w_pos, axis=1)
    proclitic_hits = (rows @ bundle.w_proclitic) > 0.0
    features = _slot_argmax_rows(rows @ bundle.w_feats, bundle.feature_slots)
    suffix_ids = np.argmax(rows @ bundle.w_suffix_function, axis=1)
    suffix_features = _slot_argmax_rows(rows @ bundle.w_suffix_feats,
                                        bundle.suffix_feature_slots)

    out: list[MorphPrediction] = []
    for i in range(rows.shape[0]):
        proclitics = tuple(
            label for j, label in enumerate(bundle.proclitic_labels)
            if proclitic_hits[i, j])
        suffix = None
        function = bundle.suffix_function_labels[int(suffix_ids[i])]
        if function != NO_VALUE:
            suffix = SuffixPrediction(function=function,
                                      features=suffix_features[i])
        out.append(MorphPrediction(
            upos=bundle.upos_labels[int(pos_ids[i])],
            features=features[i],
            proclitic_functions=proclitics,
            suffix=suffix,
        ))
    return out


def seg_sequence_score(sequence: list[str], logits: np.ndarray,
                       groups: list[str]) -> float:
    """Joint score of a prefix sequence: included groups contribute their
    "present" logit, all others their "absent" logit."""
    included = set(sequence)
    total = 0.0
    for g, group in enumerate(groups):
        total += logits[g, 0] if group in included else logits[g, 1]
    return float(total)


def predict_seg(embeddings: np.ndarray, tokens: list[WholeToken],
                bundle: ModelBundle,
                profile: LanguageProfile) -> list[SegPrediction]:
    """Constrained prefix segmentation per token.

    Scores every admissible letter-group sequence for the surface and keeps
    the best, so the output always concatenates to a strict prefix of the
    token.
    """
    _check_embeddings(embeddings, bundle)
    if list(bundle.seg_groups) != list(profile.letter_groups):
        raise ValueError(
            "bundle segmentation groups do not match the profile letter groups")
    group_count = len(bundle.seg_groups)
    group_index = {group: g for g, group in enumerate(bundle.seg_groups)}
    # one matmul for all tokens and groups: (n, G, 2) include/exclude logits
    flat = bundle.w_seg.transpose(1, 0, 2).reshape(bundle.d, 2 * group_count)
    logits = (embeddings[1:] @ flat).astype(np.float64)
    logits = logits.reshape(-1, group_count, 2)
    out: list[SegPrediction] = []
    for token in tokens:
        token_logits = logits[token.index - 1]
        base = float(token_logits[:, 1].sum())
        gain = token_logits[:, 0] - token_logits[:, 1]
        best, best_score = (), -np.inf
        for candidate in enumerate_valid_prefix_sets(token.surface, profile):
            score = base + sum(float(gain[group_index[g]]) for g in candidate)
            if score > best_score:
                best, best_score = candidate, score
        out.append(SegPrediction(prefixes=tuple(best)))
    return out


def predict_ner(embeddings: np.ndarray, bundle: ModelBundle) -> NerPrediction:
    """Per-token BIO labels plus decoded spans."""
    _check_embeddings(embeddings, bundle)
    logits = embeddings[1:] @ bundle.w_ner
    tags = tuple(bundle.ner_labels[i] for i in np.argmax(logits, axis=1))
    return NerPrediction(tags=tags, spans=tuple(decode_bio(list(tags))))


def decode_bio(tags: list[str]) -> list[tuple[int, int, str]]:
    """Decode BIO tags into (start, end, class) spans, 1-based inclusive.

    An I tag without a preceding same-class B or I opens a new span (the
    conventional orphan-I repair).
    """
    spans: list[tuple[int, int, str]] = []
    start = 0
    cls = None

    def close(end: int):
        nonlocal cls
        if cls is not None:
            spans.append((start, end, cls))
            cls = None

    for position, tag in enumerate(tags, start=1):
        if tag == "O":
            close(position - 1)
            continue
        kind, _, tag_cls = tag.partition("-")
        if kind not in ("B", "I") or not tag_cls:
            raise ValueError(f"bad BIO tag {tag!r}")
        if kind == "B" or tag_cls != cls:
            close(position - 1)
            start, cls = position, tag_cls
    close(len(tags))
    return spans

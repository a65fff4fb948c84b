"""Evaluation: aligned multi-set metrics and whole-token metrics.

Segment-level scores align predicted and gold segments under the gold
whole tokens (never merging across token boundaries) and count multiset
overlap of aspect-specific items per aligned group. Whole-token scores
compare one arc and one POS per whole token, so they reduce to plain
accuracy. Conventions for the corner cases (empty inputs, punctuation
filtering, the primary-segment rule) are spelled out in
docs/scoring-notes.md.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, fields

from .conllu import UdNode, UdSentence, WholeToken
from .errors import EngineError

MULTISET_ASPECTS = ("seg", "pos", "feats", "uas", "las")


class AlignmentError(EngineError):
    """Predicted segments cannot be aligned under the gold whole tokens."""


@dataclass
class ScoreReport:
    """All corpus metrics, as percentages in [0, 100]."""

    seg_f1: float
    pos_f1: float
    feats_f1: float
    uas_f1: float
    las_f1: float
    uas_nopunc: float
    las_nopunc: float
    wt_pos_macro_f1: float
    wt_pos_acc: float
    wt_uas: float
    wt_las: float
    ner_f1: float | None = None

    def as_dict(self) -> dict[str, float | None]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def group_to_whole_tokens(sentence: UdSentence,
                          gold_tokens: list[WholeToken]) -> list[list[UdNode]]:
    """Assign every segment to exactly one gold whole token.

    Multiword spans must match one gold token exactly; bare nodes are
    consumed character by character against the current gold surface.
    Raises AlignmentError when a segment would straddle token boundaries
    or the surfaces disagree.
    """
    groups: list[list[UdNode]] = [[] for _ in gold_tokens]
    position = 0
    offset = 0
    i = 0
    while i < len(sentence.nodes):
        if position >= len(gold_tokens):
            raise AlignmentError("more segments than the gold tokens cover")
        token = gold_tokens[position]
        node = sentence.nodes[i]
        span = sentence.span_for(node.id)
        if span is not None:
            if offset != 0:
                raise AlignmentError(
                    f"span {span.start}-{span.end} starts inside token "
                    f"{token.surface!r}")
            if span.surface != token.surface:
                raise AlignmentError(
                    f"span surface {span.surface!r} != token {token.surface!r}")
            size = span.end - span.start + 1
            groups[position].extend(sentence.nodes[i:i + size])
            i += size
            position += 1
            continue
        if not token.surface.startswith(node.form, offset):
            raise AlignmentError(
                f"segment {node.form!r} does not continue token "
                f"{token.surface!r} at offset {offset}")
        groups[position].append(node)
        offset += len(node.form)
        i += 1
        if offset > len(token.surface):
            raise AlignmentError(
                f"segment {node.form!r} spans beyond token {token.surface!r}")
        if offset == len(token.surface):
            position += 1
            offset = 0
    if position != len(gold_tokens) or offset != 0:
        raise AlignmentError("segments do not cover all gold tokens")
    return groups


def primary_node(group: list[UdNode]) -> UdNode:
    """The group's main lexical segment.

    Defined as the last node whose head lies outside the group (the node
    carrying the token's external arc); falls back to the last node.
    """
    ids = {node.id for node in group}
    externals = [node for node in group if node.head not in ids]
    return externals[-1] if externals else group[-1]


def _group_index(groups: list[list[UdNode]]) -> dict[int, int]:
    """node id -> 1-based group number (0 is reserved for the root)."""
    index: dict[int, int] = {}
    for g, nodes in enumerate(groups, start=1):
        for node in nodes:
            index[node.id] = g
    return index


def _render_feats(node: UdNode) -> str:
    if not node.feats:
        return "_"
    return "|".join(f"{k}={node.feats[k]}" for k in sorted(node.feats))


@dataclass
class PRCounts:
    """Multiset precision/recall counts, addable across groups and sentences."""

    matched: int = 0
    predicted: int = 0
    gold: int = 0

    def add(self, other: "PRCounts") -> None:
        self.matched += other.matched
        self.predicted += other.predicted
        self.gold += other.gold

    def precision(self) -> float:
        if self.predicted == 0:
            return 100.0 if self.gold == 0 else 0.0
        return 100.0 * self.matched / self.predicted

    def recall(self) -> float:
        if self.gold == 0:
            return 100.0 if self.predicted == 0 else 0.0
        return 100.0 * self.matched / self.gold

    def f1(self) -> float:
        p, r = self.precision(), self.recall()
        if p + r == 0.0:
            return 0.0
        return 2.0 * p * r / (p + r)


def _aspect_items(aspect: str, nodes: list[UdNode], group_of: dict[int, int],
                  punct_groups: set[int], ignore_punct: bool,
                  own_group: int) -> Counter:
    items: Counter = Counter()
    for node in nodes:
        if aspect == "seg":
            items[node.form] += 1
        elif aspect == "pos":
            items[(node.form, node.upos)] += 1
        elif aspect == "feats":
            items[(node.form, _render_feats(node))] += 1
        else:
            head_group = 0 if node.head == 0 else group_of[node.head]
            if ignore_punct and (own_group in punct_groups
                                 or head_group in punct_groups):
                continue
            if aspect == "uas":
                items[head_group] += 1
            else:
                items[(head_group, node.deprel)] += 1
    return items


def _check_same_tokens(pred: UdSentence, gold: UdSentence) -> list[WholeToken]:
    gold_tokens = gold.whole_tokens()
    pred_tokens = pred.whole_tokens()
    if [t.surface for t in pred_tokens] != [t.surface for t in gold_tokens]:
        raise AlignmentError(
            "prediction and gold do not describe the same whole tokens")
    return gold_tokens


def multiset_counts(pred: UdSentence, gold: UdSentence, aspect: str,
                    ignore_punct: bool = False) -> PRCounts:
    """Aggregate multiset-intersection counts for one sentence pair."""
    if aspect not in MULTISET_ASPECTS:
        raise ValueError(f"unknown aspect {aspect!r}")
    gold_tokens = _check_same_tokens(pred, gold)
    pred_groups = group_to_whole_tokens(pred, gold_tokens)
    gold_groups = group_to_whole_tokens(gold, gold_tokens)
    pred_index = _group_index(pred_groups)
    gold_index = _group_index(gold_groups)
    punct_groups = {
        g for g, nodes in enumerate(gold_groups, start=1)
        if nodes and all(node.upos == "PUNCT" for node in nodes)
    }
    counts = PRCounts()
    for g, (pred_nodes, gold_nodes) in enumerate(
            zip(pred_groups, gold_groups), start=1):
        pred_items = _aspect_items(aspect, pred_nodes, pred_index,
                                   punct_groups, ignore_punct, g)
        gold_items = _aspect_items(aspect, gold_nodes, gold_index,
                                   punct_groups, ignore_punct, g)
        counts.add(PRCounts(
            matched=sum((pred_items & gold_items).values()),
            predicted=sum(pred_items.values()),
            gold=sum(gold_items.values()),
        ))
    return counts


def multiset_f1(pred: UdSentence, gold: UdSentence, aspect: str,
                ignore_punct: bool = False) -> tuple[float, float, float]:
    """Aligned multi-set (precision, recall, F1) for one sentence pair."""
    counts = multiset_counts(pred, gold, aspect, ignore_punct)
    return counts.precision(), counts.recall(), counts.f1()


@dataclass
class WholeTokenCounts:
    """Whole-token POS/attachment tallies, addable across sentences."""

    tokens: int = 0
    pos_correct: int = 0
    uas_correct: int = 0
    las_correct: int = 0
    pos_pairs: list[tuple[str, str]] | None = None  # (pred, gold) per token

    def __post_init__(self):
        if self.pos_pairs is None:
            self.pos_pairs = []

    def add(self, other: "WholeTokenCounts") -> None:
        self.tokens += other.tokens
        self.pos_correct += other.pos_correct
        self.uas_correct += other.uas_correct
        self.las_correct += other.las_correct
        self.pos_pairs.extend(other.pos_pairs)

    def pos_acc(self) -> float:
        return 100.0 * self.pos_correct / self.tokens if self.tokens else 100.0

    def uas(self) -> float:
        return 100.0 * self.uas_correct / self.tokens if self.tokens else 100.0

    def las(self) -> float:
        return 100.0 * self.las_correct / self.tokens if self.tokens else 100.0

    def pos_macro_f1(self) -> float:
        """Macro-F1 over the POS classes present in gold."""
        classes = sorted({gold for _, gold in self.pos_pairs})
        if not classes:
            return 100.0
        scores = []
        for cls in classes:
            tp = sum(1 for p, g in self.pos_pairs if p == cls and g == cls)
            fp = sum(1 for p, g in self.pos_pairs if p == cls and g != cls)
            fn = sum(1 for p, g in self.pos_pairs if p != cls and g == cls)
            denom = 2 * tp + fp + fn
            scores.append(100.0 * 2 * tp / denom if denom else 0.0)
        return sum(scores) / len(scores)


def whole_token_counts(pred: UdSentence, gold: UdSentence) -> WholeTokenCounts:
    """Whole-token tallies for one sentence pair.

    The POS comparison uses the primary segment of each group. An arc is
    correct when any predicted segment of the token points into the gold
    head token's group (with the gold primary relation, for LAS).
    """
    gold_tokens = _check_same_tokens(pred, gold)
    pred_groups = group_to_whole_tokens(pred, gold_tokens)
    gold_groups = group_to_whole_tokens(gold, gold_tokens)
    pred_index = _group_index(pred_groups)
    gold_index = _group_index(gold_groups)
    counts = WholeTokenCounts()
    for pred_nodes, gold_nodes in zip(pred_groups, gold_groups):
        counts.tokens += 1
        pred_primary = primary_node(pred_nodes)
        gold_primary = primary_node(gold_nodes)
        counts.pos_pairs.append((pred_primary.upos, gold_primary.upos))
        if pred_primary.upos == gold_primary.upos:
            counts.pos_correct += 1
        gold_head_group = (0 if gold_primary.head == 0
                           else gold_index[gold_primary.head])
        gold_rel = gold_primary.deprel
        uas_hit = las_hit = False
        for node in pred_nodes:
            head_group = 0 if node.head == 0 else pred_index[node.head]
            if head_group == gold_head_group:
                uas_hit = True
                if node.deprel == gold_rel:
                    las_hit = True
        counts.uas_correct += uas_hit
        counts.las_correct += las_hit
    return counts


def whole_token_view(inp) -> UdSentence:
    """One node per whole token, straight from the expert predictions.

    Lets whole-token metrics score raw predictions without synthesizing a
    segmented sentence first (accepts a SynthesisInput-shaped object).
    """
    nodes = [
        UdNode(id=token.index, form=token.surface, lemma=lemma.lemma,
               upos=morph.upos, feats=dict(morph.features), head=dep.head,
               deprel=dep.relation)
        for token, dep, morph, lemma in zip(inp.tokens, inp.deps, inp.morphs,
                                            inp.lemmas)
    ]
    return UdSentence(nodes=nodes)


def whole_token_scores(pred, gold: UdSentence) -> tuple[float, float, float, float]:
    """(pos_macro_f1, pos_acc, uas, las) for one sentence pair.

    ``pred`` is a segmented UdSentence or raw whole-token predictions
    (anything with tokens/deps/morphs/lemmas lists).
    """
    if not isinstance(pred, UdSentence):
        pred = whole_token_view(pred)
    counts = whole_token_counts(pred, gold)
    return (counts.pos_macro_f1(), counts.pos_acc(), counts.uas(), counts.las())


@dataclass
class NerCounts:
    matched: int = 0
    predicted: int = 0
    gold: int = 0

    def add(self, other: "NerCounts") -> None:
        self.matched += other.matched
        self.predicted += other.predicted
        self.gold += other.gold

    def f1(self) -> float:
        if self.predicted == 0 and self.gold == 0:
            return 100.0
        p = self.matched / self.predicted if self.predicted else 0.0
        r = self.matched / self.gold if self.gold else 0.0
        if p + r == 0.0:
            return 0.0
        return 100.0 * 2 * p * r / (p + r)


def ner_counts(pred_tags: list[str], gold_tags: list[str]) -> NerCounts:
    if len(pred_tags) != len(gold_tags):
        raise ValueError(
            f"tag sequences differ in length: {len(pred_tags)} vs {len(gold_tags)}")
    counts = NerCounts()
    for p, g in zip(pred_tags, gold_tags):
        counts.predicted += p != "O"
        counts.gold += g != "O"
        counts.matched += p != "O" and p == g
    return counts


def ner_token_f1(pred_tags: list[str], gold_tags: list[str]) -> float:
    """Micro-F1 over non-O token labels (100.0 when both sides are all O)."""
    return ner_counts(pred_tags, gold_tags).f1()


def score_corpus(pairs: list[tuple[UdSentence, UdSentence]],
                 ner_pairs: list[tuple[list[str], list[str]]] | None = None
                 ) -> ScoreReport:
    """Aggregate a (pred, gold) corpus into a full report."""
    multiset = {aspect: PRCounts() for aspect in MULTISET_ASPECTS}
    nopunc = {aspect: PRCounts() for aspect in ("uas", "las")}
    wt = WholeTokenCounts()
    for pred, gold in pairs:
        for aspect in MULTISET_ASPECTS:
            multiset[aspect].add(multiset_counts(pred, gold, aspect))
        for aspect in nopunc:
            nopunc[aspect].add(multiset_counts(pred, gold, aspect,
                                               ignore_punct=True))
        wt.add(whole_token_counts(pred, gold))
    ner = None
    if ner_pairs is not None:
        total = NerCounts()
        for pred_tags, gold_tags in ner_pairs:
            total.add(ner_counts(pred_tags, gold_tags))
        ner = total.f1()
    return ScoreReport(
        seg_f1=multiset["seg"].f1(),
        pos_f1=multiset["pos"].f1(),
        feats_f1=multiset["feats"].f1(),
        uas_f1=multiset["uas"].f1(),
        las_f1=multiset["las"].f1(),
        uas_nopunc=nopunc["uas"].f1(),
        las_nopunc=nopunc["las"].f1(),
        wt_pos_macro_f1=wt.pos_macro_f1(),
        wt_pos_acc=wt.pos_acc(),
        wt_uas=wt.uas(),
        wt_las=wt.las(),
        ner_f1=ner,
    )


def format_report(report: ScoreReport) -> str:
    """Human-readable report: one aligned `name  value` line per metric."""
    lines = ["metric            value", "-" * 24]
    for name, value in report.as_dict().items():
        rendered = "-" if value is None else f"{value:6.2f}"
        lines.append(f"{name:<17} {rendered}")
    return "\n".join(lines)

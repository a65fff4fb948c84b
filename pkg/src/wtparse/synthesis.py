"""Merging whole-token expert predictions into a segmented UD sentence.

The conversion runs per token in three phases: attach the whole-token
labels (dependency, lemma, morphology), split off predicted prefixes (plus
an implicit determiner when the article was absorbed by a preceding
preposition), and split off the predicted pronominal suffix (inserting a
possessive-marker node for genitive readings). Head references are emitted
symbolically (whole-token main/suffix/root) and resolved to final node ids
in a single reindexing pass at the end, so rules never have to know how
many nodes earlier tokens produced.

The converter is total: every input whose segmentations fit their surfaces
yields a valid tree. Disagreements between the segmenter and the
morphology head are resolved, not raised: a segmented prefix always
becomes a node, taking its default function when the morphology head
predicted none. NER output never participates; entity spans live alongside
the tree, not inside it.

``decompose_ud`` is the inverse: it derives whole-token predictions from a
segmented sentence (for building training-style inputs from gold data and
for end-to-end identity checks).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .conllu import Span, UdNode, UdSentence, WholeToken
from .errors import EngineError
from .heads import (DepPrediction, LemmaPrediction, MorphPrediction,
                    SegPrediction, SuffixPrediction)
from .profile import LanguageProfile

#: POS tags whose prefixes keep local attachment in the default (case) rule.
CONTENT_POS = frozenset(["ADJ", "NOUN", "PROPN", "PRON", "VERB"])
#: Host POS tags for which a pronominal suffix takes over the token's arc.
SWAP_HOST_POS = frozenset(["ADP", "NUM", "DET"])
SUFFIX_UPOS = "PRON"
MARKER_UPOS = "ADP"
MARKER_DEPREL = "case"

# symbolic head references, resolved by the final reindexing pass
ROOT_REF = ("root", 0)


def _main_ref(index: int) -> tuple[str, int]:
    return ("main", index)


def _suffix_ref(index: int) -> tuple[str, int]:
    return ("suffix", index)


def _dep_head_ref(dep: DepPrediction) -> tuple[str, int]:
    return ROOT_REF if dep.head == 0 else _main_ref(dep.head)


class SynthesisError(EngineError):
    """Synthesis cannot complete (e.g. suffix features missing a table row)."""


@dataclass
class SynthesisInput:
    """The five experts' whole-token predictions for one sentence."""

    tokens: list[WholeToken]
    deps: list[DepPrediction]
    morphs: list[MorphPrediction]
    segs: list[SegPrediction]
    lemmas: list[LemmaPrediction]

    def __post_init__(self):
        n = len(self.tokens)
        for name in ("deps", "morphs", "segs", "lemmas"):
            if len(getattr(self, name)) != n:
                raise ValueError(
                    f"{name} has {len(getattr(self, name))} entries for {n} tokens")


@dataclass(slots=True)
class _ProtoNode:
    form: str
    lemma: str
    upos: str
    feats: dict[str, str]
    head: tuple[str, int]
    deprel: str


def choose_prefix_function(prefix: str, functions: list[str],
                           profile: LanguageProfile) -> str:
    """Pick the prefix's POS from the profile table and the predicted set.

    Table order wins: the first admissible function for this letter-group
    that is present in ``functions`` is chosen and removed from it (so a
    later prefix cannot reuse the same prediction); with no match the
    table's first entry is the default.
    """
    table = profile.prefix_functions[prefix]
    for candidate in table:
        if candidate in functions:
            functions.remove(candidate)
            return candidate
    return table[0]


def attach_prefix(prefix: str, pos: str, morph: MorphPrediction,
                  dep: DepPrediction, index: int,
                  profile: LanguageProfile) -> tuple[tuple[str, int], str]:
    """Head reference and relation for one prefix node.

    The rule ladder: a relativizer-final prefix is ``mark`` on the token
    (or on the token's own head when the token is not a verb); the
    conjunction letter is ``cc`` on the token (escalating to the token's
    head unless the token's relation keeps coordination local); everything
    else is ``case`` on the token, escalating only for function-POS tokens
    whose relation is in the escalation list, and turning into ``det``
    when the article letter was chosen as a determiner.

    Escalation never targets the artificial root: when the token is itself
    the sentence root, the prefix stays attached to it, keeping the output
    single-rooted.
    """
    head = _main_ref(index)

    def escalate() -> tuple[str, int]:
        return head if dep.head == 0 else _dep_head_ref(dep)

    if prefix.endswith(profile.relativizer_suffix):
        deprel = "mark"
        if morph.upos != "VERB":
            head = escalate()
    elif prefix == profile.conj_letter:
        deprel = "cc"
        if dep.relation not in profile.note1_deprels:
            head = escalate()
    else:
        deprel = "case"
        if morph.upos not in CONTENT_POS and dep.relation in profile.note2_deprels:
            head = escalate()
        if prefix == profile.implicit_det_letter and pos == "DET":
            deprel = "det"
    return head, deprel


def insert_implicit_det(index: int, prefixes: tuple[str, ...],
                        remaining_functions: list[str],
                        profile: LanguageProfile) -> _ProtoNode | None:
    """Determiner node for an article absorbed by a preceding preposition.

    Emitted when DET was predicted among the proclitic functions but the
    article letter-group is not among the segmented prefixes; the node
    carries the profile's article surface but contributes no characters to
    the whole-token surface.
    """
    if profile.implicit_det_letter in prefixes:
        return None
    if "DET" not in remaining_functions:
        return None
    article = profile.implicit_det_letter
    return _ProtoNode(form=article, lemma=article, upos="DET", feats={},
                      head=_main_ref(index), deprel="det")


@dataclass
class SuffixExpansion:
    """What splitting a suffix does: rewrites to the main node plus nodes."""

    main_form: str
    main_arc: tuple[tuple[str, int], str] | None  # replaces the token's arc
    nodes: list[_ProtoNode] = field(default_factory=list)


def expand_suffix(index: int, morph: MorphPrediction, dep: DepPrediction,
                  lemma: str, profile: LanguageProfile) -> SuffixExpansion:
    """Split the predicted pronominal suffix off token ``index``.

    The main node's form is rewritten to its lemma (the written form
    includes the suffix letters). Suffix surface and lemma come from the
    profile's suffix dictionary. Attachment depends on the host POS:
    adposition-like hosts hand their whole arc to the suffix and re-attach
    to it with ``case``; verbs take the suffix as ``obj``; anything else
    takes it as ``nmod:poss`` with a possessive-marker node in between.
    """
    suffix = morph.suffix
    if suffix is None:
        raise ValueError("expand_suffix called without a predicted suffix")
    key = (suffix.function,
           suffix.features.get("Gender", "_"),
           suffix.features.get("Number", "_"),
           suffix.features.get("Person", "_"))
    try:
        surface, suffix_lemma = profile.suffix_table[key]
    except KeyError:
        raise SynthesisError(
            f"profile {profile.name!r} has no suffix entry for "
            f"(function={key[0]}, gender={key[1]}, number={key[2]}, "
            f"person={key[3]})") from None

    expansion = SuffixExpansion(main_form=lemma, main_arc=None)
    if morph.upos in SWAP_HOST_POS:
        suffix_arc = (_dep_head_ref(dep), dep.relation)
        expansion.main_arc = (_suffix_ref(index), "case")
    elif morph.upos == "VERB":
        suffix_arc = (_main_ref(index), "obj")
    else:
        suffix_arc = (_main_ref(index), "nmod:poss")
        marker_surface, marker_lemma = profile.possessive_marker
        expansion.nodes.append(_ProtoNode(
            form=marker_surface, lemma=marker_lemma, upos=MARKER_UPOS,
            feats={}, head=_suffix_ref(index), deprel=MARKER_DEPREL))
    expansion.nodes.append(_ProtoNode(
        form=surface, lemma=suffix_lemma, upos=SUFFIX_UPOS,
        feats=dict(suffix.features), head=suffix_arc[0], deprel=suffix_arc[1]))
    return expansion


def convert_to_ud(inp: SynthesisInput, profile: LanguageProfile) -> UdSentence:
    """Run all three phases and reindex symbolic references to node ids."""
    protos: list[_ProtoNode] = []
    group_bounds: list[tuple[int, int]] = []  # proto index range per token
    main_pos: dict[int, int] = {}
    suffix_pos: dict[int, int] = {}

    for token, dep, morph, seg, lemma in zip(
            inp.tokens, inp.deps, inp.morphs, inp.segs, inp.lemmas):
        i = token.index
        start = len(protos)
        remainder = token.surface
        working = list(morph.proclitic_functions)

        for prefix in seg.prefixes:
            if not remainder.startswith(prefix) or len(prefix) >= len(remainder):
                raise SynthesisError(
                    f"token {i}: prefixes {seg.prefixes} do not fit "
                    f"surface {token.surface!r}")
            pos = choose_prefix_function(prefix, working, profile)
            head, deprel = attach_prefix(prefix, pos, morph, dep, i, profile)
            protos.append(_ProtoNode(form=prefix, lemma=prefix, upos=pos,
                                     feats={}, head=head, deprel=deprel))
            remainder = remainder[len(prefix):]

        implicit = insert_implicit_det(i, seg.prefixes, working, profile)
        if implicit is not None:
            protos.append(implicit)

        main_pos[i] = len(protos)
        protos.append(_ProtoNode(
            form=remainder, lemma=lemma.lemma, upos=morph.upos,
            feats=dict(morph.features), head=_dep_head_ref(dep),
            deprel=dep.relation))

        if morph.suffix is not None:
            expansion = expand_suffix(i, morph, dep, lemma.lemma, profile)
            main = protos[main_pos[i]]
            main.form = expansion.main_form
            if expansion.main_arc is not None:
                main.head, main.deprel = expansion.main_arc
            protos.extend(expansion.nodes)
            suffix_pos[i] = len(protos) - 1

        group_bounds.append((start, len(protos)))

    # reindex: proto positions become 1-based node ids
    def resolve(ref: tuple[str, int]) -> int:
        kind, index = ref
        if kind == "root":
            return 0
        position = main_pos[index] if kind == "main" else suffix_pos[index]
        return position + 1

    nodes = [
        UdNode(id=pos + 1, form=p.form, lemma=p.lemma, upos=p.upos,
               feats=p.feats, head=resolve(p.head), deprel=p.deprel)
        for pos, p in enumerate(protos)
    ]
    spans = [
        Span(start + 1, end, inp.tokens[t].surface)
        for t, (start, end) in enumerate(group_bounds) if end - start > 1
    ]
    text = " ".join(t.surface for t in inp.tokens)
    return UdSentence(nodes=nodes, spans=spans, comments=[f"# text = {text}"])


# ---------------------------------------------------------------------------
# inverse direction: gold sentence -> whole-token predictions
# ---------------------------------------------------------------------------

class DecomposeError(EngineError):
    """The sentence does not fit the prefix/main/suffix group shape."""


def decompose_ud(sentence: UdSentence, profile: LanguageProfile) -> SynthesisInput:
    """Derive whole-token expert predictions from a segmented sentence.

    Each multiword group is read back as prefixes + optional implicit
    determiner + main word + optional possessive marker + optional suffix.
    Among the readings consistent with the group's surface, the one with
    the most prefixes wins. Only sentences in the image of
    :func:`convert_to_ud` (modulo label content) are guaranteed to
    decompose; anything else raises :class:`DecomposeError`.
    """
    tokens = sentence.whole_tokens()
    groups = _node_groups(sentence)
    node_to_group: dict[int, int] = {}
    for g, nodes in enumerate(groups):
        for node in nodes:
            node_to_group[node.id] = g + 1

    deps: list[DepPrediction] = []
    morphs: list[MorphPrediction] = []
    segs: list[SegPrediction] = []
    lemmas: list[LemmaPrediction] = []
    for token, nodes in zip(tokens, groups):
        reading = _read_group(token.surface, nodes, profile)
        main = reading["main"]
        suffix_node = reading["suffix"]

        arc_node = suffix_node if reading["swapped"] else main
        head_group = 0 if arc_node.head == 0 else node_to_group[arc_node.head]
        deps.append(DepPrediction(head=head_group, relation=arc_node.deprel))

        suffix = None
        if suffix_node is not None:
            suffix = SuffixPrediction(
                function=_suffix_function(suffix_node, profile),
                features=dict(suffix_node.feats))
        functions = [p.upos for p in reading["prefixes"]]
        if reading["implicit_det"]:
            functions.append("DET")
        morphs.append(MorphPrediction(
            upos=main.upos, features=dict(main.feats),
            proclitic_functions=tuple(functions), suffix=suffix))
        segs.append(SegPrediction(
            prefixes=tuple(p.form for p in reading["prefixes"])))
        lemmas.append(LemmaPrediction(lemma=main.lemma, from_vocab=True))
    return SynthesisInput(tokens=tokens, deps=deps, morphs=morphs,
                          segs=segs, lemmas=lemmas)


def _node_groups(sentence: UdSentence) -> list[list[UdNode]]:
    groups: list[list[UdNode]] = []
    i = 0
    while i < len(sentence.nodes):
        node = sentence.nodes[i]
        span = sentence.span_for(node.id)
        if span is None:
            groups.append([node])
            i += 1
        else:
            size = span.end - span.start + 1
            groups.append(sentence.nodes[i:i + size])
            i += size
    return groups


def _suffix_function(node: UdNode, profile: LanguageProfile) -> str:
    key_tail = (node.feats.get("Gender", "_"), node.feats.get("Number", "_"),
                node.feats.get("Person", "_"))
    for (function, gender, number, person), (surface, lemma) in \
            profile.suffix_table.items():
        if ((gender, number, person) == key_tail
                and (surface, lemma) == (node.form, node.lemma)):
            return function
    raise DecomposeError(
        f"no suffix-table row reproduces node {node.id} "
        f"({node.form!r}, {node.lemma!r}, {key_tail})")


def _read_group(surface: str, nodes: list[UdNode],
                profile: LanguageProfile) -> dict:
    """Find the first consistent reading of a group.

    Leading nodes are consumed as real prefixes (they must continue the
    surface) or as an implicit determiner (article form, no surface
    characters); at each node a real-prefix reading is preferred, then an
    implicit one, then treating it as the main word. The tail after the
    main word must be empty, a suffix, or a possessive marker + suffix.
    """
    def walk(position: int, offset: int, prefixes: list[UdNode],
             implicit: bool) -> dict | None:
        if position < len(nodes) - 1:
            node = nodes[position]
            if (node.form in profile.letter_groups
                    and surface.startswith(node.form, offset)):
                reading = walk(position + 1, offset + len(node.form),
                               prefixes + [node], implicit)
                if reading is not None:
                    return reading
            if (node.form == profile.implicit_det_letter
                    and node.upos == "DET" and node.deprel == "det"):
                reading = walk(position + 1, offset, prefixes, True)
                if reading is not None:
                    return reading
        return _read_tail(surface, offset, nodes[position:], prefixes,
                          implicit, profile)

    reading = walk(0, 0, [], False)
    if reading is None:
        raise DecomposeError(
            f"cannot read group {[n.form for n in nodes]} against {surface!r}")
    return reading


def _read_tail(surface: str, offset: int, tail: list[UdNode],
               prefixes: list[UdNode], implicit: bool,
               profile: LanguageProfile) -> dict | None:
    main = tail[0]
    if len(tail) == 1:
        if surface[offset:] != main.form:
            return None
        return {"prefixes": prefixes, "implicit_det": implicit, "main": main,
                "suffix": None, "swapped": False}
    if offset >= len(surface):
        return None
    if len(tail) == 2:
        suffix = tail[1]
        if suffix.upos != SUFFIX_UPOS:
            return None
        swapped = main.head == suffix.id and main.deprel == "case"
        if not swapped and not (suffix.head == main.id and suffix.deprel == "obj"):
            return None
        return {"prefixes": prefixes, "implicit_det": implicit, "main": main,
                "suffix": suffix, "swapped": swapped}
    if len(tail) == 3:
        marker, suffix = tail[1], tail[2]
        if (suffix.upos == SUFFIX_UPOS and suffix.deprel == "nmod:poss"
                and suffix.head == main.id
                and (marker.form, marker.lemma) == profile.possessive_marker
                and marker.head == suffix.id):
            return {"prefixes": prefixes, "implicit_det": implicit,
                    "main": main, "suffix": suffix, "swapped": False}
    return None

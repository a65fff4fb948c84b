"""Data model for whole-token and segmented sentences, plus CoNLL-U I/O.

The on-disk format is CoNLL-U v2: UTF-8, LF line endings, ten tab-separated
columns per node line, `a-b` id ranges for multiword tokens, blank line after
every sentence. Comment lines are preserved verbatim and re-emitted on
serialization. DEPS and MISC (and XPOS) are carried opaquely; they are never
produced by synthesis.

Serialization is canonical: feature bags are rendered ``Key=Val|Key=Val``
with keys sorted lexicographically, empty fields as ``_``. ``parse_conllu``
and ``serialize_conllu`` are mutually inverse on the data model, and
``serialize`` is a fixpoint on files already in canonical form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EngineError

#: The 17-tag Universal Dependencies part-of-speech inventory.
UPOS_TAGS = frozenset(
    [
        "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
        "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
    ]
)


class ConlluParseError(EngineError):
    """Malformed CoNLL-U input. Carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TreeCycleError(EngineError):
    """The head column encodes a cycle. Carries the offending node ids."""

    def __init__(self, cycle: list[int]):
        path = " -> ".join(str(i) for i in cycle + cycle[:1])
        super().__init__(f"cyclic head graph: {path}")
        self.cycle = cycle


@dataclass(frozen=True)
class WholeToken:
    """A space-delimited surface word, before any segmentation."""

    index: int  # 1-based position in the sentence
    surface: str

    def __post_init__(self):
        if not self.surface or any(ch.isspace() for ch in self.surface):
            raise ValueError(f"token {self.index}: surface must be non-empty "
                             f"and contain no whitespace: {self.surface!r}")


def make_tokens(surfaces: list[str]) -> list[WholeToken]:
    """Build a contiguously indexed token list from surface strings."""
    return [WholeToken(i, s) for i, s in enumerate(surfaces, start=1)]


@dataclass(slots=True)
class UdNode:
    """One syntactic word (segment) of a UD analysis."""

    id: int
    form: str
    lemma: str
    upos: str
    feats: dict[str, str] = field(default_factory=dict)
    head: int = 0  # id of the head node, 0 for the root
    deprel: str = "dep"
    xpos: str = "_"
    deps: str = "_"
    misc: str = "_"


@dataclass(slots=True)
class Span:
    """A multiword range: nodes ``start..end`` realize one whole token."""

    start: int
    end: int
    surface: str


@dataclass
class Diagnostic:
    """A tree-validity problem, anchored at the offending node id."""

    node_id: int
    message: str


@dataclass
class UdSentence:
    """A segmented sentence: nodes, multiword spans, and comment metadata."""

    nodes: list[UdNode] = field(default_factory=list)
    spans: list[Span] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)

    @property
    def text(self) -> str | None:
        """The raw sentence, if a ``# text =`` comment is present."""
        for line in self.comments:
            if line.startswith("# text ="):
                return line.split("=", 1)[1].strip()
        return None

    def span_for(self, node_id: int) -> Span | None:
        for span in self.spans:
            if span.start <= node_id <= span.end:
                return span
        return None

    def whole_tokens(self) -> list[WholeToken]:
        """Reconstruct the whole-token sequence from spans and bare nodes."""
        surfaces: list[str] = []
        i = 0
        while i < len(self.nodes):
            span = self.span_for(self.nodes[i].id)
            if span is not None:
                surfaces.append(span.surface)
                i += span.end - span.start + 1
            else:
                surfaces.append(self.nodes[i].form)
                i += 1
        return make_tokens(surfaces)


def _check_cycles(heads: dict[int, int], line_of: dict[int, int] | None = None) -> None:
    """Raise TreeCycleError if following head pointers revisits a node."""
    state: dict[int, int] = {}  # 0 = in progress, 1 = done
    for start in heads:
        if state.get(start) == 1:
            continue
        path: list[int] = []
        node = start
        while node != 0 and state.get(node) != 1:
            if state.get(node) == 0:
                cycle = path[path.index(node):]
                raise TreeCycleError(cycle)
            state[node] = 0
            path.append(node)
            node = heads[node]
        for visited in path:
            state[visited] = 1


def parse_conllu(text: str) -> list[UdSentence]:
    """Parse CoNLL-U text into sentences.

    Raises ConlluParseError for structural problems (column counts, ids,
    unknown UPOS, out-of-range heads) and TreeCycleError when the head
    column is cyclic. Multi-rooted or otherwise non-tree-shaped (but
    acyclic) sentences parse fine; use :func:`validate_tree` to diagnose.
    """
    sentences: list[UdSentence] = []
    current = UdSentence()
    seen_nodes = False

    def flush(line_no: int):
        nonlocal current, seen_nodes
        if not current.nodes and not current.comments:
            return
        if not current.nodes:
            raise ConlluParseError("comment-only sentence block", line_no)
        _finish_sentence(current, line_no)
        sentences.append(current)
        current = UdSentence()
        seen_nodes = False

    for line_no, line in enumerate(text.split("\n"), start=1):
        if line == "":
            flush(line_no)
            continue
        if line.startswith("#"):
            if seen_nodes:
                raise ConlluParseError("comment after node lines", line_no)
            current.comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluParseError(f"expected 10 columns, got {len(cols)}", line_no)
        seen_nodes = True
        if "-" in cols[0]:
            current.spans.append(_parse_span(cols, line_no))
            continue
        current.nodes.append(_parse_node(cols, line_no))
    flush(len(text.split("\n")) + 1)
    return sentences


def _parse_span(cols: list[str], line_no: int) -> Span:
    try:
        start_s, end_s = cols[0].split("-")
        start, end = int(start_s), int(end_s)
    except ValueError:
        raise ConlluParseError(f"bad range id {cols[0]!r}", line_no) from None
    if start > end:
        raise ConlluParseError(f"inverted range id {cols[0]!r}", line_no)
    return Span(start, end, cols[1])


def _parse_node(cols: list[str], line_no: int) -> UdNode:
    try:
        node_id = int(cols[0])
        head = int(cols[6])
    except ValueError:
        raise ConlluParseError(f"non-integer id or head: {cols[0]!r}/{cols[6]!r}",
                               line_no) from None
    if cols[3] not in UPOS_TAGS:
        raise ConlluParseError(f"unknown UPOS {cols[3]!r}", line_no)
    feats: dict[str, str] = {}
    if cols[5] != "_":
        for pair in cols[5].split("|"):
            key, sep, value = pair.partition("=")
            if not sep or not key or not value:
                raise ConlluParseError(f"bad feature {pair!r}", line_no)
            feats[key] = value
    return UdNode(
        id=node_id, form=cols[1], lemma=cols[2], upos=cols[3], xpos=cols[4],
        feats=feats, head=head, deprel=cols[7], deps=cols[8], misc=cols[9],
    )


def _finish_sentence(sentence: UdSentence, line_no: int) -> None:
    ids = [node.id for node in sentence.nodes]
    if ids != list(range(1, len(ids) + 1)):
        raise ConlluParseError(f"node ids not contiguous from 1: {ids}", line_no)
    n = len(ids)
    for span in sentence.spans:
        if not (1 <= span.start <= span.end <= n):
            raise ConlluParseError(
                f"span {span.start}-{span.end} outside nodes 1..{n}", line_no)
    starts = sorted(sentence.spans, key=lambda s: s.start)
    for a, b in zip(starts, starts[1:]):
        if b.start <= a.end:
            raise ConlluParseError(
                f"overlapping spans {a.start}-{a.end} and {b.start}-{b.end}", line_no)
    heads = {}
    for node in sentence.nodes:
        if not 0 <= node.head <= n:
            raise ConlluParseError(
                f"node {node.id}: head {node.head} outside 0..{n}", line_no)
        heads[node.id] = node.head
    _check_cycles(heads)


def _render_feats(feats: dict[str, str]) -> str:
    if not feats:
        return "_"
    return "|".join(f"{key}={feats[key]}" for key in sorted(feats))


def serialize_conllu(sentences: list[UdSentence]) -> str:
    """Render sentences as canonical CoNLL-U text (inputs must be valid)."""
    out: list[str] = []
    for sentence in sentences:
        out.extend(sentence.comments)
        span_at = {span.start: span for span in sentence.spans}
        for node in sentence.nodes:
            span = span_at.get(node.id)
            if span is not None:
                out.append("\t".join(
                    [f"{span.start}-{span.end}", span.surface] + ["_"] * 8))
            out.append("\t".join([
                str(node.id), node.form, node.lemma, node.upos, node.xpos,
                _render_feats(node.feats), str(node.head), node.deprel,
                node.deps, node.misc,
            ]))
        out.append("")
    return "\n".join(out) + "\n" if out else ""


def validate_tree(sentence: UdSentence) -> list[Diagnostic]:
    """Diagnose tree-shape violations; an empty list means a valid tree.

    Checks: exactly one root, no self-heads, head ids in range, no cycles,
    every node connected to the root.
    """
    diagnostics: list[Diagnostic] = []
    n = len(sentence.nodes)
    roots = [node.id for node in sentence.nodes if node.head == 0]
    if n and len(roots) != 1:
        for node_id in roots or [sentence.nodes[0].id]:
            diagnostics.append(Diagnostic(
                node_id, f"expected exactly one root, found {len(roots)}"))
    heads: dict[int, int] = {}
    for node in sentence.nodes:
        if node.head == node.id:
            diagnostics.append(Diagnostic(node.id, "node is its own head"))
            continue
        if not 0 <= node.head <= n:
            diagnostics.append(Diagnostic(
                node.id, f"head {node.head} outside 0..{n}"))
            continue
        heads[node.id] = node.head
    try:
        _check_cycles(heads)
    except TreeCycleError as err:
        for node_id in err.cycle:
            diagnostics.append(Diagnostic(node_id, str(err)))
            break
    if not diagnostics:
        # acyclic + in-range + single root implies connectivity, but guard
        # against partially built sentences with missing head entries
        for node in sentence.nodes:
            node_id, hops = node.id, 0
            while node_id != 0 and hops <= n:
                node_id = heads.get(node_id, 0)
                hops += 1
            if hops > n:
                diagnostics.append(Diagnostic(node.id, "not connected to root"))
    return diagnostics

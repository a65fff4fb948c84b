"""Hand-built whole-token predictions for the rule-ladder fixture suite.

Each case pairs a SynthesisInput (written out by hand, tracing the
prefix/suffix attachment rules on paper) with the expected CoNLL-U file in
fixtures/ladder/. Together the cases exercise every branch of the prefix
ladder and the suffix expansion.
"""

from dataclasses import dataclass

from wtparse.conllu import make_tokens
from wtparse.heads import (DepPrediction, LemmaPrediction, MorphPrediction,
                           SegPrediction, SuffixPrediction)
from wtparse.synthesis import SynthesisInput

MS = {"Gender": "Masc", "Number": "Sing"}
FS = {"Gender": "Fem", "Number": "Sing"}
HU = SuffixPrediction("ADP+PRON", {"Gender": "Masc", "Number": "Sing", "Person": "3"})
HU_ACC = SuffixPrediction("ACC", {"Gender": "Masc", "Number": "Sing", "Person": "3"})


def _dep(head, rel):
    return DepPrediction(head=head, relation=rel)


def _morph(upos, feats=None, proc=(), suffix=None):
    return MorphPrediction(upos=upos, features=feats or {},
                           proclitic_functions=proc, suffix=suffix)


def _case(name, fixture, words, deps, morphs, segs, lemmas):
    return LadderCase(
        name=name,
        fixture=fixture,
        inp=SynthesisInput(
            tokens=make_tokens(words),
            deps=deps,
            morphs=morphs,
            segs=[SegPrediction(prefixes=s) for s in segs],
            lemmas=[LemmaPrediction(lemma=lemma) for lemma in lemmas],
        ),
    )


@dataclass
class LadderCase:
    name: str
    fixture: str
    inp: SynthesisInput


PAST3 = {"Gender": "Masc", "Number": "Sing", "Person": "3", "Tense": "Past"}
PAST1 = {"Number": "Sing", "Person": "1", "Tense": "Past"}
PRON3 = {"Gender": "Masc", "Number": "Sing", "Person": "3"}

CASES = [
    _case(
        "plain", "01_plain.conllu",
        ["dani", "ohev", "tapuzim"],
        [_dep(2, "nsubj"), _dep(0, "root"), _dep(2, "obj")],
        [_morph("PROPN", MS),
         _morph("VERB", {"Gender": "Masc", "Number": "Sing", "Tense": "Pres"}),
         _morph("NOUN", {"Gender": "Masc", "Number": "Plur"})],
        [(), (), ()],
        ["dani", "ahav", "tapuz"],
    ),
    _case(
        "mark on verb stays local", "02_mark_verb.conllu",
        ["amarti", "shehalakh"],
        [_dep(0, "root"), _dep(1, "ccomp")],
        [_morph("VERB", PAST1),
         _morph("VERB", PAST3, proc=("SCONJ",))],
        [(), ("she",)],
        ["amar", "halakh"],
    ),
    _case(
        "mark on non-verb escalates; det prefix", "03_mark_nonverb_det.conllu",
        ["amarti", "shehayeled", "tov"],
        [_dep(0, "root"), _dep(3, "nsubj"), _dep(1, "ccomp")],
        [_morph("VERB", PAST1),
         _morph("NOUN", MS, proc=("SCONJ", "DET")),
         _morph("ADJ", MS)],
        [(), ("she", "ha"), ()],
        ["amar", "yeled", "tov"],
    ),
    _case(
        "cc with relation in the local list", "04_cc_note1_member.conllu",
        ["dani", "veruti", "halkhu"],
        [_dep(3, "nsubj"), _dep(1, "conj"), _dep(0, "root")],
        [_morph("PROPN", MS),
         _morph("PROPN", FS, proc=("CCONJ",)),
         _morph("VERB", {"Number": "Plur", "Person": "3", "Tense": "Past"})],
        [(), ("ve",), ()],
        ["dani", "ruti", "halakh"],
    ),
    _case(
        "cc escalates for non-member relation", "05_cc_nonmember.conllu",
        ["veruti", "halkha"],
        [_dep(2, "nsubj"), _dep(0, "root")],
        [_morph("PROPN", FS, proc=("CCONJ",)),
         _morph("VERB", {"Gender": "Fem", "Number": "Sing", "Person": "3",
                         "Tense": "Past"})],
        [("ve",), ()],
        ["ruti", "halakh"],
    ),
    _case(
        "case prefix on content word", "06_case_content.conllu",
        ["yashav", "bekise"],
        [_dep(0, "root"), _dep(1, "obl")],
        [_morph("VERB", PAST3),
         _morph("NOUN", MS, proc=("ADP",))],
        [(), ("be",)],
        ["yashav", "kise"],
    ),
    _case(
        "case escalates for function word with listed relation",
        "07_case_note2_escalation.conllu",
        ["hu", "ba", "misham"],
        [_dep(2, "nsubj"), _dep(0, "root"), _dep(2, "advmod")],
        [_morph("PRON", PRON3),
         _morph("VERB", PAST3),
         _morph("ADV", proc=("ADP",))],
        [(), (), ("mi",)],
        ["hu", "ba", "sham"],
    ),
    _case(
        "case stays local for unlisted relation", "08_case_no_escalation.conllu",
        ["higati", "lesheva"],
        [_dep(0, "root"), _dep(1, "obl")],
        [_morph("VERB", PAST1),
         _morph("NUM", proc=("ADP",))],
        [(), ("le",)],
        ["higia", "sheva"],
    ),
    _case(
        "segmented article becomes det", "09_det_prefix.conllu",
        ["hayeled", "halakh"],
        [_dep(2, "nsubj"), _dep(0, "root")],
        [_morph("NOUN", MS, proc=("DET",)),
         _morph("VERB", PAST3)],
        [("ha",), ()],
        ["yeled", "halakh"],
    ),
    _case(
        "implicit determiner inserted", "10_implicit_det.conllu",
        ["yashav", "bebayit"],
        [_dep(0, "root"), _dep(1, "obl")],
        [_morph("VERB", PAST3),
         _morph("NOUN", MS, proc=("ADP", "DET"))],
        [(), ("be",)],
        ["yashav", "bayit"],
    ),
    _case(
        "verb takes accusative suffix as obj", "11_verb_obj_suffix.conllu",
        ["dani", "raahu"],
        [_dep(2, "nsubj"), _dep(0, "root")],
        [_morph("PROPN", MS),
         _morph("VERB", PAST3, suffix=HU_ACC)],
        [(), ()],
        ["dani", "raa"],
    ),
    _case(
        "possessive suffix inserts marker", "12_poss_suffix_marker.conllu",
        ["beito", "gadol"],
        [_dep(2, "nsubj"), _dep(0, "root")],
        [_morph("NOUN", MS, suffix=HU),
         _morph("ADJ", MS)],
        [(), ()],
        ["bait", "gadol"],
    ),
    _case(
        "adposition hands its arc to the suffix", "13_adp_suffix_swap.conllu",
        ["hu", "khashav", "alav"],
        [_dep(2, "nsubj"), _dep(0, "root"), _dep(2, "obl")],
        [_morph("PRON", PRON3),
         _morph("VERB", PAST3),
         _morph("ADP", suffix=HU)],
        [(), (), ()],
        ["hu", "khashav", "al"],
    ),
    _case(
        "conjunction plus relativizer stack", "14_multi_prefix_kshe.conllu",
        ["vekshehalakh", "raiti"],
        [_dep(2, "advcl"), _dep(0, "root")],
        [_morph("VERB", PAST3, proc=("CCONJ", "SCONJ")),
         _morph("VERB", PAST1)],
        [("ve", "kshe"), ()],
        ["halakh", "raa"],
    ),
    _case(
        "second preposition falls back to the table default",
        "15_prefix_consumption.conllu",
        ["yatsa", "mibeshuk"],
        [_dep(0, "root"), _dep(1, "obl")],
        [_morph("VERB", PAST3),
         _morph("NOUN", MS, proc=("ADP",))],
        [(), ("mi", "be")],
        ["yatsa", "shuk"],
    ),
    _case(
        "cc on the root token stays local", "16_cc_root_local.conllu",
        ["vehalakh"],
        [_dep(0, "root")],
        [_morph("VERB", PAST3, proc=("CCONJ",))],
        [("ve",)],
        ["halakh"],
    ),
]

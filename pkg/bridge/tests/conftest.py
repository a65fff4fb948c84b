import json

import pytest
import torch
from tokenizers import Tokenizer, models, normalizers, pre_tokenizers, processors
from transformers import BertConfig, BertModel, BertTokenizerFast

LETTERS = "abcdefghijklmnopqrstuvwxyz"
EMBED_DIM = 16
HEAD_DIM = 8

LEMMA_VOCAB = ["[BLANK]", "ahav", "bayit", "halakh", "hu", "kise", "raa",
               "ruti", "sham", "shuk", "tapuz", "yeled"]
RELATIONS = ["acl:relcl", "advcl", "advmod", "case", "cc", "ccomp", "conj",
             "dep", "det", "mark", "nmod:poss", "nsubj", "obj", "obl",
             "punct", "root"]
UPOS = ["ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
        "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"]
PROCLITIC = ["CCONJ", "SCONJ", "ADP", "DET"]
SEG_GROUPS = ["ve", "she", "kshe", "be", "ke", "le", "mi", "ha"]
FEATURE_SLOTS = [
    {"name": "Gender", "values": ["_", "Masc", "Fem"]},
    {"name": "Number", "values": ["_", "Sing", "Plur"]},
    {"name": "Person", "values": ["_", "1", "2", "3"]},
    {"name": "Tense", "values": ["_", "Past", "Pres", "Fut"]},
]
SUFFIX_FUNCTIONS = ["_", "ADP+PRON", "ACC"]
SUFFIX_SLOTS = [
    {"name": "Gender", "values": ["_", "Masc", "Fem"]},
    {"name": "Number", "values": ["Sing", "Plur"]},
    {"name": "Person", "values": ["1", "2", "3"]},
]
NER_CLASSES = ["ANG", "DUC", "EVE", "FAC", "GPE", "INF", "LOC", "MISC",
               "ORG", "PER", "TIMEX", "TTL", "WOA"]


def _slot_width(slots):
    return sum(len(s["values"]) for s in slots)


def head_shapes():
    return {
        "dep.query": (EMBED_DIM, HEAD_DIM),
        "dep.key": (EMBED_DIM, HEAD_DIM),
        "relations.weight": (2 * EMBED_DIM, len(RELATIONS)),
        "lemma.weight": (EMBED_DIM, len(LEMMA_VOCAB)),
        "morph.pos": (EMBED_DIM, len(UPOS)),
        "morph.proclitic": (EMBED_DIM, len(PROCLITIC)),
        "morph.features": (EMBED_DIM, _slot_width(FEATURE_SLOTS)),
        "morph.suffix_function": (EMBED_DIM, len(SUFFIX_FUNCTIONS)),
        "morph.suffix_features": (EMBED_DIM, _slot_width(SUFFIX_SLOTS)),
        "seg.groups": (len(SEG_GROUPS), EMBED_DIM, 2),
        "ner.weight": (EMBED_DIM, 2 * len(NER_CLASSES) + 1),
    }


def _build_tokenizer(directory):
    vocab = (["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + list(LETTERS)
             + [f"##{c}" for c in LETTERS])
    backend = Tokenizer(models.WordPiece(
        {t: i for i, t in enumerate(vocab)}, unk_token="[UNK]",
        continuing_subword_prefix="##"))
    backend.normalizer = normalizers.BertNormalizer(lowercase=True)
    backend.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    backend.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]", pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", 2), ("[SEP]", 3)])
    tokenizer = BertTokenizerFast(
        tokenizer_object=backend, unk_token="[UNK]", pad_token="[PAD]",
        cls_token="[CLS]", sep_token="[SEP]", mask_token="[MASK]")
    tokenizer.save_pretrained(directory)
    return len(vocab)


@pytest.fixture(scope="session")
def toy_checkpoint(tmp_path_factory):
    """A complete toy checkpoint dir: tiny encoder, tokenizer, heads, labels."""
    directory = tmp_path_factory.mktemp("checkpoint")
    encoder_vocab = _build_tokenizer(directory)
    config = BertConfig(
        vocab_size=encoder_vocab, hidden_size=EMBED_DIM, num_hidden_layers=1,
        num_attention_heads=2, intermediate_size=32,
        max_position_embeddings=128)
    torch.manual_seed(7)
    BertModel(config).save_pretrained(directory)

    generator = torch.Generator().manual_seed(11)
    heads = {name: torch.randn(shape, generator=generator)
             for name, shape in head_shapes().items()}
    torch.save(heads, directory / "heads.pt")

    labels = {
        "relations": RELATIONS,
        "vocab": LEMMA_VOCAB,
        "blank_id": 0,
        "upos": UPOS,
        "proclitic": PROCLITIC,
        "feature_slots": FEATURE_SLOTS,
        "suffix_functions": SUFFIX_FUNCTIONS,
        "suffix_feature_slots": SUFFIX_SLOTS,
        "seg_groups": SEG_GROUPS,
        "ner": ["O"] + [f"{k}-{c}" for c in NER_CLASSES for k in ("B", "I")],
    }
    (directory / "labels.json").write_text(json.dumps(labels),
                                           encoding="utf-8")
    return directory


@pytest.fixture()
def manifest_path(toy_checkpoint, tmp_path):
    payload = {
        "format_version": 1,
        "checkpoint": str(toy_checkpoint),
        "embedding_dim": EMBED_DIM,
        "head_dim": HEAD_DIM,
        "vocab_size": len(LEMMA_VOCAB),
        "heads": {name: list(shape) for name, shape in head_shapes().items()},
        "bundle_path": str(tmp_path / "model.wtpb"),
        "embeddings_path": str(tmp_path / "rows.wtpe"),
    }
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path

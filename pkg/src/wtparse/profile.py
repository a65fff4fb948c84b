"""Loadable language-specific rule tables.

A profile parameterizes the two language-dependent parts of the engine:
which letter-groups may be split off the front of a word (and in which
order), and the rule tables used when synthesizing a full UD analysis
(prefix-function mapping, suffix surface dictionary, relation lists,
inserted-node surfaces).

Profiles are YAML documents with a ``format_version`` field; see
docs/profile-format.md and the shipped ``hebrew``/``translit`` profiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from .errors import EngineError

PROFILE_FORMAT_VERSION = 1

_REQUIRED_KEYS = {
    "format_version", "name", "letter_groups", "slots", "prefix_functions",
    "relativizer_suffix", "conj_letter", "implicit_det_letter",
    "possessive_marker", "suffix_table", "note1_deprels", "note2_deprels",
}
_OPTIONAL_KEYS = {"description"}


class ProfileError(EngineError):
    """Raised for unreadable or schema-invalid profile files."""


@dataclass(frozen=True)
class LanguageProfile:
    """Immutable language rule tables; shareable across threads."""

    name: str
    letter_groups: tuple[str, ...]
    #: Ordered slots; a valid prefix sequence takes at most one group per
    #: slot, in slot order, and uses each group at most once overall.
    slots: tuple[tuple[str, ...], ...]
    #: Letter-group -> ordered admissible proclitic functions (first = default).
    prefix_functions: dict[str, tuple[str, ...]]
    relativizer_suffix: str
    conj_letter: str
    implicit_det_letter: str
    #: (surface, lemma) of the inserted possessive-marker node.
    possessive_marker: tuple[str, str]
    #: (function, gender, number, person) -> (surface, lemma); "_" = no value.
    suffix_table: dict[tuple[str, str, str, str], tuple[str, str]]
    note1_deprels: tuple[str, ...]
    note2_deprels: tuple[str, ...]

    @property
    def group_bits(self) -> dict[str, int]:
        """Letter-group -> bit, cached (profiles are immutable)."""
        cached = getattr(self, "_group_bits", None)
        if cached is None:
            cached = {g: 1 << i for i, g in enumerate(self.letter_groups)}
            object.__setattr__(self, "_group_bits", cached)
        return cached

    def suffix_functions(self) -> list[str]:
        """Distinct suffix functions, in table order."""
        seen: list[str] = []
        for key in self.suffix_table:
            if key[0] not in seen:
                seen.append(key[0])
        return seen


def builtin_profile_path(name: str) -> Path:
    """Path of a profile shipped with the package (e.g. ``hebrew``)."""
    return Path(str(resources.files("wtparse") / "profiles" / f"{name}.yaml"))


def load_profile(path: str | Path) -> LanguageProfile:
    """Load and validate a profile file.

    Rejects unknown keys and missing tables by name, so authoring mistakes
    surface early rather than as odd segmentation behavior.
    """
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise ProfileError(f"cannot read profile {path}: {err}") from err
    except yaml.YAMLError as err:
        raise ProfileError(f"profile {path} is not valid YAML: {err}") from err
    if not isinstance(raw, dict):
        raise ProfileError(f"profile {path} must be a mapping")

    missing = _REQUIRED_KEYS - raw.keys()
    if missing:
        raise ProfileError(f"profile {path} missing tables: {sorted(missing)}")
    unknown = raw.keys() - _REQUIRED_KEYS - _OPTIONAL_KEYS
    if unknown:
        raise ProfileError(f"profile {path} has unknown keys: {sorted(unknown)}")
    if raw["format_version"] != PROFILE_FORMAT_VERSION:
        raise ProfileError(
            f"profile {path}: unsupported format_version {raw['format_version']}")

    letter_groups = tuple(_str_list(raw, "letter_groups"))
    if len(set(letter_groups)) != len(letter_groups):
        raise ProfileError("letter_groups contains duplicates")
    slots = tuple(tuple(slot) for slot in raw["slots"])
    for slot in slots:
        for group in slot:
            if group not in letter_groups:
                raise ProfileError(f"slot member {group!r} not a letter group")
    in_slots = {group for slot in slots for group in slot}
    for group in letter_groups:
        if group not in in_slots:
            raise ProfileError(f"letter group {group!r} appears in no slot")

    prefix_functions = {
        group: tuple(functions)
        for group, functions in raw["prefix_functions"].items()
    }
    for group in letter_groups:
        if group not in prefix_functions or not prefix_functions[group]:
            raise ProfileError(
                f"prefix_functions missing or empty for letter group {group!r}")

    marker = raw["possessive_marker"]
    if not isinstance(marker, dict) or {"surface", "lemma"} - marker.keys():
        raise ProfileError("possessive_marker needs surface and lemma")

    suffix_table: dict[tuple[str, str, str, str], tuple[str, str]] = {}
    for row in raw["suffix_table"]:
        extra = row.keys() - {"function", "gender", "number", "person",
                              "surface", "lemma"}
        if extra or {"function", "surface", "lemma"} - row.keys():
            raise ProfileError(f"bad suffix_table row: {row}")
        key = (str(row["function"]), str(row.get("gender", "_")),
               str(row.get("number", "_")), str(row.get("person", "_")))
        if key in suffix_table:
            raise ProfileError(f"duplicate suffix_table key: {key}")
        suffix_table[key] = (str(row["surface"]), str(row["lemma"]))
    if not suffix_table:
        raise ProfileError("suffix_table is empty")

    return LanguageProfile(
        name=str(raw["name"]),
        letter_groups=letter_groups,
        slots=slots,
        prefix_functions=prefix_functions,
        relativizer_suffix=str(raw["relativizer_suffix"]),
        conj_letter=str(raw["conj_letter"]),
        implicit_det_letter=str(raw["implicit_det_letter"]),
        possessive_marker=(str(marker["surface"]), str(marker["lemma"])),
        suffix_table=suffix_table,
        note1_deprels=tuple(_str_list(raw, "note1_deprels")),
        note2_deprels=tuple(_str_list(raw, "note2_deprels")),
    )


def _str_list(raw: dict, key: str) -> list[str]:
    value = raw[key]
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise ProfileError(f"{key} must be a list of strings")
    return value


def enumerate_valid_prefix_sets(surface: str,
                                profile: LanguageProfile) -> list[list[str]]:
    """All prefix letter-group sequences admissible for ``surface``.

    A sequence is admissible when its groups occupy distinct slots in slot
    order, each group is used at most once, the concatenation matches the
    start of the surface, and at least one character of main word remains.
    The empty sequence is always first; enumeration order is deterministic.
    """
    if not surface:
        raise ValueError("surface must be non-empty")
    group_bit = profile.group_bits
    results: list[list[str]] = []
    seen: set[tuple[str, ...]] = set()

    def walk(slot_index: int, offset: int, used: int,
             sequence: tuple[str, ...]) -> None:
        if sequence not in seen:
            seen.add(sequence)
            results.append(list(sequence))
        for k in range(slot_index, len(profile.slots)):
            for group in profile.slots[k]:
                bit = group_bit[group]
                if used & bit:
                    continue
                end = offset + len(group)
                # strict prefix: the main word must keep >= 1 character
                if end < len(surface) and surface.startswith(group, offset):
                    walk(k + 1, end, used | bit, sequence + (group,))

    walk(0, 0, 0, ())
    return results

"""Text normalization for change-request descriptions and revision messages."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import ConfigError, ParseError

if TYPE_CHECKING:  # pragma: no cover
    from .ingest import ChangeRequest

_WORD_RE = re.compile(r"[0-9a-z]+")

_VOWELS = "aeiou"

DEFAULT_STOP_WORDS = frozenset("""
    a about above after again all also am an and any are as at be because been
    before being below between both but by can could did do does doing down
    during each few for from further had has have having he her here hers him
    his how i if in into is it its itself just me more most my no nor not now
    of off on once only or other our ours out over own same she should so some
    such than that the their theirs them then there these they this those
    through to too under until up very was we were what when where which while
    who whom why will with would you your yours
""".split())


@dataclass(frozen=True)
class DescriptiveTokenSet:
    """Normalized tokens describing one change request or message."""

    owner_id: str
    tokens: tuple[str, ...]

    def as_set(self) -> frozenset[str]:
        return frozenset(self.tokens)


@dataclass(frozen=True)
class RankedDescriptor:
    """One candidate descriptor scored against a query token set."""

    descriptor_id: str
    score: int
    rank: int


def tokenize(text: str) -> list[str]:
    """Split ``text`` on non-alphanumeric boundaries and lowercase it."""
    return _WORD_RE.findall(text.lower())


def remove_stop_words(words: Iterable[str],
                      stop_words: frozenset[str] | None = None) -> list[str]:
    stop = DEFAULT_STOP_WORDS if stop_words is None else stop_words
    return [w for w in words if w not in stop]


def load_stop_words(path: str | Path) -> frozenset[str]:
    """Read a stop-word override file: one word per line, ``#`` comments."""
    words = set()
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if len(line.split()) != 1:
            raise ParseError(f"expected one word per line, got {line!r}",
                             line=lineno, stage="textprep")
        words.add(line.lower())
    return frozenset(words)


def _strip_suffix_once(word: str) -> str:
    for suffix in ("ing", "ed", "es", "s"):
        if not word.endswith(suffix):
            continue
        if suffix == "s" and word.endswith("ss"):
            return word
        root = word[: -len(suffix)]
        if len(root) < 3:
            return word
        # undo consonant doubling left by -ing/-ed, but never below 3 chars
        if (suffix in ("ing", "ed") and len(root) >= 4
                and root[-1] == root[-2]
                and root[-1] not in _VOWELS and root[-1] not in "lsz"):
            root = root[:-1]
        return root
    return word


def stem(word: str, algorithm: str = "suffix") -> str:
    """Reduce ``word`` to a stable stem.

    The default algorithm strips common inflection suffixes (-ing, -ed, -es,
    -s, longest match first) as long as at least three characters remain,
    repeating until the word stops changing so the result is idempotent.
    ``algorithm="porter"`` selects the full Porter algorithm instead.
    """
    if algorithm == "porter":
        return porter_stem(word)
    if algorithm != "suffix":
        raise ConfigError(f"unknown stemmer {algorithm!r}")
    while True:
        shorter = _strip_suffix_once(word)
        if shorter == word:
            return shorter
        word = shorter


def descriptive_tokens(cr: "ChangeRequest", *,
                       stop_words: frozenset[str] | None = None,
                       stemmer: str = "suffix") -> DescriptiveTokenSet:
    """Tokenize, filter and stem both description fields of a change request.

    Duplicate stems are removed while preserving first-occurrence order.
    """
    return token_set(cr.id, f"{cr.short_desc} {cr.long_desc}",
                     stop_words=stop_words, stemmer=stemmer)


def token_set(owner_id: str, text: str, *,
              stop_words: frozenset[str] | None = None,
              stemmer: str = "suffix") -> DescriptiveTokenSet:
    seen: dict[str, None] = {}
    for word in remove_stop_words(tokenize(text), stop_words):
        seen.setdefault(stem(word, stemmer))
    return DescriptiveTokenSet(owner_id=owner_id, tokens=tuple(seen))


def rank_descriptors(query: DescriptiveTokenSet,
                     descriptors: Sequence[DescriptiveTokenSet]) -> list[RankedDescriptor]:
    """Rank ``descriptors`` by shared-token count with ``query``, best first.

    Ties are broken by ascending descriptor id so the ordering is total.
    """
    q = query.as_set()
    scored = sorted(((len(q & d.as_set()), d.owner_id) for d in descriptors),
                    key=lambda pair: (-pair[0], pair[1]))
    return [RankedDescriptor(descriptor_id=did, score=score, rank=i)
            for i, (score, did) in enumerate(scored, 1)]


# ---------------------------------------------------------------------------
# Porter stemmer (kept self-contained; no third-party stemming dependency)
# ---------------------------------------------------------------------------

def _is_consonant(word: str, i: int) -> bool:
    c = word[i]
    if c in _VOWELS:
        return False
    if c == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem_part: str) -> int:
    runs: list[bool] = []
    for i in range(len(stem_part)):
        flag = _is_consonant(stem_part, i)
        if not runs or runs[-1] is not flag:
            runs.append(flag)
    return sum(1 for a, b in zip(runs, runs[1:]) if a is False and b is True)


def _contains_vowel(stem_part: str) -> bool:
    return any(not _is_consonant(stem_part, i) for i in range(len(stem_part)))


def _ends_double_consonant(word: str) -> bool:
    return (len(word) >= 2 and word[-1] == word[-2]
            and _is_consonant(word, len(word) - 1))


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    return (_is_consonant(word, len(word) - 3)
            and not _is_consonant(word, len(word) - 2)
            and _is_consonant(word, len(word) - 1)
            and word[-1] not in "wxy")


_STEP2 = (
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
)

_STEP3 = (
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
)

_STEP4 = ("al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
          "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize")


def porter_stem(word: str) -> str:
    """Classic five-step Porter reduction for English words."""
    if len(word) <= 2:
        return word
    w = word

    # step 1a
    if w.endswith("sses"):
        w = w[:-2]
    elif w.endswith("ies"):
        w = w[:-2]
    elif not w.endswith("ss") and w.endswith("s"):
        w = w[:-1]

    # step 1b
    grew = False
    if w.endswith("eed"):
        if _measure(w[:-3]) > 0:
            w = w[:-1]
    elif w.endswith("ed") and _contains_vowel(w[:-2]):
        w = w[:-2]
        grew = True
    elif w.endswith("ing") and _contains_vowel(w[:-3]):
        w = w[:-3]
        grew = True
    if grew:
        if w.endswith(("at", "bl", "iz")):
            w += "e"
        elif _ends_double_consonant(w) and w[-1] not in "lsz":
            w = w[:-1]
        elif _measure(w) == 1 and _ends_cvc(w):
            w += "e"

    # step 1c
    if w.endswith("y") and _contains_vowel(w[:-1]):
        w = w[:-1] + "i"

    # step 2
    for suffix, repl in _STEP2:
        if w.endswith(suffix):
            if _measure(w[: -len(suffix)]) > 0:
                w = w[: -len(suffix)] + repl
            break

    # step 3
    for suffix, repl in _STEP3:
        if w.endswith(suffix):
            if _measure(w[: -len(suffix)]) > 0:
                w = w[: -len(suffix)] + repl
            break

    # step 4
    for suffix in _STEP4:
        if w.endswith(suffix):
            root = w[: -len(suffix)]
            if _measure(root) > 1 and (suffix != "ion" or root.endswith(("s", "t"))):
                w = root
            break

    # step 5a
    if w.endswith("e"):
        m = _measure(w[:-1])
        if m > 1 or (m == 1 and not _ends_cvc(w[:-1])):
            w = w[:-1]

    # step 5b
    if _measure(w) > 1 and _ends_double_consonant(w) and w.endswith("l"):
        w = w[:-1]

    return w

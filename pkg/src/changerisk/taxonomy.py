"""Fixed artifact taxonomy and the keyword rules mapping requests onto it.

Kinds form a three-level tree: motivation (feature_request | bug_fix),
category (three feature categories, four bug-fix categories), and affected
aspect (five values).  That yields (3 + 4) x 5 = 35 kinds.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .errors import ConfigError, DataError
from .textprep import DescriptiveTokenSet, stem

if TYPE_CHECKING:  # pragma: no cover
    from .ingest import ChangeRequest

LEVEL1 = ("feature_request", "bug_fix")

LEVEL2 = {
    "feature_request": ("refactor", "functional", "architectural"),
    "bug_fix": ("preventive", "perfective", "corrective", "adaptive"),
}

LEVEL3 = ("source_code", "inheritance", "coupling", "dependency", "structure")

# category assigned when a kind hint names the motivation but no rule fires
_HINT_DEFAULT_LEVEL2 = {"feature_request": "functional", "bug_fix": "corrective"}


@dataclass(frozen=True, order=True)
class ArtifactKind:
    level1: str
    level2: str
    level3: str

    def __post_init__(self):
        if self.level1 not in LEVEL1:
            raise ConfigError(f"unknown level1 {self.level1!r}")
        if self.level2 not in LEVEL2[self.level1]:
            raise ConfigError(
                f"level2 {self.level2!r} is not legal under {self.level1!r}")
        if self.level3 not in LEVEL3:
            raise ConfigError(f"unknown level3 {self.level3!r}")

    @property
    def label(self) -> str:
        return f"{self.level1}.{self.level2}.{self.level3}"

    @classmethod
    def from_label(cls, label: str) -> "ArtifactKind":
        parts = label.split(".")
        if len(parts) != 3:
            raise ConfigError(f"artifact kind label {label!r} must have 3 parts")
        return cls(*parts)


FALLBACK_KIND = ArtifactKind("bug_fix", "corrective", "source_code")

FALLBACK_LEVEL3 = "source_code"


@dataclass(frozen=True)
class CategoryRule:
    """Maps matching tokens to a (level1, level2) choice."""

    patterns: frozenset[str]
    level1: str
    level2: str


@dataclass(frozen=True)
class AspectRule:
    """Maps matching tokens to a level3 choice."""

    patterns: frozenset[str]
    level3: str


@dataclass(frozen=True)
class ClassificationRuleSet:
    category_rules: tuple[CategoryRule, ...]
    aspect_rules: tuple[AspectRule, ...]

    def __post_init__(self):
        covered = {(r.level1, r.level2) for r in self.category_rules}
        missing = [f"{l1}.{l2}" for l1 in LEVEL1 for l2 in LEVEL2[l1]
                   if (l1, l2) not in covered]
        aspects = {r.level3 for r in self.aspect_rules}
        missing += [f"*.*.{l3}" for l3 in LEVEL3
                    if l3 != FALLBACK_LEVEL3 and l3 not in aspects]
        if missing:
            raise ConfigError(
                "rule set leaves kinds unreachable; missing rules for: "
                + ", ".join(missing))


@dataclass(frozen=True)
class ChangeRequestArtifact:
    """A taxonomy node together with the requests mapped onto it."""

    kind: ArtifactKind
    members: tuple[str, ...]


def enumerate_kinds() -> list[ArtifactKind]:
    """All 35 kinds in a fixed deterministic order."""
    return [ArtifactKind(l1, l2, l3)
            for l1 in LEVEL1 for l2 in LEVEL2[l1] for l3 in LEVEL3]


_DEFAULT_RULE_LINES = (
    "bug_fix.corrective.*: fix, crash, bug, error",
    "bug_fix.perfective.*: slow, clean, improv",
    "bug_fix.adaptive.*: port, upgrad, compat",
    "bug_fix.preventive.*: prevent, guard",
    "feature_request.refactor.*: refactor, renam",
    "feature_request.functional.*: featur, add, support",
    "feature_request.architectural.*: architect, redesign",
    "*.*.inheritance: inherit, subclass",
    "*.*.coupling: coupl, interfac",
    "*.*.dependency: depend, import, library",
    "*.*.structure: modul, structur, packag",
)


def parse_rules_lines(lines: Iterable[str], *,
                      stemmer: str = "suffix") -> ClassificationRuleSet:
    """Build a rule set from ``level1.level2.level3: token, ...`` lines.

    Any position may be ``*``.  A concrete category (the first two levels,
    with level1 inferable from an unambiguous level2) yields a category
    rule; a concrete aspect yields an aspect rule; a fully concrete line
    yields both.  Pattern tokens are stemmed so they match prepared text.
    """
    category_rules: list[CategoryRule] = []
    aspect_rules: list[AspectRule] = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ConfigError(f"rules line {lineno}: missing ':' in {line!r}")
        head, _, tail = line.partition(":")
        parts = [p.strip() for p in head.strip().split(".")]
        if len(parts) != 3:
            raise ConfigError(
                f"rules line {lineno}: kind selector must have 3 dot-separated "
                f"parts, got {head.strip()!r}")
        level1, level2, level3 = parts
        patterns = frozenset(stem(tok.strip().lower(), stemmer)
                             for tok in tail.split(",") if tok.strip())
        if not patterns:
            raise ConfigError(f"rules line {lineno}: no pattern tokens")

        if level2 != "*":
            if level1 == "*":
                owners = [l1 for l1 in LEVEL1 if level2 in LEVEL2[l1]]
                if not owners:
                    raise ConfigError(
                        f"rules line {lineno}: unknown level2 {level2!r}")
                level1 = owners[0]
            if level1 not in LEVEL1 or level2 not in LEVEL2[level1]:
                raise ConfigError(
                    f"rules line {lineno}: {level1}.{level2} is not a legal "
                    f"category")
            category_rules.append(CategoryRule(patterns, level1, level2))
        elif level1 != "*":
            raise ConfigError(
                f"rules line {lineno}: level2 must be concrete when level1 is")

        if level3 != "*":
            if level3 not in LEVEL3:
                raise ConfigError(
                    f"rules line {lineno}: unknown level3 {level3!r}")
            aspect_rules.append(AspectRule(patterns, level3))
        elif level2 == "*":
            raise ConfigError(
                f"rules line {lineno}: rule selects nothing (all wildcards)")
    return ClassificationRuleSet(tuple(category_rules), tuple(aspect_rules))


def default_rules(stemmer: str = "suffix") -> ClassificationRuleSet:
    return parse_rules_lines(_DEFAULT_RULE_LINES, stemmer=stemmer)


def load_rules(path: str | Path, *, stemmer: str = "suffix") -> ClassificationRuleSet:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return parse_rules_lines(lines, stemmer=stemmer)


def rules_to_lines(rules: ClassificationRuleSet) -> list[str]:
    """Serialize a rule set back into the rules-file line format."""
    lines = [f"{r.level1}.{r.level2}.*: " + ", ".join(sorted(r.patterns))
             for r in rules.category_rules]
    lines += [f"*.*.{r.level3}: " + ", ".join(sorted(r.patterns))
              for r in rules.aspect_rules]
    return lines


DEFAULT_RULES = default_rules()


def _hint_level1(kind_hint: str | None) -> str | None:
    if kind_hint is None:
        return None
    hint = kind_hint.strip().lower()
    if not hint:
        return None
    if hint in LEVEL1:
        return hint
    if any(word in hint for word in ("feature", "enhance", "new")):
        return "feature_request"
    if any(word in hint for word in ("bug", "defect", "fix", "fault")):
        return "bug_fix"
    return None


def classify(cr: "ChangeRequest", tokens: DescriptiveTokenSet,
             rules: ClassificationRuleSet = DEFAULT_RULES) -> list[ArtifactKind]:
    """Map one change request to its artifact kinds.

    The category comes from the first matching category rule (the request's
    kind hint, when present, constrains the motivation level); every
    matching aspect rule contributes a kind, with source_code as the default
    aspect.  A request matching nothing gets the fallback kind.
    """
    token_values = tokens.as_set()
    constraint = _hint_level1(cr.kind_hint)

    category = None
    for rule in rules.category_rules:
        if not rule.patterns & token_values:
            continue
        if constraint is not None and rule.level1 != constraint:
            continue
        category = (rule.level1, rule.level2)
        break
    if category is None:
        if constraint is not None:
            category = (constraint, _HINT_DEFAULT_LEVEL2[constraint])
        else:
            category = (FALLBACK_KIND.level1, FALLBACK_KIND.level2)

    aspects: list[str] = []
    for rule in rules.aspect_rules:
        if rule.patterns & token_values and rule.level3 not in aspects:
            aspects.append(rule.level3)
    if not aspects:
        aspects = [FALLBACK_LEVEL3]

    level1, level2 = category
    return [ArtifactKind(level1, level2, aspect) for aspect in aspects]


def build_artifacts(crs: Sequence["ChangeRequest"],
                    assignments: Mapping[str, Sequence[ArtifactKind]]
                    ) -> list[ChangeRequestArtifact]:
    """Group requests by kind into artifacts with sorted member ids."""
    members: dict[ArtifactKind, set[str]] = {}
    for cr in crs:
        kinds = assignments.get(cr.id)
        if not kinds:
            raise DataError(f"request {cr.id!r} has no assigned kinds",
                            stage="taxonomy")
        for kind in kinds:
            members.setdefault(kind, set()).add(cr.id)
    return [ChangeRequestArtifact(kind=kind, members=tuple(sorted(ids)))
            for kind, ids in sorted(members.items())]

"""
Lexical matching of attribute names across dimensions.

Two attributes are considered semantically identical when their names,
once stripped of dimension prefixes/suffixes, are close in normalized
Levenshtein similarity. An explicit alias map overrides the score.
"""

import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache

import Levenshtein

from core.errors import MatchError
from core.schema_model import check_document, read_json

logger = logging.getLogger(__name__)

SEPARATORS = "_- "
_INITIAL_PREFIX = re.compile(r"^[^\W\d_]_")
_INITIAL_SUFFIX = re.compile(r"_[^\W\d_]$")


@dataclass(frozen=True)
class MatchConfig:
    """
    threshold: minimum similarity for a match, in [0, 1]
    strip_tokens: extra prefixes/suffixes removed before comparing
    case_fold: compare lowercased names
    aliases: frozenset of ((dim_a, attr_a), (dim_b, attr_b)) declared equal
    """
    threshold: float = 0.8
    strip_tokens: frozenset = field(default_factory=frozenset)
    case_fold: bool = True
    aliases: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise MatchError(f"threshold must lie in [0, 1], got {self.threshold}")
        object.__setattr__(self, "strip_tokens", frozenset(self.strip_tokens))
        object.__setattr__(self, "aliases", frozenset(self.aliases))


@dataclass(frozen=True)
class MatchDecision:
    a: str
    b: str
    score: float
    matched: bool
    dimension_a: str = ""
    dimension_b: str = ""


# -----------------------------------------------------
# Normalization
# -----------------------------------------------------
def normalize(name, cfg, owner):
    """
    Strip the owner's name, configured tokens and one-letter prefixes
    such as "c_" from both ends of an attribute name.

    Stripping repeats until nothing applies, so normalize is idempotent.
    An empty result matches nothing.
    """
    return _normalize(name, cfg.case_fold, cfg.strip_tokens, owner)


@lru_cache(maxsize=4096)
def _normalize(name, case_fold, strip_tokens, owner):
    fold = (lambda s: s.lower()) if case_fold else (lambda s: s)
    text = fold(name)
    # single letters are covered by the "x_" patterns below
    tokens = {fold(t) for t in (*strip_tokens, owner) if t and len(t) > 1}
    ordered = sorted(tokens, key=lambda t: (-len(t), t))

    while True:
        before = text
        for tok in ordered:
            if text.startswith(tok):
                text = text[len(tok):]
                break
        else:
            text = _INITIAL_PREFIX.sub("", text, count=1)
        for tok in ordered:
            if text.endswith(tok):
                text = text[: -len(tok)]
                break
        else:
            text = _INITIAL_SUFFIX.sub("", text, count=1)
        text = text.strip(SEPARATORS)
        if text == before:
            return text


# -----------------------------------------------------
# Similarity
# -----------------------------------------------------
def similarity(a, b):
    """1 - edit_distance / longer length; two empty strings score 1."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - Levenshtein.distance(a, b) / longest


def attributes_match(a, owner_a, b, owner_b, cfg):
    """
    Decide whether attribute a of owner_a is semantically identical to
    attribute b of owner_b.

    Returns:
        MatchDecision (symmetric in its score and verdict)
    """
    if owner_a == owner_b:
        raise MatchError(f"both attributes belong to dimension {owner_a!r}")

    if ((owner_a, a), (owner_b, b)) in cfg.aliases or ((owner_b, b), (owner_a, a)) in cfg.aliases:
        return MatchDecision(a, b, 1.0, True, owner_a, owner_b)

    na = normalize(a, cfg, owner_a)
    nb = normalize(b, cfg, owner_b)
    if not na or not nb:
        return MatchDecision(a, b, 0.0, False, owner_a, owner_b)

    score = similarity(na, nb)
    return MatchDecision(a, b, score, score >= cfg.threshold, owner_a, owner_b)


def best_match(attribute, owner, candidates, candidate_owner, cfg, exclude=()):
    """
    Highest-scoring matched candidate for an attribute.

    Ties keep the earlier candidate. Returns the MatchDecision with
    `b` set to the chosen candidate, or None.
    """
    best = None
    for cand in candidates:
        if cand in exclude:
            continue
        decision = attributes_match(attribute, owner, cand, candidate_owner, cfg)
        if decision.matched and (best is None or decision.score > best.score):
            best = decision
    return best


# -----------------------------------------------------
# Alias maps
# -----------------------------------------------------
ALIAS_FILE_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "additionalProperties": False,
        "required": ["dimension_a", "attribute_a", "dimension_b", "attribute_b"],
        "properties": {
            "dimension_a": {"type": "string", "minLength": 1},
            "attribute_a": {"type": "string", "minLength": 1},
            "dimension_b": {"type": "string", "minLength": 1},
            "attribute_b": {"type": "string", "minLength": 1},
        },
    },
}


def load_aliases(path):
    """Read an alias map file into the frozenset MatchConfig expects."""
    document = read_json(path)
    check_document(document, ALIAS_FILE_SCHEMA, path)
    aliases = frozenset(
        ((e["dimension_a"], e["attribute_a"]), (e["dimension_b"], e["attribute_b"]))
        for e in document
    )
    logger.info("loaded %d alias pair(s) from %s", len(aliases), path)
    return aliases

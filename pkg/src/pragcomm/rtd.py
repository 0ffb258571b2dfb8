"""Teaching-set analysis by brute force on small concept classes.

Implements the classic teaching dimension over labeled examples, the
recursive teaching hierarchy (peel off the easiest-to-teach concepts,
recompute, repeat), and the level-k labeling of referential games where a
"teaching example" is restricted to naming an attribute of the target.
Everything here is an exact oracle for desk-scale verification; the budget
guard refuses inputs large enough to make subset enumeration explode.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

GAME_LEVEL_UNREACHABLE = -1  # candidate never gains a unique identifier

MAX_DOMAIN = 20
MAX_CONCEPTS = 12


@dataclass(frozen=True)
class ConceptClass:
    """Distinct binary vectors over an instance domain of size n."""

    n: int
    concepts: tuple  # tuple of tuples in {0,1}^n

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("domain size must be >= 1")
        if len(set(self.concepts)) != len(self.concepts):
            raise ConfigError("concepts must be pairwise distinct")
        for c in self.concepts:
            if len(c) != self.n or any(v not in (0, 1) for v in c):
                raise ConfigError(f"concept {c} is not a binary vector of length {self.n}")

    def __len__(self):
        return len(self.concepts)


@dataclass(frozen=True)
class TeachingHierarchy:
    """Ordered (concept subset, difficulty) levels partitioning the class."""

    levels: tuple  # tuple of (tuple_of_concepts, difficulty)

    def difficulties(self):
        return [d for _, d in self.levels]


def _guard(cclass):
    if cclass.n > MAX_DOMAIN or len(cclass) > MAX_CONCEPTS:
        raise ConfigError(
            f"class too large for brute force (n={cclass.n} > {MAX_DOMAIN} "
            f"or |C|={len(cclass)} > {MAX_CONCEPTS})")


def _td(concept, concepts, n):
    """Smallest example set on which every other concept disagrees somewhere."""
    others = [c for c in concepts if c != concept]
    if not others:
        return 0
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            if all(any(concept[x] != other[x] for x in subset) for other in others):
                return size
    raise ConfigError("distinct concepts must be distinguishable")  # unreachable


def teaching_dimension(concept, cclass):
    """Size of the smallest teaching set of ``concept`` within the class."""
    _guard(cclass)
    concept = tuple(concept)
    if concept not in cclass.concepts:
        raise ValueError(f"concept {concept} not in the class")
    return _td(concept, list(cclass.concepts), cclass.n)


def teaching_hierarchy(cclass):
    """Iteratively extract all minimum-TD concepts of the remaining class."""
    _guard(cclass)
    if len(cclass) == 0:
        raise ConfigError("empty concept class")
    remaining = list(cclass.concepts)
    levels = []
    while remaining:
        tds = {c: _td(c, remaining, cclass.n) for c in remaining}
        d = min(tds.values())
        easiest = tuple(c for c in remaining if tds[c] == d)
        levels.append((easiest, d))
        remaining = [c for c in remaining if tds[c] != d]
    return TeachingHierarchy(levels=tuple(levels))


def rtd(cclass):
    """Max difficulty across the teaching hierarchy."""
    return max(teaching_hierarchy(cclass).difficulties())


def concept_class_from_instances(instances, vocab_size):
    """View a candidate list as a concept class over the attribute domain."""
    return ConceptClass(
        n=vocab_size,
        concepts=tuple(tuple(int(v) for v in inst.multi_hot(vocab_size)) for inst in instances),
    )


def game_levels(candidates):
    """Level-k labels for every candidate of a game.

    A candidate is uniquely identifiable when one of its attributes appears
    in no other remaining candidate. All such candidates get the current
    level and are removed; the process repeats. Candidates that never gain
    a unique identifier while others remain are labeled
    GAME_LEVEL_UNREACHABLE (no single positive message can separate them).
    """
    attr_sets = [frozenset(c) if not hasattr(c, "attrs") else frozenset(c.attrs)
                 for c in candidates]
    if len(set(attr_sets)) != len(attr_sets):
        raise ValueError("duplicate candidates have no level labeling")
    levels = [GAME_LEVEL_UNREACHABLE] * len(attr_sets)
    remaining = set(range(len(attr_sets)))
    level = 0
    while remaining:
        identifiable = []
        for i in remaining:
            others = set().union(*(attr_sets[j] for j in remaining if j != i)) \
                if len(remaining) > 1 else set()
            if attr_sets[i] - others:
                identifiable.append(i)
        if not identifiable:
            break
        for i in identifiable:
            levels[i] = level
        remaining -= set(identifiable)
        level += 1
    return levels


def unique_identifiers(candidates, index):
    """Attributes of candidate ``index`` shared by no other candidate."""
    attr_sets = [frozenset(c) if not hasattr(c, "attrs") else frozenset(c.attrs)
                 for c in candidates]
    others = set().union(*(s for j, s in enumerate(attr_sets) if j != index)) \
        if len(attr_sets) > 1 else set()
    return sorted(attr_sets[index] - others)


def read_concept_class(path):
    """Parse a concept-class file: one binary vector per line, e.g. '1010'."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip().replace(",", " ")
            if not line:
                continue
            bits = line.split() if " " in line else list(line)
            try:
                rows.append(tuple(int(b) for b in bits))
            except ValueError as exc:
                raise ConfigError(f"line {line_no}: not a binary vector") from exc
            if any(v not in (0, 1) for v in rows[-1]):
                raise ConfigError(f"line {line_no}: entries must be 0/1")
    if not rows:
        raise ConfigError("concept-class file is empty")
    n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise ConfigError("concept vectors have inconsistent lengths")
    return ConceptClass(n=n, concepts=tuple(rows))

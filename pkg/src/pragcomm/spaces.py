"""Instance spaces for referential games.

Two kinds are supported: "number-set" (every nonempty subset of a symbol
vocabulary up to a size cap) and "object-attributes" (exactly one attribute
per category, e.g. 6 colors x 6 shapes x 2 sizes x 4 locations = 288
objects encoded as length-18 multi-hot vectors).
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

NUMBER_SET = "number-set"
OBJECT_ATTRIBUTES = "object-attributes"


@dataclass(frozen=True)
class Instance:
    """One referent: an immutable set of attribute ids."""

    attrs: tuple

    def __post_init__(self):
        if len(self.attrs) == 0:
            raise ConfigError("instance must carry at least one attribute")
        if tuple(sorted(set(self.attrs))) != self.attrs:
            object.__setattr__(self, "attrs", tuple(sorted(set(self.attrs))))

    def multi_hot(self, vocab_size):
        v = np.zeros(vocab_size)
        v[list(self.attrs)] = 1.0
        return v

    def has(self, attr):
        return attr in self.attrs


@dataclass(frozen=True)
class InstanceSpace:
    """Configuration of an instance universe; instances enumerate lazily."""

    kind: str
    vocab_size: int = 0
    max_attrs: int = 0
    category_sizes: tuple = ()
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @staticmethod
    def number_set(vocab_size, max_attrs):
        if max_attrs > vocab_size:
            raise ConfigError(
                f"max_attrs {max_attrs} exceeds vocabulary size {vocab_size}")
        if vocab_size < 1 or max_attrs < 1:
            raise ConfigError("vocab_size and max_attrs must be positive")
        return InstanceSpace(kind=NUMBER_SET, vocab_size=vocab_size, max_attrs=max_attrs)

    @staticmethod
    def object_attributes(category_sizes):
        sizes = tuple(int(s) for s in category_sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ConfigError(f"bad category sizes {sizes}")
        return InstanceSpace(kind=OBJECT_ATTRIBUTES,
                             vocab_size=sum(sizes), category_sizes=sizes)

    @property
    def message_count(self):
        """Message space size: one symbol per attribute."""
        return self.vocab_size

    def category_blocks(self):
        """(start, end) attribute-id ranges per category (object spaces only)."""
        blocks, start = [], 0
        for s in self.category_sizes:
            blocks.append((start, start + s))
            start += s
        return blocks

    def instances(self):
        """All instances in deterministic lexicographic order, cached."""
        if "instances" not in self._cache:
            self._cache["instances"] = tuple(self._enumerate())
        return self._cache["instances"]

    def _enumerate(self):
        if self.kind == NUMBER_SET:
            combos = []
            for size in range(1, self.max_attrs + 1):
                combos.extend(itertools.combinations(range(self.vocab_size), size))
            combos.sort()
            return [Instance(c) for c in combos]
        if self.kind == OBJECT_ATTRIBUTES:
            blocks = self.category_blocks()
            out = []
            for picks in itertools.product(*[range(s, e) for s, e in blocks]):
                out.append(Instance(tuple(picks)))
            return out
        raise ConfigError(f"unknown space kind {self.kind!r}")

    def __len__(self):
        return len(self.instances())

    def validate_instance(self, inst):
        if any(a < 0 or a >= self.vocab_size for a in inst.attrs):
            raise ConfigError(f"attribute out of range in {inst.attrs}")
        if self.kind == NUMBER_SET:
            if len(inst.attrs) > self.max_attrs:
                raise ConfigError(f"instance {inst.attrs} exceeds max_attrs")
        else:
            for start, end in self.category_blocks():
                hits = sum(1 for a in inst.attrs if start <= a < end)
                if hits != 1:
                    raise ConfigError(
                        f"instance {inst.attrs} must pick exactly one of [{start},{end})")


def enumerate_space(space):
    """All instances of a space, lexicographic and duplicate-free."""
    return list(space.instances())


def sample_attribute_bijection(space, rng):
    """Random attribute relabeling valid for the space.

    Number-set spaces permute the whole vocabulary; object spaces permute
    within each category block so relabeled instances stay well-formed.
    """
    v = space.vocab_size
    sigma = np.arange(v)
    if space.kind == NUMBER_SET:
        sigma = rng.permutation(v)
    else:
        for start, end in space.category_blocks():
            sigma[start:end] = start + rng.permutation(end - start)
    return sigma


def validate_bijection(space, sigma):
    sigma = np.asarray(sigma)
    if sorted(sigma.tolist()) != list(range(space.vocab_size)):
        raise ConfigError("attribute mapping is not a bijection on the vocabulary")
    if space.kind == OBJECT_ATTRIBUTES:
        for start, end in space.category_blocks():
            if not all(start <= sigma[a] < end for a in range(start, end)):
                raise ConfigError(
                    f"attribute mapping crosses category block [{start},{end})")
    return sigma

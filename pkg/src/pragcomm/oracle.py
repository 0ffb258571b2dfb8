"""Exact literal-protocol baseline pair.

The oracle teacher scores each message by the exact literal posterior mass
it puts on the target and sends the best one; the oracle student takes the
argmax of the exact literal posterior and never waits. Both are
deterministic (first-index tie-break), which combined with the uniform
presentation orders keeps the baseline unbiased.
"""

import numpy as np

from .beliefs import CONSISTENCY_FLOOR, literal_posteriors_all, literal_update


class LiteralOracleTeacher:
    """Argmax-informativeness speaker under the exact literal listener."""

    vocab_size = None  # accepts any game vocabulary

    def __init__(self, floor=CONSISTENCY_FLOOR):
        self.floor = floor

    def q_values_all(self, candidates, target_slot, belief, params=None):
        posts = literal_posteriors_all(candidates, belief, floor=self.floor)
        return posts[target_slot, :].copy()

    def select_message(self, candidates, target_slot, belief, rng=None, greedy=True):
        return int(np.argmax(self.q_values_all(candidates, target_slot, belief)))

    def update_estimate(self, candidates, belief, message):
        return literal_update(candidates, belief, message, floor=self.floor)


class LiteralOracleStudent:
    """Exact literal listener; always answers, never waits."""

    vocab_size = None

    def __init__(self, floor=CONSISTENCY_FLOOR):
        self.floor = floor

    def update_belief(self, candidates, prior, message):
        return literal_update(candidates, prior, message, floor=self.floor)

    def policy_from_belief(self, belief):
        belief = np.asarray(belief)
        dist = np.zeros(belief.size + 1)
        dist[:belief.size] = belief
        return dist

    def act(self, belief, rng=None, greedy=True):
        return int(np.argmax(np.asarray(belief)))


def oracle_pair():
    """Convenience constructor for the baseline (teacher, student) pair."""
    from .trainer import ProtocolPair

    return ProtocolPair(teacher=LiteralOracleTeacher(), student=LiteralOracleStudent())

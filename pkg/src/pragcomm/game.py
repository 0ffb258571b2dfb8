"""Referential game state machine.

A game presents K distinct candidate instances to a teacher and a student,
each through a private presentation order so no positional protocol can
form. The teacher knows the target; the student picks a candidate or waits.
Every message costs ``message_cost`` and a correct pick pays 1.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ProtocolError
from .spaces import Instance, validate_bijection

WAIT = -1  # student action: request another message


@dataclass(frozen=True)
class Game:
    """One sampled referential game (immutable)."""

    instances: tuple                 # K distinct Instances, canonical order
    target_index: int                # index into instances
    teacher_perm: tuple              # teacher sees instances[teacher_perm[j]] at slot j
    student_perm: tuple              # student sees instances[student_perm[j]] at slot j
    vocab_size: int
    message_cost: float = 0.1
    max_rounds: int = 1

    def __post_init__(self):
        k = len(self.instances)
        if len(set(self.instances)) != k:
            raise ConfigError("candidates must be pairwise distinct")
        if not 0 <= self.target_index < k:
            raise ConfigError(f"target index {self.target_index} out of range")
        for perm in (self.teacher_perm, self.student_perm):
            if sorted(perm) != list(range(k)):
                raise ConfigError(f"{perm} is not a permutation of 0..{k - 1}")
        if self.max_rounds < 1:
            raise ConfigError("max_rounds must be >= 1")

    @property
    def k(self):
        return len(self.instances)

    def matrix(self):
        """K x V multi-hot matrix in canonical candidate order."""
        return np.stack([inst.multi_hot(self.vocab_size) for inst in self.instances])

    def view_matrix(self, perm):
        return self.matrix()[list(perm), :]

    def teacher_view(self):
        """(candidate matrix, target slot) as the teacher sees them."""
        slot = self.teacher_perm.index(self.target_index)
        return self.view_matrix(self.teacher_perm), slot

    def student_view(self):
        return self.view_matrix(self.student_perm)

    def student_slot_to_canonical(self, slot):
        return self.student_perm[slot]

    def belief_student_to_teacher(self, belief_student):
        """Re-index a student-view belief into the teacher's view."""
        k = self.k
        canonical = np.empty(k)
        canonical[list(self.student_perm)] = belief_student
        return canonical[list(self.teacher_perm)]


@dataclass
class EpisodeState:
    """Mutable per-episode record kept by the engine."""

    game: Game
    round: int = 0
    messages: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    student_belief: np.ndarray = None
    teacher_estimate: np.ndarray = None
    terminal: bool = False
    gain: float = 0.0

    def __post_init__(self):
        k = self.game.k
        if self.student_belief is None:
            self.student_belief = np.full(k, 1.0 / k)
        if self.teacher_estimate is None:
            self.teacher_estimate = np.full(k, 1.0 / k)


def step(state, message, action):
    """Advance one round: teacher sent ``message``, student answered ``action``.

    ``action`` is a student-view slot in 0..K-1, or WAIT. Returns the reward;
    the state is updated in place. The episode terminates on any non-WAIT
    action or once the round budget is spent.
    """
    game = state.game
    if state.terminal:
        raise ProtocolError("step() on a terminal episode")
    if not 0 <= message < game.vocab_size:
        raise ProtocolError(f"message {message} outside the message space")
    if action != WAIT and not 0 <= action < game.k:
        raise ProtocolError(f"action {action} invalid for K={game.k}")

    state.round += 1
    state.messages.append(message)
    state.actions.append(action)

    reward = -game.message_cost
    if action != WAIT:
        canonical = game.student_slot_to_canonical(action)
        if canonical == game.target_index:
            reward += 1.0
        state.terminal = True
    elif state.round >= game.max_rounds:
        state.terminal = True

    state.rewards.append(reward)
    state.gain += reward
    return reward


def total_gain(state):
    """Accumulated gain of a finished episode."""
    if not state.terminal:
        raise ProtocolError("total_gain() on a non-terminal episode")
    return state.gain


def sample_game(space, k, rng, message_cost=0.1, max_rounds=1):
    """Uniformly sample K distinct candidates, a target, and both presentation orders."""
    universe = space.instances()
    if k > len(universe):
        raise ConfigError(f"K={k} exceeds the {len(universe)}-instance space")
    picks = rng.choice(len(universe), size=k, replace=False)
    return Game(
        instances=tuple(universe[i] for i in picks),
        target_index=int(rng.integers(k)),
        teacher_perm=tuple(int(i) for i in rng.permutation(k)),
        student_perm=tuple(int(i) for i in rng.permutation(k)),
        vocab_size=space.vocab_size,
        message_cost=message_cost,
        max_rounds=max_rounds,
    )


def apply_equivalence(game, sigma, space=None):
    """Relabel every candidate's attributes by the bijection sigma.

    Target index and presentation orders are untouched; messages relayed to
    the student must be relabeled with the same sigma (see map_message).
    """
    sigma = np.asarray(sigma)
    if space is not None:
        validate_bijection(space, sigma)
    elif sorted(sigma.tolist()) != list(range(game.vocab_size)):
        raise ConfigError("attribute mapping is not a bijection on the vocabulary")
    mapped = tuple(
        Instance(tuple(sorted(int(sigma[a]) for a in inst.attrs)))
        for inst in game.instances
    )
    return Game(
        instances=mapped,
        target_index=game.target_index,
        teacher_perm=game.teacher_perm,
        student_perm=game.student_perm,
        vocab_size=game.vocab_size,
        message_cost=game.message_cost,
        max_rounds=game.max_rounds,
    )


def map_message(message, sigma):
    return int(np.asarray(sigma)[message])

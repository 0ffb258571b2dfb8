import numpy as np
import pytest

from pragcomm.spaces import Instance, InstanceSpace


@pytest.fixture(scope="session")
def number_space():
    return InstanceSpace.number_set(10, 4)


@pytest.fixture(scope="session")
def object_space():
    return InstanceSpace.object_attributes((6, 6, 2, 4))


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


def make_game(candidate_attrs, target=0, vocab=10, teacher_perm=None,
              student_perm=None, cost=0.1, rounds=1):
    from pragcomm.game import Game

    k = len(candidate_attrs)
    return Game(
        instances=tuple(Instance(tuple(a)) for a in candidate_attrs),
        target_index=target,
        teacher_perm=tuple(teacher_perm) if teacher_perm else tuple(range(k)),
        student_perm=tuple(student_perm) if student_perm else tuple(range(k)),
        vocab_size=vocab,
        message_cost=cost,
        max_rounds=rounds,
    )


# the candidate list used throughout: unique identifiers 9 and 5 at level 0,
# then 1/4 and 3 become unique once those are removed
EXAMPLE_SETS = [(1, 2, 3, 9), (1, 2, 4), (2, 3), (3, 4, 5)]

# three objects over attributes [blue, red, sphere, cone]
TRIO_VOCAB = 4
TRIO = {
    "blue sphere": (0, 2),
    "red sphere": (1, 2),
    "blue cone": (0, 3),
}


@pytest.fixture()
def example_game():
    return make_game(EXAMPLE_SETS, target=0)


@pytest.fixture()
def trio_game():
    return make_game(list(TRIO.values()), target=0, vocab=TRIO_VOCAB)

"""Game dataset persistence: line-delimited JSON, one game per record.

Train/test splits must be mutually exclusive at the level of unordered
candidate sets; the fingerprint tools here enforce and audit that.
"""

import json

from ..errors import DataError
from ..game import Game
from ..spaces import Instance


def candidate_fingerprint(game_or_instances):
    """Order-free identity of a candidate set."""
    instances = getattr(game_or_instances, "instances", game_or_instances)
    return tuple(sorted(inst.attrs for inst in instances))


def game_to_record(game, seed=None, index=None):
    record = {
        "candidates": [list(inst.attrs) for inst in game.instances],
        "target": game.target_index,
        "teacher_perm": list(game.teacher_perm),
        "student_perm": list(game.student_perm),
    }
    if seed is not None:
        record["seed"] = seed
    if index is not None:
        record["index"] = index
    return record


def record_to_game(record, space, message_cost=0.1, max_rounds=1):
    instances = tuple(Instance(tuple(attrs)) for attrs in record["candidates"])
    for inst in instances:
        space.validate_instance(inst)
    return Game(
        instances=instances,
        target_index=int(record["target"]),
        teacher_perm=tuple(record["teacher_perm"]),
        student_perm=tuple(record["student_perm"]),
        vocab_size=space.vocab_size,
        message_cost=message_cost,
        max_rounds=max_rounds,
    )


def write_games(path, games, seed=None):
    with open(path, "w", encoding="utf-8") as fh:
        for i, game in enumerate(games):
            fh.write(json.dumps(game_to_record(game, seed=seed, index=i),
                                sort_keys=True))
            fh.write("\n")


def read_games(path, space, message_cost=0.1, max_rounds=1):
    games = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read dataset {path}: {exc}") from exc
    with fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                games.append(record_to_game(record, space,
                                            message_cost=message_cost,
                                            max_rounds=max_rounds))
            except DataError:
                raise
            except Exception as exc:
                raise DataError(f"{path}:{line_no}: malformed game record ({exc})") from exc
    if not games:
        raise DataError(f"{path}: dataset is empty")
    return games


def check_exclusive(games_a, games_b):
    """Shared unordered candidate sets between two game lists (empty = exclusive)."""
    seen = {candidate_fingerprint(g) for g in games_a}
    return sorted({fp for fp in (candidate_fingerprint(g) for g in games_b) if fp in seen})


def _sample_distinct(rng, pool_size, k):
    return rng.choice(pool_size, size=k, replace=False)


def generate_datasets(space, k, train_count, test_count, novel_count,
                      instance_holdout, seed, message_cost=0.1, max_rounds=1):
    """Sample mutually exclusive train/test games plus a novel-target set.

    A fraction of instances is held out of the training pool entirely; the
    novel set draws its targets from those held-out instances (distractors
    may come from anywhere), which guarantees exclusivity from the training
    games by construction.
    """
    rng = _DatasetRng(seed)
    universe = space.instances()
    n = len(universe)
    order = rng.rng.permutation(n)
    holdout_n = int(round(instance_holdout * n))
    heldout_ids = sorted(int(i) for i in order[:holdout_n])
    train_pool = sorted(int(i) for i in order[holdout_n:])
    if len(train_pool) < k:
        raise DataError("training instance pool smaller than the candidate count")

    def build_game(instance_ids):
        target_slot = int(rng.rng.integers(k))
        return Game(
            instances=tuple(universe[i] for i in instance_ids),
            target_index=target_slot,
            teacher_perm=tuple(int(i) for i in rng.rng.permutation(k)),
            student_perm=tuple(int(i) for i in rng.rng.permutation(k)),
            vocab_size=space.vocab_size,
            message_cost=message_cost,
            max_rounds=max_rounds,
        )

    used = set()

    def sample_unique(count, pool, forced_target=None):
        games = []
        attempts = 0
        limit = 200 * count + 1000
        while len(games) < count:
            attempts += 1
            if attempts > limit:
                raise DataError(
                    f"could not sample {count} exclusive games (pool too small?)")
            if forced_target is None:
                ids = [pool[i] for i in _sample_distinct(rng.rng, len(pool), k)]
                game = build_game(ids)
            else:
                target_id = forced_target[int(rng.rng.integers(len(forced_target)))]
                others = [i for i in pool if i != target_id]
                ids = [others[i] for i in _sample_distinct(rng.rng, len(others), k - 1)]
                slot = int(rng.rng.integers(k))
                ids.insert(slot, target_id)
                game = Game(
                    instances=tuple(universe[i] for i in ids),
                    target_index=slot,
                    teacher_perm=tuple(int(i) for i in rng.rng.permutation(k)),
                    student_perm=tuple(int(i) for i in rng.rng.permutation(k)),
                    vocab_size=space.vocab_size,
                    message_cost=message_cost,
                    max_rounds=max_rounds,
                )
            fp = candidate_fingerprint(game)
            if fp in used:
                continue
            used.add(fp)
            games.append(game)
        return games

    train = sample_unique(train_count, train_pool)
    test = sample_unique(test_count, list(range(n)))
    novel = sample_unique(novel_count, list(range(n)), forced_target=heldout_ids) \
        if novel_count > 0 else []
    return {
        "train": train,
        "test": test,
        "novel": novel,
        "heldout_instance_ids": heldout_ids,
    }


class _DatasetRng:
    """Single sequential generator so dataset generation is seed-reproducible."""

    def __init__(self, seed):
        import numpy as np

        self.rng = np.random.default_rng((seed, 17))

"""Measurement battery for a trained (or baseline) protocol pair.

Covers overall and level-stratified accuracy, a hard-game slice ranked by
target/distractor cosine similarity, protocol stability under attribute
relabelings, message validity on novel targets, and the message/distractor
covariance analysis.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .game import Game
from .rtd import GAME_LEVEL_UNREACHABLE, game_levels
from .spaces import sample_attribute_bijection
from .trainer import run_episode


def level_key(level):
    return "inf" if level == GAME_LEVEL_UNREACHABLE else str(level)


def cosine_difficulty(game):
    """Mean cosine similarity between the target and each distractor."""
    mat = game.matrix()
    target = mat[game.target_index]
    tnorm = np.linalg.norm(target)
    sims = []
    for i, row in enumerate(mat):
        if i == game.target_index:
            continue
        denom = tnorm * np.linalg.norm(row)
        sims.append(float(row @ target / denom) if denom > 0 else 0.0)
    return float(np.mean(sims))


@dataclass
class EvalReport:
    """Aggregate rates plus optional per-game audit rows."""

    games: int
    accuracy: float
    level_accuracy: dict
    level_counts: dict
    hard_accuracy: float
    hard_games: int
    mean_gain: float
    validity: float
    seed: int = 0
    per_game: list = field(default_factory=list)

    def to_dict(self):
        return {
            "games": self.games,
            "accuracy": self.accuracy,
            "level_accuracy": self.level_accuracy,
            "level_counts": self.level_counts,
            "hard_accuracy": self.hard_accuracy,
            "hard_games": self.hard_games,
            "mean_gain": self.mean_gain,
            "validity": self.validity,
            "seed": self.seed,
        }


def evaluate(pair, games, stochastic=False, seed=0, keep_per_game=False):
    """Play every game in evaluation mode and aggregate the report.

    stochastic=True replays the training-time sampling policies with a
    seeded generator; the default is the greedy (argmax) protocol.
    """
    if not games:
        raise ValueError("evaluate() needs at least one game")
    rng = np.random.default_rng(seed) if stochastic else None
    mode = "train" if stochastic else "eval"
    rows = []
    for index, game in enumerate(games):
        result = run_episode(pair, game, mode, rng) if stochastic \
            else run_episode(pair, game, "eval", None)
        rows.append({
            "index": index,
            "level": game_levels(game.instances)[game.target_index],
            "correct": int(result.correct),
            "valid": int(result.first_message_valid),
            "gain": result.state.gain,
            "difficulty": cosine_difficulty(game),
            "message": result.first_message,
        })

    by_level = {}
    for row in rows:
        bucket = by_level.setdefault(level_key(row["level"]), [0, 0])
        bucket[0] += row["correct"]
        bucket[1] += 1
    hard_count = max(1, math.ceil(0.1 * len(rows)))
    hard = sorted(rows, key=lambda r: (-r["difficulty"], r["index"]))[:hard_count]
    report = EvalReport(
        games=len(rows),
        accuracy=sum(r["correct"] for r in rows) / len(rows),
        level_accuracy={k: hits / n for k, (hits, n) in sorted(by_level.items())},
        level_counts={k: n for k, (_h, n) in sorted(by_level.items())},
        hard_accuracy=sum(r["correct"] for r in hard) / len(hard),
        hard_games=len(hard),
        mean_gain=sum(r["gain"] for r in rows) / len(rows),
        validity=sum(r["valid"] for r in rows) / len(rows),
        seed=seed,
        per_game=rows if keep_per_game else [],
    )
    return report


def stability_eval(pair, games, space, rng, sigma_sampler=None):
    """Accuracy with and without a per-game attribute relabeling on the student side.

    The teacher always plays the original game; the student sees candidates
    and message relabeled by a fresh bijection drawn per game. Returns
    (mapped accuracy, unmapped accuracy).
    """
    if not games:
        raise ValueError("stability_eval() needs at least one game")
    sampler = sigma_sampler or (lambda r: sample_attribute_bijection(space, r))
    mapped_hits = 0
    plain_hits = 0
    for game in games:
        sigma = sampler(rng)
        plain_hits += run_episode(pair, game, "eval", None).correct
        mapped_hits += run_episode(pair, game, "eval", None, student_sigma=sigma).correct
    return mapped_hits / len(games), plain_hits / len(games)


def validity_eval(pair, games):
    """Fraction of games whose first message names an attribute of the target."""
    if not games:
        raise ValueError("validity_eval() needs at least one game")
    hits = 0
    for game in games:
        hits += run_episode(pair, game, "eval", None).first_message_valid
    return hits / len(games)


@dataclass
class CovarianceMatrix:
    """Cross-covariance between sent messages and distractor attributes."""

    matrix: np.ndarray      # V x V: rows = messages, cols = distractor attributes
    targets: int
    games_per_target: int

    def mean_diagonal(self):
        return float(np.mean(np.diag(self.matrix)))


def covariance_analysis(pair, targets, games_per_target, k, space, rng,
                        message_cost=0.1, max_rounds=1):
    """Same target, fresh distractors: how do sent messages co-vary with
    which attributes show up among the distractors?

    For every game we record the message one-hot u and the binary
    distractor-attribute presence x, estimate cov(u, x) over the
    games_per_target draws, and average the matrices over targets.
    """
    if games_per_target < 2:
        raise ConfigError("need at least 2 games per target to estimate covariance")
    universe = space.instances()
    v = space.vocab_size
    total = np.zeros((v, v))
    for target in targets:
        others = [i for i, inst in enumerate(universe) if inst != target]
        u_rows = np.zeros((games_per_target, v))
        x_rows = np.zeros((games_per_target, v))
        for g in range(games_per_target):
            picks = rng.choice(len(others), size=k - 1, replace=False)
            distractors = [universe[others[i]] for i in picks]
            slot = int(rng.integers(k))
            instances = distractors[:slot] + [target] + distractors[slot:]
            game = Game(
                instances=tuple(instances),
                target_index=slot,
                teacher_perm=tuple(int(i) for i in rng.permutation(k)),
                student_perm=tuple(int(i) for i in rng.permutation(k)),
                vocab_size=v,
                message_cost=message_cost,
                max_rounds=max_rounds,
            )
            cands, target_slot = game.teacher_view()
            prior = np.full(k, 1.0 / k)
            message = pair.teacher.select_message(cands, target_slot, prior,
                                                  rng, greedy=True)
            u_rows[g, message] = 1.0
            for inst in distractors:
                x_rows[g, list(inst.attrs)] = 1.0
        mu_u = u_rows.mean(axis=0)
        mu_x = x_rows.mean(axis=0)
        total += u_rows.T @ x_rows / games_per_target - np.outer(mu_u, mu_x)
    return CovarianceMatrix(matrix=total / len(targets), targets=len(targets),
                            games_per_target=games_per_target)

"""Alternating-phase training loop.

Each phase trains the teacher for a fixed student (Q-learning plus the
obverter loss, fed from a replay buffer that is reset when the split
starts), then the student for the fixed teacher (REINFORCE on fresh
trajectories). During training the student's belief is echoed back to the
teacher after every message; in evaluation the teacher relies on her own
belief updater and the student's belief never crosses over.
"""

from dataclasses import dataclass

import numpy as np

from .beliefs import pretrain_bayesian, uniform_belief
from .errors import ConfigError
from .game import WAIT, EpisodeState, apply_equivalence, map_message, step
from .rtd import game_levels
from .student import EpisodeStepRecord, StudentModel
from .teacher import ReplayBuffer, TeacherModel, Transition


@dataclass
class ProtocolPair:
    """A teacher/student pairing; training mode controls belief feedback."""

    teacher: object
    student: object


@dataclass
class EpisodeResult:
    """Everything one episode produced, routed by the caller."""

    state: EpisodeState
    transitions: list
    records: list
    correct: bool
    first_message: int
    first_message_valid: bool


def _check_vocab(pair, game):
    for agent in (pair.teacher, pair.student):
        vocab = getattr(agent, "vocab_size", None)
        if vocab is not None and vocab != game.vocab_size:
            raise ConfigError(
                f"agent vocabulary {vocab} != game vocabulary {game.vocab_size}")


def run_episode(pair, game, mode, rng, student_sigma=None):
    """Play one game. mode is 'train' (belief feedback, stochastic policies)
    or 'eval' (no feedback, greedy policies).

    student_sigma optionally relabels candidates and messages on the
    student's side only, for the protocol-stability probe.
    """
    if mode not in ("train", "eval"):
        raise ConfigError(f"unknown episode mode {mode!r}")
    _check_vocab(pair, game)
    train = mode == "train"
    k = game.k

    teacher_cands, target_slot = game.teacher_view()
    student_game = game if student_sigma is None else apply_equivalence(game, student_sigma)
    student_cands = student_game.student_view()

    belief_student = uniform_belief(k)
    estimate = uniform_belief(k)
    state = EpisodeState(game)
    transitions, records = [], []
    first_message = None

    while not state.terminal:
        prior_estimate = estimate.copy()
        prior_student = belief_student.copy()

        message = pair.teacher.select_message(
            teacher_cands, target_slot, estimate, rng, greedy=not train)
        if first_message is None:
            first_message = message
        heard = message if student_sigma is None else map_message(message, student_sigma)

        belief_student = pair.student.update_belief(student_cands, belief_student, heard)
        action_idx = pair.student.act(belief_student, rng, greedy=not train)
        action = WAIT if action_idx == k else action_idx
        reward = step(state, message, action)

        if train:
            estimate = game.belief_student_to_teacher(belief_student)
        else:
            estimate = pair.teacher.update_estimate(teacher_cands, estimate, message)

        state.student_belief = belief_student.copy()
        state.teacher_estimate = estimate.copy()

        if train:
            transitions.append(Transition(
                candidates=teacher_cands,
                target_slot=target_slot,
                prior_estimate=prior_estimate,
                message=message,
                next_belief=estimate.copy(),
                reward=reward,
                terminal=state.terminal,
            ))
            records.append(EpisodeStepRecord(
                candidates=student_cands,
                prior=prior_student,
                message=heard,
                action=action_idx,
                reward=reward,
            ))

    last_action = state.actions[-1]
    correct = last_action != WAIT and \
        game.student_slot_to_canonical(last_action) == game.target_index
    target_instance = game.instances[game.target_index]
    return EpisodeResult(
        state=state,
        transitions=transitions,
        records=records,
        correct=correct,
        first_message=first_message,
        first_message_valid=target_instance.has(first_message),
    )


@dataclass
class TrainConfig:
    """All knobs of the adaptive training schedule."""

    phases: int = 3
    iterations_per_phase: int = 20000
    teacher_split: int = 10000      # student split = iterations_per_phase - teacher_split
    k: int = 4
    message_cost: float = 0.1
    max_rounds: int = 1
    beta: float = 5.0
    gamma: float = 0.9
    obverter_weight: float = 1.0
    learning_rate: float = 0.05
    batch_size: int = 64
    buffer_capacity: int = 50000
    sync_interval: int = 500
    eval_cadence: int = 1000
    eval_game_count: int = 2000
    log_cadence: int = 100
    seed: int = 0
    momentum: float = 0.0
    pretrain: bool = True
    pretrain_steps: int = 20000
    pretrain_lr: float = 1.0
    pretrain_batch: int = 32
    pretrain_momentum: float = 0.0
    pretrain_holdout: int = 1000
    hidden: int = 64
    blocks: int = 2
    q_hidden: int = 64

    def __post_init__(self):
        if self.phases < 0 or self.iterations_per_phase < 1:
            raise ConfigError("phase counts must be positive")
        if not 0 <= self.teacher_split <= self.iterations_per_phase:
            raise ConfigError("teacher split must fit within the phase")
        if self.batch_size < 1 or self.buffer_capacity < self.batch_size:
            raise ConfigError("buffer must hold at least one batch")

    @property
    def student_split(self):
        return self.iterations_per_phase - self.teacher_split


def build_pair(config, space, seed=None):
    """Fresh (un-pretrained) teacher/student pair for a space."""
    seed = config.seed if seed is None else seed
    teacher = TeacherModel(
        space.vocab_size, space.message_count,
        np.random.default_rng((seed, 1)),
        hidden=config.hidden, blocks=config.blocks, q_hidden=config.q_hidden,
        beta=config.beta, gamma=config.gamma, obverter_weight=config.obverter_weight)
    student = StudentModel(
        space.vocab_size, space.message_count, config.k,
        np.random.default_rng((seed, 2)),
        hidden=config.hidden, blocks=config.blocks)
    return ProtocolPair(teacher=teacher, student=student)


def pretrain_pair(pair, config, space, metrics=None):
    """Ground both belief updaters in the exact Bayesian literal update."""
    reports = {}
    for name, net, seed_tag in (("teacher", pair.teacher.belief_net, 11),
                                ("student", pair.student.belief_net, 12)):
        report = pretrain_bayesian(
            net, space, config.pretrain_steps, config.pretrain_lr,
            k=config.k, batch=config.pretrain_batch,
            momentum=config.pretrain_momentum,
            holdout_pairs=config.pretrain_holdout,
            seed=(config.seed, seed_tag))
        reports[name] = report
        if metrics is not None:
            metrics({"kind": "pretrain", "agent": name,
                     "steps": report["steps"], "holdout_l1": report["holdout_l1"]})
    pair.teacher.sync_target()
    return reports


def evaluation_snapshot(pair, games, level_labels=None):
    """Greedy-play accuracy summary used during training and by the CLI."""
    total = len(games)
    correct = 0
    valid = 0
    gain = 0.0
    by_level = {}
    for i, game in enumerate(games):
        result = run_episode(pair, game, "eval", rng=None)
        level = (level_labels[i] if level_labels is not None
                 else game_levels(game.instances)[game.target_index])
        bucket = by_level.setdefault(level, [0, 0])
        bucket[1] += 1
        if result.correct:
            correct += 1
            bucket[0] += 1
        if result.first_message_valid:
            valid += 1
        gain += result.state.gain
    return {
        "games": total,
        "accuracy": correct / total,
        "validity": valid / total,
        "mean_gain": gain / total,
        "level_accuracy": {
            str(level): hits / count for level, (hits, count) in sorted(by_level.items())
        },
        "level_counts": {
            str(level): count for level, (_h, count) in sorted(by_level.items())
        },
    }


def train(config, space, train_games, eval_games=None, metrics=None,
          checkpoint_fn=None, pair=None, resume_split=0, rng=None):
    """Run the alternating-phase schedule and return (pair, history).

    metrics: optional callable receiving one record dict per event.
    checkpoint_fn: optional callable (split_index, pair, rng) invoked at
    every split boundary (the only points where resume is exact, since the
    replay buffer is reset there).
    """
    if not train_games:
        raise ConfigError("no training games supplied")
    history = []

    def emit(record):
        history.append(record)
        if metrics is not None:
            metrics(record)

    if pair is None:
        pair = build_pair(config, space)
        if config.pretrain:
            pretrain_pair(pair, config, space, metrics=emit)
    if rng is None:
        rng = np.random.default_rng((config.seed, 3))

    eval_set = list(eval_games or [])[:config.eval_game_count]
    eval_levels = [game_levels(g.instances)[g.target_index] for g in eval_set]

    def eval_record(phase, split_name, iteration, global_it):
        if not eval_set:
            return
        snap = evaluation_snapshot(pair, eval_set, eval_levels)
        emit({"kind": "eval", "phase": phase, "split": split_name,
              "iteration": iteration, "global_iteration": global_it, **snap})

    def _split_iters(idx):
        return config.student_split if idx % 2 else config.teacher_split

    global_it = sum(_split_iters(s) for s in range(resume_split))
    total_splits = 2 * config.phases
    if checkpoint_fn is not None and resume_split == 0:
        checkpoint_fn(0, pair, rng)

    for split_idx in range(resume_split, total_splits):
        phase, is_student = divmod(split_idx, 2)
        split_name = "student" if is_student else "teacher"
        iters = config.student_split if is_student else config.teacher_split
        buffer = None
        if not is_student:
            buffer = ReplayBuffer(config.buffer_capacity)
        for it in range(iters):
            game = train_games[int(rng.integers(len(train_games)))]
            episode = run_episode(pair, game, "train", rng)
            record = {"kind": "train", "phase": phase, "split": split_name,
                      "iteration": it, "global_iteration": global_it,
                      "gain": episode.state.gain, "correct": int(episode.correct)}
            if is_student:
                objective = pair.student.reinforce_step(
                    [episode.records], config.learning_rate, config.gamma,
                    momentum=config.momentum)
                record["objective"] = objective
            else:
                for tr in episode.transitions:
                    buffer.add(tr)
                if len(buffer) >= config.batch_size:
                    loss_q, loss_obv = pair.teacher.train_step(
                        buffer, config.batch_size, config.learning_rate, rng,
                        momentum=config.momentum)
                    record["loss_q"] = loss_q
                    record["loss_obv"] = loss_obv
                    if pair.teacher.train_steps % config.sync_interval == 0:
                        pair.teacher.sync_target()
            if config.log_cadence and (it + 1) % config.log_cadence == 0:
                emit(record)
            if config.eval_cadence and (it + 1) % config.eval_cadence == 0 \
                    and (it + 1) < iters:
                eval_record(phase, split_name, it + 1, global_it)
            global_it += 1
        eval_record(phase, split_name, iters, global_it)
        if checkpoint_fn is not None:
            checkpoint_fn(split_idx + 1, pair, rng)
    return pair, history

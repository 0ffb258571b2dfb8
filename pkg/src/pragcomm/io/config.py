"""Flat key=value run configuration.

The format is one `key = value` pair per line, `#` comments, blank lines
ignored. Unknown keys are rejected outright so typos fail loudly instead
of silently training with defaults.
"""

import hashlib
from dataclasses import dataclass, fields

from ..errors import ConfigError
from ..spaces import InstanceSpace
from ..trainer import TrainConfig


@dataclass
class RunConfig:
    """Everything a CLI run needs: space, schedule, and file locations."""

    space_kind: str = "number-set"
    space_vocab: int = 10
    space_max_attrs: int = 4
    space_categories: tuple = (6, 6, 2, 4)

    game_candidates: int = 4
    game_message_cost: float = 0.1
    game_max_rounds: int = 1

    model_hidden: int = 64
    model_blocks: int = 2
    model_q_hidden: int = 64

    teacher_beta: float = 5.0
    teacher_gamma: float = 0.9
    teacher_obverter_weight: float = 1.0
    teacher_batch_size: int = 64
    teacher_buffer_capacity: int = 50000
    teacher_sync_interval: int = 500

    train_phases: int = 3
    train_iterations_per_phase: int = 20000
    train_teacher_split: int = 10000
    train_learning_rate: float = 0.05
    train_momentum: float = 0.0
    train_eval_cadence: int = 1000
    train_eval_games: int = 2000
    train_log_cadence: int = 100
    train_seed: int = 0
    train_pretrain: bool = True

    pretrain_steps: int = 20000
    pretrain_lr: float = 1.0
    pretrain_batch: int = 32
    pretrain_momentum: float = 0.0
    pretrain_holdout: int = 1000

    data_train: str = "data/train.jsonl"
    data_test: str = "data/test.jsonl"
    data_novel: str = "data/novel.jsonl"
    data_train_count: int = 60000
    data_test_count: int = 10000
    data_novel_count: int = 2000
    data_instance_holdout: float = 0.2

    checkpoint_cadence: int = 1  # every n-th split boundary

    def to_space(self):
        if self.space_kind == "number-set":
            return InstanceSpace.number_set(self.space_vocab, self.space_max_attrs)
        if self.space_kind == "object-attributes":
            return InstanceSpace.object_attributes(self.space_categories)
        raise ConfigError(f"unknown space kind {self.space_kind!r}")

    def to_train_config(self):
        return TrainConfig(
            phases=self.train_phases,
            iterations_per_phase=self.train_iterations_per_phase,
            teacher_split=self.train_teacher_split,
            k=self.game_candidates,
            message_cost=self.game_message_cost,
            max_rounds=self.game_max_rounds,
            beta=self.teacher_beta,
            gamma=self.teacher_gamma,
            obverter_weight=self.teacher_obverter_weight,
            learning_rate=self.train_learning_rate,
            batch_size=self.teacher_batch_size,
            buffer_capacity=self.teacher_buffer_capacity,
            sync_interval=self.teacher_sync_interval,
            eval_cadence=self.train_eval_cadence,
            eval_game_count=self.train_eval_games,
            log_cadence=self.train_log_cadence,
            seed=self.train_seed,
            momentum=self.train_momentum,
            pretrain=self.train_pretrain,
            pretrain_steps=self.pretrain_steps,
            pretrain_lr=self.pretrain_lr,
            pretrain_batch=self.pretrain_batch,
            pretrain_momentum=self.pretrain_momentum,
            pretrain_holdout=self.pretrain_holdout,
            hidden=self.model_hidden,
            blocks=self.model_blocks,
            q_hidden=self.model_q_hidden,
        )

    def fingerprint(self):
        """Hash of the training-relevant keys; file locations excluded."""
        parts = []
        for f in sorted(fields(self), key=lambda f: f.name):
            key = _field_to_key(f.name)
            if key.startswith(("data.", "checkpoint.")):
                continue
            parts.append(f"{key}={getattr(self, f.name)}")
        return hashlib.sha256("\n".join(parts).encode()).hexdigest()


def _field_to_key(field_name):
    prefix, _, rest = field_name.partition("_")
    return f"{prefix}.{rest}"


def _key_to_field(key):
    return key.replace(".", "_", 1)


def _coerce(key, raw, default):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            if raw.lower() in ("true", "yes", "1", "on"):
                return True
            if raw.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(int(p) for p in raw.replace(",", " ").split())
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config_text(text, overrides=None):
    """Build a RunConfig from key=value text; unknown keys are errors."""
    defaults = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        field_name = _key_to_field(key)
        if field_name not in known:
            raise ConfigError(f"line {line_no}: unknown configuration key {key!r}")
        values[field_name] = _coerce(key, raw, getattr(defaults, field_name))
    if overrides:
        values.update(overrides)
    return RunConfig(**values)


def load_config(path, overrides=None):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, overrides=overrides)

"""Configuration, dataset, checkpoint, and metrics persistence."""

from .checkpoints import load_checkpoint, restore_pair, save_checkpoint, save_pair
from .config import RunConfig, load_config, parse_config_text
from .datasets import (
    candidate_fingerprint,
    check_exclusive,
    generate_datasets,
    read_games,
    write_games,
)
from .metrics import MetricsWriter, read_metrics, write_matrix_csv

__all__ = [
    "MetricsWriter",
    "RunConfig",
    "candidate_fingerprint",
    "check_exclusive",
    "generate_datasets",
    "load_checkpoint",
    "load_config",
    "parse_config_text",
    "read_games",
    "read_metrics",
    "restore_pair",
    "save_checkpoint",
    "save_pair",
    "write_games",
    "write_matrix_csv",
]

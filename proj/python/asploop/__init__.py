"""Python access to the asploop solver, matcher and reward."""

import json

from ._asploop import (
    ConfigError,
    DatasetError,
    choice_rule_reward,
    edit_distance,
    expected_model_count,
    has_external_solver,
    normalize_surface,
    solve,
)
from . import _asploop


def load_dataset(path):
    """Returns (instances as dicts, number of rejected records)."""
    text, rejected = _asploop.load_dataset(str(path))
    return json.loads(text), rejected


def match_rows(rows, instance, allow_exact=True):
    return _asploop.match_rows([list(map(str, r)) for r in rows], json.dumps(instance), allow_exact)


__all__ = [
    "ConfigError",
    "DatasetError",
    "choice_rule_reward",
    "edit_distance",
    "expected_model_count",
    "has_external_solver",
    "load_dataset",
    "match_rows",
    "normalize_surface",
    "solve",
]

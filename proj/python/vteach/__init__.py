"""Python access to the vteach simulation, metrics and statistics."""

import json

from . import _vteach
from ._vteach import (
    AlignmentError,
    Error,
    IncompleteData,
    InvalidArgument,
    fc_target,
    fc_target_trajectory,
    frechet_distance,
    letters,
    procrustes_align,
    similarity,
    welch_t_test,
)

__all__ = [
    "AlignmentError",
    "Error",
    "IncompleteData",
    "InvalidArgument",
    "default_config",
    "fc_target",
    "fc_target_trajectory",
    "frechet_distance",
    "letters",
    "procrustes_align",
    "reports",
    "run_experiment",
    "similarity",
    "welch_t_test",
]


def default_config(task="FC"):
    return json.loads(_vteach.default_config(task))


def run_experiment(config):
    """Runs both arms; `config` is a (possibly partial) config dict."""
    return _vteach.run_experiment(json.dumps(config))


def reports(rows, task="FC"):
    return _vteach.reports(rows, task)

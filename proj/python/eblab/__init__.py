"""Python bindings for the eblab C++ core."""

import json
from dataclasses import dataclass, field

from ._core import (  # noqa: F401
    Delta_stat,
    DiscretePrior,
    FormMismatch,
    InvalidParameter,
    MarginalModel,
    ToleranceNotMet,
    UnknownExperiment,
    __version__,
    arcsine_moment,
    bernstein_bound,
    bernstein_constant,
    delta_stat,
    experiment_names,
    hellinger_sq,
    lowerbound_instance,
    moment_gap,
    moment_gap_table,
    regret,
    regret_regularized,
    sample_mixture,
    solve_npmle,
)
from ._core import _run_experiment


@dataclass
class Report:
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)
    csv: str = ""

    def column(self, name):
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def run_experiment(name, parameters=None, seed=0, threads=1):
    """Runs one experiment in-process and returns its table and metadata."""
    cols, rows, meta, csv = _run_experiment(name, json.dumps(parameters or {}), seed, threads)
    return Report(cols, rows, json.loads(meta), csv)

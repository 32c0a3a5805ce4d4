"""scikit-learn style front end for Bell-test ensembles."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .ensemble import SimulationConfig, run_ensemble


class BellTestSimulator(BaseEstimator):
    """Monte Carlo ensemble of CHSH runs sharing (or not) one ancilla per run.

    Hyper-parameters mirror :class:`~seqbell.ensemble.SimulationConfig`, so the
    estimator works with ``get_params``/``set_params``, ``clone`` and
    parameter grids. ``fit`` ignores its inputs and runs the ensemble.

    Attributes
    ----------
    result_ : EnsembleResult
    histogram_ : Histogram
        Density of C(a',b') over runs.
    correlators_ : ndarray of shape (runs, 4)
        Per-run C(a,b), C(a,b'), C(a',b), C(a',b').
    mean_c_, std_c_, violation_probability_, mean_s_ : float
    """

    def __init__(
        self,
        n_ancilla=1,
        pairs=400,
        runs=10_000,
        mode="reused",
        schedule_mode="balanced",
        random_state=0,
        bin_width=0.02,
        trunc_eps=0.0,
        n_jobs=None,
    ):
        self.n_ancilla = n_ancilla
        self.pairs = pairs
        self.runs = runs
        self.mode = mode
        self.schedule_mode = schedule_mode
        self.random_state = random_state
        self.bin_width = bin_width
        self.trunc_eps = trunc_eps
        self.n_jobs = n_jobs

    def to_config(self) -> SimulationConfig:
        return SimulationConfig(
            n_ancilla=self.n_ancilla,
            pairs=self.pairs,
            runs=self.runs,
            mode=self.mode,
            schedule_mode=self.schedule_mode,
            master_seed=self.random_state,
            bin_width=self.bin_width,
            trunc_eps=self.trunc_eps,
        )

    def fit(self, X=None, y=None):
        result = run_ensemble(self.to_config(), n_jobs=self.n_jobs)
        self.result_ = result
        self.histogram_ = result.histogram
        self.correlators_ = result.correlators
        self.mean_c_ = result.mean_c
        self.std_c_ = result.std_c
        self.violation_probability_ = result.violation_probability
        self.mean_s_ = result.mean_s
        return self

    def transform(self, X=None):
        """Per-run correlators, one row per run."""
        check_is_fitted(self, "correlators_")
        return np.array(self.correlators_)

    def fit_transform(self, X=None, y=None):
        return self.fit(X, y).transform(X)

    def score(self, X=None, y=None):
        """Fraction of runs with C(a',b') > 0."""
        check_is_fitted(self, "violation_probability_")
        return self.violation_probability_

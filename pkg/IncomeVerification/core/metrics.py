from abc import ABC, abstractmethod

import numpy as np
import pandas as pd
from scipy import stats

from IncomeVerification.IncomeVerificationError import (
    ContractViolation, RejectedInput
)
from IncomeVerification.dataStructure import (
    Structure, Bool, UnsignedFloat, RangedInteger, Float
)
from .money import Money, to_dollars


__all__ = [
    'MetricBase', 'MeanAbsoluteError', 'MeanRelativeError',
    'MetricsReport', 'compute_metrics',
    'DatasetStats', 'dataset_stats', 'stats_table',
]


class MetricBase(ABC):
    """Base class for metrics comparing predicted and actual incomes."""

    n_metrics = 1
    bad_metrics = np.inf

    @abstractmethod
    def evaluate(self, predictions, actuals):
        pass

    def __call__(self, *args, **kwargs):
        return self.evaluate(*args, **kwargs)

    def __str__(self):
        return self.__class__.__name__


class MeanAbsoluteError(MetricBase):
    """Mean of |prediction − actual| in dollars."""

    def evaluate(self, predictions, actuals):
        return float(np.mean(np.abs(predictions - actuals)))


class MeanRelativeError(MetricBase):
    """Mean of |prediction − actual| / actual."""

    def evaluate(self, predictions, actuals):
        return float(np.mean(np.abs(predictions - actuals) / actuals))


class MetricsReport(Structure):
    """Error metrics of a set of income predictions.

    Attributes
    ----------
    mae : float
        Mean absolute error in dollars.
    mre : float
        Mean relative error.
    n : int
        Number of evaluated pairs.
    """

    mae = UnsignedFloat()
    mre = UnsignedFloat()
    n = RangedInteger(lb=1)

    _parameters = ['mae', 'mre', 'n']

    @property
    def mae_money(self):
        """Money: ``mae`` rounded to cents."""
        return Money.from_dollars(self.mae)

    def to_dict(self):
        return {'mae': self.mae, 'mre': self.mre, 'n': self.n}


def _as_array(values):
    if isinstance(values, np.ndarray):
        return values.astype(np.float64)
    return to_dollars(values)


def compute_metrics(predictions, actuals):
    """Compute MAE and MRE of predictions.

    Parameters
    ----------
    predictions : list of Money or array_like
        Predicted incomes (dollars if numeric).
    actuals : list of Money or array_like
        Actual incomes; all must be positive.

    Returns
    -------
    MetricsReport

    Raises
    ------
    ContractViolation
        If the lists are empty or differ in length.
    RejectedInput
        If an actual income is not positive.
    """
    predictions = _as_array(predictions)
    actuals = _as_array(actuals)

    if len(predictions) != len(actuals):
        raise ContractViolation(
            f"Length mismatch: {len(predictions)} predictions, {len(actuals)} actuals."
        )
    if len(actuals) == 0:
        raise ContractViolation("Cannot compute metrics of empty lists.")
    if np.any(actuals <= 0):
        raise RejectedInput("Actual incomes must be positive.")

    return MetricsReport(
        mae=MeanAbsoluteError()(predictions, actuals),
        mre=MeanRelativeError()(predictions, actuals),
        n=len(actuals),
    )


class DatasetStats(Structure):
    """Size, mean, sample standard deviation and skewness of incomes.

    Attributes
    ----------
    size : int
    mean : float
    stddev : float
        Sample standard deviation (n − 1 denominator).
    skew : float
        Biased sample skewness g1 = m3 / m2**1.5.
    is_degenerate : bool
        True if fewer than two samples; stddev and skew are then reported as 0.
    """

    size = RangedInteger(lb=1)
    mean = UnsignedFloat()
    stddev = UnsignedFloat()
    skew = Float()
    is_degenerate = Bool(default=False)

    _parameters = ['size', 'mean', 'stddev', 'skew', 'is_degenerate']

    def to_dict(self):
        return {param: getattr(self, param) for param in self._parameters}


def dataset_stats(incomes):
    """Compute summary statistics of incomes.

    Parameters
    ----------
    incomes : list of Money or array_like

    Returns
    -------
    DatasetStats

    Raises
    ------
    ContractViolation
        If incomes is empty.
    """
    x = _as_array(incomes)
    if len(x) == 0:
        raise ContractViolation("Cannot compute statistics of an empty list.")

    mean = float(np.mean(x))
    if len(x) < 2:
        return DatasetStats(
            size=1, mean=mean, stddev=0.0, skew=0.0, is_degenerate=True
        )

    stddev = float(np.std(x, ddof=1))
    if np.ptp(x) == 0:
        skew = 0.0
    else:
        skew = float(stats.skew(x, bias=True))

    return DatasetStats(size=len(x), mean=mean, stddev=stddev, skew=skew)


def stats_table(named_incomes):
    """Tabulate statistics of several datasets.

    Parameters
    ----------
    named_incomes : dict
        Mapping of dataset name to incomes.

    Returns
    -------
    pandas.DataFrame
        Columns ``Dataset, Size, Mean, Stddev, Skew``.
    """
    rows = []
    for name, incomes in named_incomes.items():
        s = dataset_stats(incomes)
        rows.append({
            'Dataset': name,
            'Size': s.size,
            'Mean': s.mean,
            'Stddev': s.stddev,
            'Skew': s.skew,
        })

    return pd.DataFrame(rows, columns=['Dataset', 'Size', 'Mean', 'Stddev', 'Skew'])

import json
from pathlib import Path

import numpy as np

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import (
    ConfigurationError, ContractViolation
)
from IncomeVerification.canon import canonicalize, default_alias_table
from IncomeVerification.extract.attributes import ATTRIBUTES, SalaryAttributes
from IncomeVerification.retrieval.industry import infer_industry


__all__ = [
    'FILL_PRIORITY', 'DEFAULT_PROFILE', 'RatioTable',
    'build_ratio_table', 'impute_attributes',
]


logger = log.get_logger('extfeat')

RATIO_FORMAT = 'ratio-table'
RATIO_VERSION = 1

FILL_PRIORITY = (
    'base_median', 'total_median', 'base_low', 'base_high', 'total_low', 'total_high',
)
"""tuple: Order in which present attributes are used as imputation anchors."""

DEFAULT_PROFILE = {
    'base_low': 0.7, 'base_median': 1.0, 'base_high': 1.4,
    'total_low': 0.75, 'total_median': 1.15, 'total_high': 1.7,
}
"""dict: Attribute levels relative to base_median, used when a corpus has no
record supporting a ratio."""


def _default_ratios():
    profile = np.array([DEFAULT_PROFILE[a] for a in ATTRIBUTES])
    return profile[:, None] / profile[None, :]


class RatioTable():
    """Mean ratios between salary attributes per industry.

    ``ratio(industry, a, b)`` estimates attribute ``a`` from an observed ``b``.
    Industries whose support for a pair is below ``min_support`` use the global
    ratio of that pair.

    Parameters
    ----------
    global_ratios : np.ndarray
        6 x 6 matrix in ``ATTRIBUTES`` order.
    industry_ratios : dict, optional
        Industry -> 6 x 6 matrix.
    industry_support : dict, optional
        Industry -> 6 x 6 matrix of supporting record counts.
    min_support : int, optional
    defaulted_pairs : list of tuple, optional
        Global (a, b) pairs filled with ``DEFAULT_PROFILE`` constants.
    """

    def __init__(
            self, global_ratios, industry_ratios=None, industry_support=None,
            min_support=5, defaulted_pairs=None):
        global_ratios = np.asarray(global_ratios, dtype=float)
        if global_ratios.shape != (len(ATTRIBUTES), len(ATTRIBUTES)):
            raise ContractViolation(
                f"Ratio matrix must be {len(ATTRIBUTES)}x{len(ATTRIBUTES)}."
            )
        if not np.all(global_ratios > 0):
            raise ContractViolation("Ratios must be positive.")

        self.global_ratios = global_ratios
        self.industry_ratios = {
            k: np.asarray(v, dtype=float) for k, v in (industry_ratios or {}).items()
        }
        self.industry_support = {
            k: np.asarray(v, dtype=int) for k, v in (industry_support or {}).items()
        }
        self.min_support = min_support
        self.defaulted_pairs = sorted(tuple(p) for p in (defaulted_pairs or []))

    @property
    def industries(self):
        return sorted(self.industry_ratios)

    @property
    def is_flagged(self):
        """bool: True if some global ratio comes from the default profile."""
        return len(self.defaulted_pairs) > 0

    def ratio(self, industry, a, b):
        """Return the ratio a / b for an industry (global row if unsupported)."""
        i, j = ATTRIBUTES.index(a), ATTRIBUTES.index(b)
        if i == j:
            return 1.0

        support = self.industry_support.get(industry)
        if support is not None and support[i, j] >= self.min_support:
            return float(self.industry_ratios[industry][i, j])

        return float(self.global_ratios[i, j])

    def to_dict(self):
        return {
            'format': RATIO_FORMAT,
            'version': RATIO_VERSION,
            'attributes': list(ATTRIBUTES),
            'min_support': self.min_support,
            'global': self.global_ratios.tolist(),
            'industries': {
                industry: {
                    'ratios': self.industry_ratios[industry].tolist(),
                    'support': self.industry_support[industry].tolist(),
                }
                for industry in self.industries
            },
            'defaulted_pairs': [list(p) for p in self.defaulted_pairs],
        }

    @classmethod
    def from_dict(cls, data):
        if data.get('format') != RATIO_FORMAT or data.get('version') != RATIO_VERSION:
            raise ConfigurationError(
                f"Unsupported ratio table format {data.get('format')!r} "
                f"version {data.get('version')!r}."
            )
        industries = data.get('industries', {})
        return cls(
            data['global'],
            {k: v['ratios'] for k, v in industries.items()},
            {k: v['support'] for k, v in industries.items()},
            min_support=data['min_support'],
            defaulted_pairs=data.get('defaulted_pairs'),
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __repr__(self):
        return (
            f'RatioTable(industries={self.industries}, '
            f'min_support={self.min_support})'
        )


def _pair_sums(arrays):
    n = len(ATTRIBUTES)
    sums = np.zeros((n, n))
    counts = np.zeros((n, n), dtype=int)
    for values in arrays:
        present = np.isfinite(values) & (values > 0)
        both = present[:, None] & present[None, :]
        ratios = np.divide(
            values[:, None], values[None, :],
            out=np.zeros((n, n)), where=both
        )
        sums += ratios
        counts += both
    return sums, counts


def build_ratio_table(records, industry_table, alias_table=None, min_support=5):
    """Compute industry-wide mean ratios between salary attributes.

    Parameters
    ----------
    records : list of SourceRecord
        Extracted corpus records; discardable records are skipped.
    industry_table : IndustryTable
    alias_table : AliasTable, optional
        Used to canonicalize record employers before the industry lookup.
    min_support : int, optional
        Records an industry needs for a pair before its own ratio is used.

    Returns
    -------
    RatioTable

    Raises
    ------
    ContractViolation
        If ``records`` is empty.
    """
    if len(records) == 0:
        raise ContractViolation("Ratio table needs a non-empty corpus.")
    alias_table = alias_table if alias_table is not None else default_alias_table()

    by_industry = {}
    all_values = []
    for record in records:
        if record.is_discardable:
            continue
        values = record.attributes.as_array()
        all_values.append(values)

        employer = record.employer
        if employer:
            employer = canonicalize(employer, 'employer', alias_table)
        industry = infer_industry(employer, industry_table)
        if industry is not None:
            by_industry.setdefault(industry, []).append(values)

    sums, counts = _pair_sums(all_values)
    global_ratios = np.divide(
        sums, counts, out=_default_ratios(), where=counts > 0
    )
    np.fill_diagonal(global_ratios, 1.0)

    defaulted = [
        (ATTRIBUTES[i], ATTRIBUTES[j])
        for i, j in zip(*np.nonzero(counts == 0)) if i != j
    ]
    if defaulted:
        logger.warning(
            f'{len(defaulted)} attribute pairs have no supporting record; '
            f'using default profile ratios.'
        )

    industry_ratios = {}
    industry_support = {}
    for industry in sorted(by_industry):
        sums, counts = _pair_sums(by_industry[industry])
        ratios = np.divide(sums, counts, out=global_ratios.copy(), where=counts > 0)
        np.fill_diagonal(ratios, 1.0)
        industry_ratios[industry] = ratios
        industry_support[industry] = counts

    logger.info(
        f'Built ratio table from {len(all_values)} records over '
        f'{len(industry_ratios)} industries.'
    )

    return RatioTable(
        global_ratios, industry_ratios, industry_support, min_support, defaulted
    )


def impute_attributes(attrs, industry, table):
    """Fill absent salary attributes from the best present one.

    Each absent attribute is the first present attribute in ``FILL_PRIORITY``
    times the corresponding industry ratio.

    Parameters
    ----------
    attrs : SalaryAttributes
    industry : str or None
        Unknown industries use the global ratios.
    table : RatioTable

    Returns
    -------
    SalaryAttributes or None
        None if no attribute is present or the imputed values break
        low <= median <= high (the source is discarded).

    Examples
    --------
    With r[base_median / total_median] = 0.8, a record holding only
    total_median = 100000 gets base_median = 80000.
    """
    present = attrs.present
    if not present:
        return None

    anchor = next(a for a in FILL_PRIORITY if a in present)
    anchor_value = getattr(attrs, anchor)

    values = {}
    for attribute in ATTRIBUTES:
        value = getattr(attrs, attribute)
        if value is None:
            value = anchor_value * table.ratio(industry, attribute, anchor)
        values[attribute] = value

    imputed = SalaryAttributes(**values)
    violation = imputed.order_violation()
    if violation is not None:
        logger.debug(f'Discarded source after imputation from {anchor}: {violation}.')
        return None

    return imputed


from collections import namedtuple

import numpy as np
import pandas as pd

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import ContractViolation
from IncomeVerification.core.money import Money
from IncomeVerification.dataStructure import List, SizedNdArray, Structure
from IncomeVerification.extract.attributes import ATTRIBUTES


__all__ = [
    'N_SLOTS', 'SLOT_WIDTH', 'EXTERNAL_DIM', 'FEATURE_COLUMNS', 'SALARY_GROUPS',
    'ExternalFeatureVector', 'build_external_features', 'select_columns',
    'SalaryRange', 'unified_salary_range', 'export_feature_csv',
]


logger = log.get_logger('extfeat')

N_SLOTS = 5
SLOT_WIDTH = len(ATTRIBUTES) + 1
EXTERNAL_DIM = N_SLOTS * SLOT_WIDTH

FEATURE_COLUMNS = [
    f's{k + 1}_{name}'
    for k in range(N_SLOTS)
    for name in list(ATTRIBUTES) + ['match']
]
"""list: Column names; slot k holds the six attribute ratios, then the score."""

SALARY_GROUPS = {
    'low': ('base_low', 'total_low'),
    'median': ('base_median', 'total_median'),
    'high': ('base_high', 'total_high'),
}


class ExternalFeatureVector(Structure):
    """Features of the best matching sources of one identity.

    Parameters
    ----------
    values : array_like
        ``EXTERNAL_DIM`` reals laid out as ``FEATURE_COLUMNS``.
    record_ids : list of str, optional
        Record filling each used slot, best first.
    """

    values = SizedNdArray(size=EXTERNAL_DIM)
    record_ids = List(default=[])

    def __init__(self, values, record_ids=None):
        values = np.asarray(values, dtype=float)
        if values.shape != (EXTERNAL_DIM,):
            raise ContractViolation(
                f"External feature vector must have length {EXTERNAL_DIM}, "
                f"got {values.shape}."
            )
        super().__init__(values=values, record_ids=list(record_ids or []))

    def slot(self, k):
        """Return the values of slot ``k`` (0-based)."""
        return self.values[k * SLOT_WIDTH:(k + 1) * SLOT_WIDTH]

    @property
    def match_scores(self):
        return self.values[SLOT_WIDTH - 1::SLOT_WIDTH]

    @property
    def n_sources(self):
        return len(self.record_ids)

    def __len__(self):
        return EXTERNAL_DIM

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __repr__(self):
        return f'ExternalFeatureVector(n_sources={self.n_sources})'


def build_external_features(stated_income, matches, attrs_by_record, top_k=N_SLOTS):
    """Assemble the external feature vector of one identity.

    Matches are ranked by descending score (ties by ascending record id);
    sources without imputed attributes are skipped; the best ``top_k`` fill
    the slots. Each slot holds attribute / stated_income for the six salary
    attributes and the match score; unused slots stay zero.

    Parameters
    ----------
    stated_income : Money
    matches : list of MatchResult
    attrs_by_record : dict
        Record id -> imputed ``SalaryAttributes`` or None for discarded sources.
    top_k : int, optional
        Number of slots to fill, at most ``N_SLOTS``.

    Returns
    -------
    ExternalFeatureVector

    Raises
    ------
    ContractViolation
        If ``stated_income`` is missing or not positive.
    """
    if stated_income is None:
        raise ContractViolation("External features require a stated income.")
    stated = stated_income.dollars if isinstance(stated_income, Money) \
        else float(stated_income)
    if not stated > 0:
        raise ContractViolation("stated_income must be positive.")
    top_k = min(int(top_k), N_SLOTS)

    ranked = sorted(matches, key=lambda m: (-m.score, m.record_id))
    survivors = [m for m in ranked if attrs_by_record.get(m.record_id) is not None]

    values = np.zeros(EXTERNAL_DIM)
    record_ids = []
    for k, match in enumerate(survivors[:top_k]):
        attributes = attrs_by_record[match.record_id]
        ratios = attributes.as_array() / stated
        offset = k * SLOT_WIDTH
        values[offset:offset + len(ATTRIBUTES)] = np.nan_to_num(ratios, nan=0.0)
        values[offset + len(ATTRIBUTES)] = match.score
        record_ids.append(match.record_id)

    return ExternalFeatureVector(values, record_ids)


def select_columns(drop_groups=(), top_k=N_SLOTS):
    """Column indices left after dropping salary groups and trailing slots.

    Parameters
    ----------
    drop_groups : iterable of {'low', 'median', 'high'}, optional
    top_k : int, optional
        Slots kept, counted from the best match.

    Returns
    -------
    np.ndarray
    """
    unknown = set(drop_groups) - set(SALARY_GROUPS)
    if unknown:
        raise ContractViolation(f"Unknown salary groups {sorted(unknown)}.")

    dropped = {a for group in drop_groups for a in SALARY_GROUPS[group]}
    columns = []
    for k in range(min(int(top_k), N_SLOTS)):
        for j, name in enumerate(list(ATTRIBUTES) + ['match']):
            if name not in dropped:
                columns.append(k * SLOT_WIDTH + j)

    return np.array(columns, dtype=int)


SalaryRange = namedtuple(
    'SalaryRange', ['low', 'median', 'high', 'n_sources', 'total_weight']
)
SalaryRange.__doc__ = """Weighted base salary range reported as verification evidence."""


def unified_salary_range(records, matches, buckets=('high', 'medium')):
    """Summarize matched sources into one base salary range.

    Every source contributes with weight trust_weight x match score; only
    matches in ``buckets`` count.

    Parameters
    ----------
    records : dict
        Record id -> SourceRecord (attributes already imputed).
    matches : list of MatchResult
    buckets : tuple of str, optional

    Returns
    -------
    SalaryRange
        Weighted means of base_low, base_median and base_high as Money; None
        where no source contributes.
    """
    sums = dict.fromkeys(('base_low', 'base_median', 'base_high'), 0.0)
    weights = dict.fromkeys(sums, 0.0)
    used = set()

    for match in sorted(matches, key=lambda m: (-m.score, m.record_id)):
        record = records.get(match.record_id)
        if record is None or match.bucket not in buckets:
            continue
        weight = record.trust_weight * match.score
        if weight <= 0:
            continue
        for attribute in sums:
            value = getattr(record.attributes, attribute)
            if value is not None:
                sums[attribute] += weight * value.dollars
                weights[attribute] += weight
                used.add(match.record_id)

    summary = {
        attribute.split('_')[1]: (
            Money.from_dollars(round(sums[attribute] / weights[attribute], 2))
            if weights[attribute] > 0 else None
        )
        for attribute in sums
    }

    return SalaryRange(
        summary['low'], summary['median'], summary['high'],
        len(used), max(weights.values()),
    )


def export_feature_csv(ids, vectors, path):
    """Write identity ids and external vectors as CSV with named columns."""
    vectors = [np.asarray(v, dtype=float) for v in vectors]
    if len(ids) != len(vectors):
        raise ContractViolation(
            f"Got {len(ids)} ids for {len(vectors)} feature vectors."
        )

    df = pd.DataFrame(
        np.vstack(vectors) if vectors else np.zeros((0, EXTERNAL_DIM)),
        columns=FEATURE_COLUMNS
    )
    df.insert(0, 'identity_id', list(ids))
    df.to_csv(path, index=False, float_format='%.6f')

    logger.info(f'Wrote {len(df)} external feature vectors to {path}.')

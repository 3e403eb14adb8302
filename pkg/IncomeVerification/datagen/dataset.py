from pathlib import Path

import numpy as np
import pandas as pd

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import (
    ConfigurationError, ContractViolation
)
from IncomeVerification.dataStructure import Structure, Typed
from IncomeVerification.core.identity import Identity, identity_from_dict
from IncomeVerification.core.money import Money, MoneyParameter
from IncomeVerification.core.rng import make_rng


__all__ = [
    'LabeledExample', 'EXAMPLE_COLUMNS', 'LABEL_COLUMNS',
    'write_examples', 'read_examples', 'sample_examples',
    'write_match_labels', 'read_match_labels', 'true_incomes', 'stated_incomes',
]


logger = log.get_logger('datagen')

EXAMPLE_COLUMNS = [
    'identity_id', 'first_name', 'middle_name', 'last_name',
    'street', 'city', 'county', 'state', 'zip', 'country', 'dob',
    'employer', 'job_title', 'stated_income', 'true_income',
]

LABEL_COLUMNS = ['identity_id', 'record_id', 'label']


class LabeledExample(Structure):
    """Identity with its verified annual income.

    Attributes
    ----------
    identity : Identity
    true_income : Money
        Regression target; positive.
    """

    identity = Typed(ty=Identity)
    true_income = MoneyParameter()

    _parameters = ['identity', 'true_income']

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        if self.identity is None or self.true_income is None:
            raise ContractViolation("LabeledExample requires identity and true_income.")
        if self.true_income.cents <= 0:
            raise ContractViolation("true_income must be positive.")

    def __repr__(self):
        return f'LabeledExample({self.identity!r}, {self.true_income!r})'


def true_incomes(examples):
    """Dollar array of the true incomes."""
    return np.array([e.true_income.dollars for e in examples], dtype=float)


def stated_incomes(examples):
    """Dollar array of the stated incomes (NaN where missing)."""
    return np.array([
        e.identity.stated_income.dollars
        if e.identity.stated_income is not None else np.nan
        for e in examples
    ], dtype=float)


def _money_text(value):
    if value is None:
        return ''
    return f'{value.cents // 100}.{value.cents % 100:02d}'


def _row(example):
    identity = example.identity
    name = identity.name
    address = identity.address
    return {
        'identity_id': identity.identity_id or '',
        'first_name': name.first if name else '',
        'middle_name': (name.middle or '') if name else '',
        'last_name': name.last if name else '',
        'street': address.street or '',
        'city': address.city or '',
        'county': address.county or '',
        'state': address.state or '',
        'zip': address.zip or '',
        'country': address.country or '',
        'dob': identity.dob.isoformat() if identity.dob else '',
        'employer': identity.employer,
        'job_title': identity.job_title,
        'stated_income': _money_text(identity.stated_income),
        'true_income': _money_text(example.true_income),
    }


def write_examples(examples, path):
    """Write labeled examples as CSV with the columns ``EXAMPLE_COLUMNS``."""
    df = pd.DataFrame([_row(e) for e in examples], columns=EXAMPLE_COLUMNS)
    df.to_csv(path, index=False)
    logger.debug(f'Wrote {len(df)} examples to {path}.')


def read_examples(path):
    """Read labeled examples written by ``write_examples``.

    Raises
    ------
    ConfigurationError
        If required columns are missing.
    """
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [c for c in ('employer', 'job_title', 'true_income') if c not in df.columns]
    if missing:
        raise ConfigurationError(f"Dataset {path} misses columns {missing}.")

    examples = []
    for row in df.to_dict('records'):
        true_income = Money.from_dollars(row.pop('true_income'))
        examples.append(LabeledExample(identity_from_dict(row), true_income))

    logger.debug(f'Read {len(examples)} examples from {path}.')

    return examples


def sample_examples(examples, n, seed):
    """Draw ``n`` examples without replacement, keeping their original order.

    All examples are returned if ``n`` is None or not smaller than the
    dataset.
    """
    if n is None or n >= len(examples):
        return list(examples)
    if n < 0:
        raise ContractViolation(f"Sample size must be non-negative, got {n}.")

    rng = make_rng(seed)
    rows = np.sort(rng.choice(len(examples), size=n, replace=False))
    return [examples[i] for i in rows]


def write_match_labels(labels, path):
    """Write (identity_id, record_id, label) triples as CSV."""
    df = pd.DataFrame(list(labels), columns=LABEL_COLUMNS)
    df['label'] = df['label'].astype(int)
    df.to_csv(path, index=False)


def read_match_labels(path):
    """Read (identity_id, record_id, label) triples."""
    df = pd.read_csv(Path(path), dtype={'identity_id': str, 'record_id': str})
    missing = [c for c in LABEL_COLUMNS if c not in df.columns]
    if missing:
        raise ConfigurationError(f"Label file {path} misses columns {missing}.")

    return [
        (row.identity_id, row.record_id, int(row.label))
        for row in df.itertuples(index=False)
    ]

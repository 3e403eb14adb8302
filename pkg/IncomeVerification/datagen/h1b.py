from collections import namedtuple
import json
from pathlib import Path

import numpy as np
import pandas as pd

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import ConfigurationError
from IncomeVerification.dataStructure import Structure, NonEmptyString, STATE_CODES
from IncomeVerification.core.identity import Address, Identity
from IncomeVerification.core.rng import make_rng
from IncomeVerification.extract.attributes import parse_money_range, parse_money_text

from .dataset import LabeledExample


__all__ = [
    'HOURS_PER_YEAR', 'WAGE_UNITS', 'ColumnMap', 'IngestResult',
    'ingest_h1b', 'ingest_hib', 'parse_wage', 'simulate_stated_income',
]


logger = log.get_logger('datagen')

HOURS_PER_YEAR = 2080

WAGE_UNITS = {
    'year': 1,
    'hour': HOURS_PER_YEAR,
    'week': 52,
    'bi-weekly': 26,
    'month': 12,
}
"""dict: Multiplier from a wage unit to an annual income."""


class ColumnMap(Structure):
    """Names of the disclosure file columns used for ingestion.

    Defaults follow the 2016 disclosure file layout.
    """

    employer_col = NonEmptyString(default='EMPLOYER_NAME')
    title_col = NonEmptyString(default='JOB_TITLE')
    city_col = NonEmptyString(default='WORKSITE_CITY')
    state_col = NonEmptyString(default='WORKSITE_STATE')
    wage_col = NonEmptyString(default='WAGE_RATE_OF_PAY_FROM')
    wage_unit_col = NonEmptyString(default='WAGE_UNIT_OF_PAY')

    _parameters = [
        'employer_col', 'title_col', 'city_col', 'state_col',
        'wage_col', 'wage_unit_col',
    ]

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        if len(set(self.columns)) != len(self.columns):
            raise ConfigurationError(f"Column map names must be distinct: {self.columns}.")

    @property
    def columns(self):
        return [getattr(self, param) for param in self._parameters]

    @classmethod
    def from_json(cls, path):
        data = json.loads(Path(path).read_text())
        unknown = set(data) - set(cls._parameters)
        if unknown:
            raise ConfigurationError(f"Unknown column map keys {sorted(unknown)}.")
        return cls(**data)


IngestResult = namedtuple('IngestResult', ['examples', 'skipped'])
IngestResult.__doc__ = """Ingested examples and (data row number, reason) of skipped rows."""


def parse_wage(wage, unit):
    """Annualize a disclosure wage.

    Ranges ('90000 - 110000') use their lower bound.

    Returns
    -------
    Money or None
        None if the wage or unit cannot be interpreted or the wage is zero.
    """
    factor = WAGE_UNITS.get(str(unit).strip().lower())
    if factor is None:
        return None

    amount = parse_money_text(wage)
    if amount is None:
        bounds = parse_money_range(wage)
        if bounds is None:
            return None
        amount = bounds[0]

    if amount.cents == 0:
        return None

    return amount * factor


def ingest_h1b(csv_path, column_map=None):
    """Read labeled examples from an H-1B disclosure CSV.

    Parameters
    ----------
    csv_path : str or pathlib.Path
    column_map : ColumnMap, optional

    Returns
    -------
    IngestResult
        One example per valid row; every other row is listed as skipped.

    Raises
    ------
    OSError
        If the file cannot be read.
    ConfigurationError
        If mapped columns are missing from the header.
    """
    if column_map is None:
        column_map = ColumnMap()

    df = pd.read_csv(csv_path, dtype=str, keep_default_na=False)
    missing = [c for c in column_map.columns if c not in df.columns]
    if missing:
        raise ConfigurationError(f"{csv_path} misses columns {missing}.")

    examples = []
    skipped = []
    for row_number, row in enumerate(df.to_dict('records'), start=1):
        employer = row[column_map.employer_col].strip()
        title = row[column_map.title_col].strip()
        if not employer or not title:
            skipped.append((row_number, 'missing employer or title'))
            continue

        income = parse_wage(row[column_map.wage_col], row[column_map.wage_unit_col])
        if income is None:
            skipped.append((
                row_number,
                f'unusable wage {row[column_map.wage_col]!r} '
                f'per {row[column_map.wage_unit_col]!r}'
            ))
            continue

        state = row[column_map.state_col].strip().upper()
        identity = Identity(
            address=Address(
                city=row[column_map.city_col].strip() or None,
                state=state if state in STATE_CODES else None,
                country='US',
            ),
            employer=employer,
            job_title=title,
            identity_id=f'h1b-{row_number:06d}',
        )
        examples.append(LabeledExample(identity, income))

    if skipped:
        logger.warning(f'Skipped {len(skipped)} of {len(df)} rows of {csv_path}.')
    logger.info(f'Ingested {len(examples)} examples from {csv_path}.')

    return IngestResult(examples, skipped)


ingest_hib = ingest_h1b


def simulate_stated_income(examples, rate=0.25, factor_range=(1.3, 2.0), seed=0):
    """Add a stated income to examples that have none.

    A ``rate`` fraction of the rows states its true income inflated by a
    factor drawn uniformly from ``factor_range``; the others state the true
    income.

    Returns
    -------
    list of LabeledExample
        New examples; rows that already state an income are kept unchanged.
    """
    low, high = factor_range
    if not 1 <= low <= high:
        raise ConfigurationError(f"Invalid inflation factor range {factor_range}.")

    rng = make_rng(seed)
    inflate = rng.random(len(examples)) < rate
    factors = rng.uniform(low, high, len(examples))

    simulated = []
    for example, inflated, factor in zip(examples, inflate, factors):
        identity = example.identity
        if identity.stated_income is None:
            stated = example.true_income * float(factor) if inflated \
                else example.true_income
            identity = identity.replace(stated_income=stated)
        simulated.append(LabeledExample(identity, example.true_income))

    logger.debug(
        f'Simulated stated incomes; {int(np.sum(inflate))} of {len(examples)} inflated.'
    )

    return simulated

from pathlib import Path

import pandas as pd

from IncomeVerification.IncomeVerificationError import ConfigurationError
from IncomeVerification.canon import key_normalize


__all__ = [
    'INDUSTRIES', 'IndustryTable', 'infer_industry',
    'load_industry_table', 'default_industry_table', 'DEFAULT_INDUSTRY_TABLE',
]


DEFAULT_INDUSTRY_TABLE = Path(__file__).parent.parent / 'data' / 'industries.csv'

INDUSTRIES = [
    'Technology', 'Manufacturing', 'Government', 'Healthcare', 'Finance',
    'Retail', 'Travel', 'Education', 'Energy', 'Consulting',
    'Telecommunications', 'Logistics',
]


class IndustryTable():
    """Map from canonical employer to industry label.

    Lookups use the key-normalized employer, so only case and punctuation
    differences are tolerated.

    Parameters
    ----------
    mapping : dict, optional
        Canonical employer -> industry label from ``INDUSTRIES``.
    """

    def __init__(self, mapping=None):
        self._table = {}
        for employer, industry in (mapping or {}).items():
            if industry not in INDUSTRIES:
                raise ConfigurationError(
                    f"Unknown industry {industry!r} for {employer!r}."
                )
            self._table[key_normalize(employer)] = industry

    def get(self, employer):
        if not employer:
            return None
        return self._table.get(key_normalize(employer))

    def __len__(self):
        return len(self._table)


def infer_industry(employer, table):
    """Return the industry of a canonical employer, or None on a miss."""
    return table.get(employer)


def load_industry_table(path=None):
    """Load an industry table from a CSV file with header ``employer,industry``."""
    path = Path(path) if path is not None else DEFAULT_INDUSTRY_TABLE
    df = pd.read_csv(path, dtype=str, keep_default_na=False)

    missing = {'employer', 'industry'} - set(df.columns)
    if missing:
        raise ConfigurationError(
            f"Industry table {path} misses columns {sorted(missing)}."
        )

    return IndustryTable(dict(zip(df['employer'], df['industry'])))


_default_table = None


def default_industry_table():
    """Return the shipped industry table (loaded once)."""
    global _default_table
    if _default_table is None:
        _default_table = load_industry_table()
    return _default_table

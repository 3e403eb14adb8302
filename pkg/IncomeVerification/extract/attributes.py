import operator
import re
from decimal import Decimal

import numpy as np

from IncomeVerification.dataStructure import (
    Structure, Typed, String, NonEmptyString, Switch, Dict, RangedFloat
)
from IncomeVerification.core.money import Money, MoneyParameter


__all__ = [
    'ATTRIBUTES', 'SOURCE_TYPES', 'DEFAULT_TRUST',
    'SalaryAttributes', 'SourceRecord',
    'parse_money_text', 'parse_money_range',
]


ATTRIBUTES = (
    'base_low', 'base_median', 'base_high',
    'total_low', 'total_median', 'total_high',
)
"""tuple: Salary attributes in feature order."""

SOURCE_TYPES = ['government', 'salary_site', 'snippet']

DEFAULT_TRUST = {'government': 1.0, 'salary_site': 0.7, 'snippet': 0.4}
"""dict: Default trust weight per source type."""


_AMOUNT = r'\\?\$?\s*(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d{1,2})?(?:\s*[kK](?![A-Za-z]))?'
_amount = re.compile(_AMOUNT)
_range = re.compile(
    rf'(?:from\s+)?(?P<low>{_AMOUNT})\s*(?:-|–|to)\s*(?P<high>{_AMOUNT})',
    re.IGNORECASE
)


def _amount_value(text):
    text = text.strip()
    thousands = text[-1] in 'kK'
    digits = re.sub(r'[\\$,\s kK]', '', text)
    value = Decimal(digits)
    if thousands:
        value *= 1000
    return Money.from_dollars(value)


def parse_money_text(text):
    """Parse a single monetary amount.

    Parameters
    ----------
    text : str

    Returns
    -------
    Money or None
        None if the text is not exactly one amount (ranges included, see
        ``parse_money_range``).

    Examples
    --------
    >>> parse_money_text('$73,482')
    Money(73482.00)
    >>> parse_money_text('salary information') is None
    True
    """
    if text is None:
        return None
    text = str(text).strip()
    if not text or not _amount.fullmatch(text):
        return None

    return _amount_value(text)


def parse_money_range(text):
    """Parse a range like '90,000 - 234,000' or 'from $90,000 to $234,000'.

    Returns
    -------
    tuple of Money or None
        (low, high); None if the text is not a range.
    """
    if text is None:
        return None
    match = _range.fullmatch(str(text).strip())
    if match is None:
        return None

    return _amount_value(match['low']), _amount_value(match['high'])


class SalaryAttributes(Structure):
    """Base and total compensation low / median / high; all optional."""

    base_low = MoneyParameter(is_optional=True)
    base_median = MoneyParameter(is_optional=True)
    base_high = MoneyParameter(is_optional=True)
    total_low = MoneyParameter(is_optional=True)
    total_median = MoneyParameter(is_optional=True)
    total_high = MoneyParameter(is_optional=True)

    _parameters = list(ATTRIBUTES)

    @property
    def present(self):
        """list: Names of the present attributes."""
        return [a for a in ATTRIBUTES if getattr(self, a) is not None]

    @property
    def is_empty(self):
        return len(self.present) == 0

    def as_array(self):
        """Dollar values in ``ATTRIBUTES`` order, NaN for absent attributes."""
        return np.array([
            getattr(self, a).dollars if getattr(self, a) is not None else np.nan
            for a in ATTRIBUTES
        ])

    def order_violation(self):
        """Return a reason if low <= median <= high does not hold, else None."""
        for group in ('base', 'total'):
            values = [
                (level, getattr(self, f'{group}_{level}'))
                for level in ('low', 'median', 'high')
            ]
            values = [(level, v) for level, v in values if v is not None]
            for (l1, v1), (l2, v2) in zip(values, values[1:]):
                if v1 > v2:
                    return f'{group}_{l1} {v1} exceeds {group}_{l2} {v2}'
        return None

    def to_dict(self):
        return {
            a: (getattr(self, a).cents if getattr(self, a) is not None else None)
            for a in ATTRIBUTES
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**{
            a: Money(data[a]) for a in ATTRIBUTES if data.get(a) is not None
        })

    def __eq__(self, other):
        if not isinstance(other, SalaryAttributes):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        values = ', '.join(f'{a}={getattr(self, a)!r}' for a in self.present)
        return f'SalaryAttributes({values})'


class SourceRecord(Structure):
    """Salary record extracted from one corpus document.

    Attributes
    ----------
    record_id : str
    source_type : {'government', 'salary_site', 'snippet'}
    identity_fragment : dict
        Partial identity: ``name`` ({first, middle, last}), ``address``
        ({city, state, ...}), ``employer``, ``occupation``, ``year``.
    attributes : SalaryAttributes
    trust_weight : float
        In (0, 1]; defaults per source type (``DEFAULT_TRUST``).
    discard_reason : str, optional
        Set when the record carries no usable salary attribute.
    """

    record_id = NonEmptyString()
    source_type = Switch(valid=SOURCE_TYPES)
    identity_fragment = Dict(default={})
    attributes = Typed(ty=SalaryAttributes)
    trust_weight = RangedFloat(lb=0, lb_op=operator.le, ub=1, is_optional=True)
    discard_reason = String(is_optional=True)

    _parameters = [
        'record_id', 'source_type', 'identity_fragment', 'attributes',
        'trust_weight', 'discard_reason',
    ]

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        if self.attributes is None:
            self.attributes = SalaryAttributes()
        if self.trust_weight is None:
            self.trust_weight = DEFAULT_TRUST[self.source_type]

        if self.discard_reason is None:
            violation = self.attributes.order_violation()
            if violation is not None:
                self.discard_reason = violation
            elif self.attributes.is_empty:
                self.discard_reason = 'no salary attribute'

    @property
    def is_discardable(self):
        return self.discard_reason is not None

    @property
    def employer(self):
        return self.identity_fragment.get('employer')

    @property
    def occupation(self):
        return self.identity_fragment.get('occupation')

    def to_dict(self):
        return {
            'id': self.record_id,
            'source_type': self.source_type,
            'identity_fragment': self.identity_fragment,
            'attributes': self.attributes.to_dict(),
            'trust_weight': self.trust_weight,
            'discard_reason': self.discard_reason,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            record_id=data['id'],
            source_type=data['source_type'],
            identity_fragment=data.get('identity_fragment') or {},
            attributes=SalaryAttributes.from_dict(data.get('attributes') or {}),
            trust_weight=data.get('trust_weight'),
            discard_reason=data.get('discard_reason'),
        )

    def __eq__(self, other):
        if not isinstance(other, SourceRecord):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return (
            f'SourceRecord({self.record_id!r}, {self.source_type!r}, '
            f'{self.attributes!r})'
        )

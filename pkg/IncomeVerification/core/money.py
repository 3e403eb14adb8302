from decimal import Decimal, ROUND_HALF_EVEN, InvalidOperation
from functools import total_ordering
import numbers

import numpy as np

from IncomeVerification.dataStructure import Typed


__all__ = ['Money', 'MoneyParameter', 'MAX_CENTS', 'to_dollars']


MAX_CENTS = 2**63 - 1


@total_ordering
class Money:
    """Non-negative amount of US dollars stored as integer cents.

    Arithmetic is checked: results below zero raise ``ValueError`` and results
    above ``MAX_CENTS`` raise ``OverflowError``.

    Parameters
    ----------
    cents : int
        Amount in cents.

    Examples
    --------
    >>> Money.from_dollars(73482)
    Money(73482.00)
    >>> Money.from_dollars('84443.50') + Money(1000000)
    Money(94443.50)

    """

    __slots__ = ('_cents',)

    def __init__(self, cents=0):
        if isinstance(cents, bool) or not isinstance(cents, numbers.Integral):
            raise TypeError(f"Expected integer cents, got {type(cents)}")

        cents = int(cents)
        _check_cents(cents)
        object.__setattr__(self, '_cents', cents)

    def __setattr__(self, key, value):
        raise AttributeError("Money is immutable.")

    @classmethod
    def from_dollars(cls, dollars):
        """Create from a dollar amount, rounding half-even to cents.

        Parameters
        ----------
        dollars : int, float, str or Decimal
            Dollar amount.
        """
        if isinstance(dollars, Money):
            return dollars
        if isinstance(dollars, (float, np.floating)) and not np.isfinite(dollars):
            raise ValueError(f"Cannot convert {dollars} to Money.")

        try:
            amount = Decimal(str(dollars))
        except InvalidOperation:
            raise ValueError(f"Cannot convert {dollars!r} to Money.")

        cents = (amount * 100).quantize(Decimal(1), rounding=ROUND_HALF_EVEN)
        return cls(int(cents))

    @property
    def cents(self):
        """int: Amount in cents."""
        return self._cents

    @property
    def dollars(self):
        """float: Amount in dollars."""
        return self._cents / 100

    def __add__(self, other):
        if not isinstance(other, Money):
            return NotImplemented
        return Money(self._cents + other._cents)

    def __sub__(self, other):
        if not isinstance(other, Money):
            return NotImplemented
        return Money(self._cents - other._cents)

    def __mul__(self, factor):
        if isinstance(factor, Money) or not isinstance(factor, numbers.Real):
            return NotImplemented
        if factor < 0 or not np.isfinite(factor):
            raise ValueError("Money can only be scaled by finite factors >= 0.")

        cents = (Decimal(self._cents) * Decimal(str(float(factor)))).quantize(
            Decimal(1), rounding=ROUND_HALF_EVEN
        )
        return Money(int(cents))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Money):
            return NotImplemented
        return self._cents == other._cents

    def __lt__(self, other):
        if not isinstance(other, Money):
            return NotImplemented
        return self._cents < other._cents

    def __hash__(self):
        return hash(('Money', self._cents))

    def __float__(self):
        return self.dollars

    def __bool__(self):
        return self._cents > 0

    def __repr__(self):
        return f'Money({self._cents // 100}.{self._cents % 100:02d})'

    def __str__(self):
        return f'${self._cents // 100:,}.{self._cents % 100:02d}'

    def __reduce__(self):
        return (Money, (self._cents,))


def _check_cents(cents):
    if cents < 0:
        raise ValueError(f"Money must be non-negative, got {cents} cents.")
    if cents > MAX_CENTS:
        raise OverflowError(f"Money exceeds {MAX_CENTS} cents.")


def to_dollars(values):
    """Convert a sequence of Money or numbers to a float64 array of dollars."""
    return np.array(
        [v.dollars if isinstance(v, Money) else float(v) for v in values],
        dtype=np.float64
    )


class MoneyParameter(Typed):
    """Parameter holding ``Money``; numbers and numeric strings are cast."""

    ty = Money

    def cast_value(self, value):
        if isinstance(value, (numbers.Real, str, Decimal)) \
                and not isinstance(value, bool):
            value = Money.from_dollars(value)
        return value

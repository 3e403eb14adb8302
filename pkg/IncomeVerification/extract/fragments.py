"""Parsing of identity fragments found in source documents."""

from IncomeVerification.dataStructure import STATE_CODES


__all__ = ['parse_name', 'parse_location']


def parse_name(text):
    """Split 'First [Middle] Last' into a name fragment.

    Returns
    -------
    dict or None
        ``{'first', 'middle', 'last'}``; None with fewer than two tokens.
    """
    tokens = text.replace(',', ' ').split()
    if len(tokens) < 2:
        return None

    middle = ' '.join(tokens[1:-1]) or None
    return {'first': tokens[0], 'middle': middle, 'last': tokens[-1]}


def parse_location(text):
    """Parse 'CITY[, ST]' into an address fragment."""
    city, _, rest = text.partition(',')
    address = {'city': city.strip() or None}

    state = rest.strip().upper()
    if state in STATE_CODES:
        address['state'] = state

    return address

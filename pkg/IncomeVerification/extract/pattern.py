import json
from pathlib import Path
import re

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import ConfigurationError
from IncomeVerification.dataStructure import Structure, NonEmptyString, Dict
from .attributes import ATTRIBUTES, SalaryAttributes, SourceRecord, parse_money_text


__all__ = [
    'PatternRule', 'load_patterns', 'default_patterns', 'extract_pattern',
    'DEFAULT_PATTERNS', 'MONEY_PATTERN',
]


DEFAULT_PATTERNS = Path(__file__).parent.parent / 'data' / 'patterns.json'

MONEY_PATTERN = r'\\?\$\s?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d{1,2})?(?:\s?[kK](?![A-Za-z]))?'
"""str: Dollar amount; substituted for ``{money}`` in pattern files."""

PATTERN_FORMAT = 'snippet-patterns'
PATTERN_VERSION = 1

FRAGMENT_FIELDS = ('occupation', 'employer')

logger = log.get_logger('extract')


class PatternRule(Structure):
    """Text pattern with named groups mapped onto record fields.

    Attributes
    ----------
    name : str
    pattern : str
        Regular expression; ``{money}`` expands to ``MONEY_PATTERN``.
    captures : dict
        Group name -> salary attribute or 'occupation' / 'employer'.
    """

    name = NonEmptyString()
    pattern = NonEmptyString()
    captures = Dict(default={})

    _parameters = ['name', 'pattern', 'captures']

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        unknown = set(self.captures.values()) - set(ATTRIBUTES) - set(FRAGMENT_FIELDS)
        if unknown:
            raise ConfigurationError(
                f"Pattern {self.name!r} captures unknown fields {sorted(unknown)}."
            )
        try:
            self.regex = re.compile(self.pattern.replace('{money}', MONEY_PATTERN))
        except re.error as e:
            raise ConfigurationError(f"Pattern {self.name!r} does not compile: {e}")

        missing = set(self.captures) - set(self.regex.groupindex)
        if missing:
            raise ConfigurationError(
                f"Pattern {self.name!r} has no groups {sorted(missing)}."
            )


def load_patterns(path=None):
    """Load the ordered pattern list from JSON.

    Returns
    -------
    list of PatternRule
    """
    path = Path(path) if path is not None else DEFAULT_PATTERNS
    with open(path, encoding='utf-8') as f:
        data = json.load(f)

    if data.get('format') != PATTERN_FORMAT or data.get('version') != PATTERN_VERSION:
        raise ConfigurationError(f"Unsupported pattern file {path}.")

    return [PatternRule(**rule) for rule in data['patterns']]


_default_patterns = None


def default_patterns():
    """Return the shipped pattern list (loaded once)."""
    global _default_patterns
    if _default_patterns is None:
        _default_patterns = load_patterns()
    return _default_patterns


def extract_pattern(snippet_text, patterns=None, record_id='snippet'):
    """Extract salary attributes from free text.

    Patterns are applied in order; for each field the first pattern that
    captures it wins.

    Parameters
    ----------
    snippet_text : str
    patterns : list of PatternRule, optional
        Defaults to the shipped list.
    record_id : str, optional

    Returns
    -------
    SourceRecord or None
        None if no salary attribute was captured.

    Examples
    --------
    'The average Software Engineer salary is $100,000' gives base_median
    100000 and the occupation fragment 'Software Engineer'.
    """
    if patterns is None:
        patterns = default_patterns()
    if not snippet_text:
        return None

    values = {}
    fragment = {}
    for rule in patterns:
        match = rule.regex.search(snippet_text)
        if match is None:
            continue

        for group, field in rule.captures.items():
            text = match.group(group)
            if text is None or field in values or field in fragment:
                continue

            if field in ATTRIBUTES:
                amount = parse_money_text(text)
                if amount is not None:
                    values[field] = amount
            else:
                fragment[field] = ' '.join(text.split())

    if not values:
        return None

    logger.debug(f'{record_id}: captured {sorted(values)} from snippet.')

    return SourceRecord(
        record_id=record_id,
        source_type='snippet',
        identity_fragment=fragment,
        attributes=SalaryAttributes(**values),
    )

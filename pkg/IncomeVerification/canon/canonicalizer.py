from pathlib import Path
import re
import unicodedata

import pandas as pd

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import ConfigurationError


__all__ = [
    'KINDS', 'AliasTable', 'key_normalize', 'canonicalize',
    'load_alias_table', 'default_alias_table', 'DEFAULT_ALIAS_TABLE',
]


DEFAULT_ALIAS_TABLE = Path(__file__).parent.parent / 'data' / 'aliases.csv'

KINDS = ('employer', 'title')
TOKEN_KINDS = {'employer_token': 'employer', 'title_token': 'title'}

_whitespace = re.compile(r'\s+')

logger = log.get_logger('canon')


def key_normalize(raw):
    """Return the lookup key of a string.

    The key is case-folded, stripped of punctuation and has whitespace
    collapsed and trimmed.

    Parameters
    ----------
    raw : str

    Returns
    -------
    str

    Examples
    --------
    >>> key_normalize('U.S.P.S')
    'usps'
    >>> key_normalize('  Sr.   Manager ')
    'sr manager'
    """
    folded = raw.casefold()
    stripped = ''.join(
        ch for ch in folded
        if not unicodedata.category(ch).startswith(('P', 'S'))
    )
    return _whitespace.sub(' ', stripped).strip()


def _compact(key):
    return key.replace(' ', '')


def _normalize_whitespace(raw):
    return _whitespace.sub(' ', raw).strip()


class AliasTable():
    """Lookup table from (kind, key) to canonical text.

    Besides whole-string entries, the table holds token abbreviations
    ('Sr.' -> 'Senior') that are expanded before a second whole-string lookup.
    Every canonical text is registered under its own key so canonical texts
    are fixed points of ``canonicalize``.

    Parameters
    ----------
    rows : iterable of (kind, raw, canonical)
        ``kind`` is 'employer', 'title', 'employer_token' or 'title_token'.

    Raises
    ------
    ConfigurationError
        If a kind is unknown, a key maps to two canonical texts, or an
        abbreviation expands to another abbreviation.
    """

    def __init__(self, rows=()):
        self.entries = {}
        self.abbreviations = {}
        self._compact = {}

        canonicals = []
        for kind, raw, canonical in rows:
            canonical = _normalize_whitespace(canonical)
            if kind in TOKEN_KINDS:
                self._add(self.abbreviations, TOKEN_KINDS[kind], raw, canonical)
            elif kind in KINDS:
                self._add(self.entries, kind, raw, canonical)
                canonicals.append((kind, canonical))
            else:
                raise ConfigurationError(f"Unknown alias kind {kind!r}.")

        for kind, canonical in canonicals:
            self._add(self.entries, kind, canonical, canonical)

        for (kind, key), expansion in self.abbreviations.items():
            if (kind, key_normalize(expansion)) in self.abbreviations:
                raise ConfigurationError(
                    f"Abbreviation {key!r} expands to another abbreviation."
                )

        ambiguous = set()
        for (kind, key), canonical in sorted(self.entries.items()):
            compact = (kind, _compact(key))
            if compact in self._compact and self._compact[compact] != canonical:
                ambiguous.add(compact)
            self._compact[compact] = canonical
        for compact in ambiguous:
            del self._compact[compact]

    @staticmethod
    def _add(table, kind, raw, canonical):
        key = key_normalize(raw)
        if not key:
            raise ConfigurationError(f"Alias {raw!r} has an empty lookup key.")
        if table.get((kind, key), canonical) != canonical:
            raise ConfigurationError(
                f"{kind} key {key!r} maps to both {table[(kind, key)]!r} "
                f"and {canonical!r}."
            )
        table[(kind, key)] = canonical

    def lookup(self, raw, kind):
        """Return canonical text of a whole string, or None."""
        key = key_normalize(raw)
        try:
            return self.entries[(kind, key)]
        except KeyError:
            return self._compact.get((kind, _compact(key)))

    def expand_tokens(self, raw, kind):
        """Replace abbreviation tokens, keeping all other tokens as they are."""
        tokens = []
        for token in raw.split():
            key = key_normalize(token)
            tokens.append(self.abbreviations.get((kind, key), token) if key else token)
        return ' '.join(tokens)

    @property
    def canonical_texts(self):
        """dict: Sorted canonical texts per kind."""
        return {
            kind: sorted({c for (k, _), c in self.entries.items() if k == kind})
            for kind in KINDS
        }

    def variants(self, canonical, kind):
        """Return the raw keys registered for a canonical text."""
        return sorted(
            key for (k, key), c in self.entries.items()
            if k == kind and c == canonical
        )

    def __len__(self):
        return len(self.entries)


def canonicalize(raw, kind, table):
    """Map a raw employer or title string onto its canonical form.

    Parameters
    ----------
    raw : str
        Raw text.
    kind : {'employer', 'title'}
    table : AliasTable

    Returns
    -------
    str
        Canonical text on a table hit, otherwise ``raw`` with abbreviations
        expanded and whitespace normalized.

    Examples
    --------
    >>> table = default_alias_table()
    >>> canonicalize('U.S.P.S', 'employer', table)
    'United States Postal Service'
    >>> canonicalize('Zyxcorp LLC', 'employer', table)
    'Zyxcorp LLC'
    """
    if kind not in KINDS:
        raise ConfigurationError(f"Unknown kind {kind!r}; expected one of {KINDS}.")

    hit = table.lookup(raw, kind)
    if hit is not None:
        return hit

    expanded = _normalize_whitespace(table.expand_tokens(raw, kind))
    hit = table.lookup(expanded, kind)
    if hit is not None:
        return hit

    if not expanded:
        return raw

    return expanded


def load_alias_table(path=None):
    """Load an alias table from a CSV file with header ``kind,raw,canonical``.

    Parameters
    ----------
    path : str or pathlib.Path, optional
        Defaults to the shipped table.

    Returns
    -------
    AliasTable
    """
    path = Path(path) if path is not None else DEFAULT_ALIAS_TABLE
    df = pd.read_csv(path, dtype=str, keep_default_na=False)

    missing = {'kind', 'raw', 'canonical'} - set(df.columns)
    if missing:
        raise ConfigurationError(
            f"Alias table {path} misses columns {sorted(missing)}."
        )

    table = AliasTable(df[['kind', 'raw', 'canonical']].itertuples(index=False))
    logger.debug(f'Loaded {len(table)} aliases from {path}.')

    return table


_default_table = None


def default_alias_table():
    """Return the shipped alias table (loaded once)."""
    global _default_table
    if _default_table is None:
        _default_table = load_alias_table()
    return _default_table

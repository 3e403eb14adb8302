from collections import Counter
import math

import Levenshtein

from IncomeVerification.canon import key_normalize
from IncomeVerification.retrieval.query import tokenize


__all__ = [
    'levenshtein', 'normalized_similarity', 'name_score', 'address_score',
    'cosine_similarity', 'employment_sim', 'ADDRESS_FIELDS',
]


ADDRESS_FIELDS = ('city_sim', 'street_sim', 'county_sim', 'zip_exact', 'country_exact')


def levenshtein(a, b):
    """Edit distance (insertions, deletions, substitutions) between strings."""
    return Levenshtein.distance(a, b)


def normalized_similarity(a, b):
    """Return 1 − levenshtein(a, b) / max(len(a), len(b)); 1 for two empty strings."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1 - levenshtein(a, b) / longest


def _get(obj, key):
    if obj is None:
        return None
    if isinstance(obj, dict):
        value = obj.get(key)
    else:
        value = getattr(obj, key, None)
    if isinstance(value, str):
        value = key_normalize(value)
        return value or None
    return value


def _middle_factor(a, b, initial_factor, conflict_factor):
    # A missing middle name on either side is unknown, not a conflict
    if a is None or b is None or a == b:
        return 1.0

    short, full = sorted((a, b), key=len)
    if len(short) == 1 and full.startswith(short):
        return initial_factor

    return conflict_factor


def name_score(a, b, initial_factor=0.9, conflict_factor=0.7):
    """Similarity of two names.

    Normalized edit similarity of the key-normalized 'first last' strings,
    multiplied by a middle name factor: 1 if a middle name is missing on
    either side or both agree, ``initial_factor`` if one side is the initial
    of the other, ``conflict_factor`` otherwise.

    Parameters
    ----------
    a, b : Name or dict
        Names with ``first``, optional ``middle`` and ``last``.
    initial_factor : float, optional
    conflict_factor : float, optional

    Returns
    -------
    float
        Score in [0, 1].

    Examples
    --------
    'James Ryan Smith' vs 'James R Smith' scores 0.9, 'James Ryan Smith' vs
    'James S Smith' scores 0.7.
    """
    full_a = key_normalize(f"{_get(a, 'first') or ''} {_get(a, 'last') or ''}")
    full_b = key_normalize(f"{_get(b, 'first') or ''} {_get(b, 'last') or ''}")

    base = normalized_similarity(full_a, full_b)
    factor = _middle_factor(
        _get(a, 'middle'), _get(b, 'middle'), initial_factor, conflict_factor
    )

    return base * factor


def address_score(a, b):
    """Compare two addresses component by component.

    Parameters
    ----------
    a, b : Address or dict or None

    Returns
    -------
    dict
        ``city_sim``, ``street_sim``, ``county_sim`` (normalized edit
        similarity) and ``zip_exact``, ``country_exact`` (0 or 1). A component
        missing on either side is None (masked).
    """
    features = {}
    for field in ('city', 'street', 'county'):
        va, vb = _get(a, field), _get(b, field)
        features[f'{field}_sim'] = (
            normalized_similarity(va, vb) if va and vb else None
        )

    for field in ('zip', 'country'):
        va, vb = _get(a, field), _get(b, field)
        features[f'{field}_exact'] = float(va == vb) if va and vb else None

    return features


def _trigrams(text):
    text = key_normalize(text)
    if len(text) < 3:
        return Counter([text]) if text else Counter()
    return Counter(text[i:i + 3] for i in range(len(text) - 2))


def cosine_similarity(a, b):
    """Cosine similarity of term-frequency vectors of two strings.

    Token unigrams are used unless either side has fewer than two tokens, in
    which case both sides use character trigrams.
    """
    tokens_a, tokens_b = tokenize(a), tokenize(b)
    if len(tokens_a) < 2 or len(tokens_b) < 2:
        va, vb = _trigrams(a), _trigrams(b)
    else:
        va, vb = Counter(tokens_a), Counter(tokens_b)

    if not va or not vb:
        return 0.0

    dot = sum(count * vb[gram] for gram, count in va.items())
    norm = math.sqrt(sum(c * c for c in va.values())) \
        * math.sqrt(sum(c * c for c in vb.values()))

    return min(1.0, dot / norm)


def employment_sim(redacted, fragment):
    """Cosine similarities of employer and title strings.

    Parameters
    ----------
    redacted : RedactedIdentity
    fragment : dict
        Identity fragment with optional ``employer`` and ``occupation``.

    Returns
    -------
    dict
        ``employer_cos`` and ``title_cos``; None if the fragment lacks the
        field.
    """
    employer = fragment.get('employer')
    occupation = fragment.get('occupation')

    return {
        'employer_cos': (
            cosine_similarity(redacted.employer, employer) if employer else None
        ),
        'title_cos': (
            cosine_similarity(redacted.job_title, occupation) if occupation else None
        ),
    }

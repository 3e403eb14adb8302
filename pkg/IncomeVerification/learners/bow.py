from collections import Counter
import json
from pathlib import Path

import numpy as np

from IncomeVerification.IncomeVerificationError import ConfigurationError, ContractViolation
from IncomeVerification.canon import key_normalize
from IncomeVerification.retrieval.query import tokenize


__all__ = ['BOW_TOP_N', 'BOW_DIM', 'BOW_GROUPS', 'BowFeaturizer', 'bow_featurize']


BOW_TOP_N = 200
BOW_DIM = 2 * BOW_TOP_N + 2

BOW_GROUPS = {
    'job_title': list(range(0, BOW_TOP_N)),
    'employer': list(range(BOW_TOP_N, 2 * BOW_TOP_N)),
    'city': [2 * BOW_TOP_N],
    'state': [2 * BOW_TOP_N + 1],
}
"""dict: Columns of every input feature group of the bag-of-words vector."""

BOW_FORMAT = 'bow-featurizer'
BOW_VERSION = 1


def _top_tokens(texts, n):
    counter = Counter(token for text in texts for token in tokenize(text))
    ranked = sorted(counter.items(), key=lambda item: (-item[1], item[0]))
    return [token for token, _ in ranked[:n]]


class BowFeaturizer():
    """Token counts of title and employer plus city and state codes.

    Each of the two count blocks has ``BOW_TOP_N`` coordinates; fields with
    fewer distinct training tokens leave trailing coordinates at zero. City
    and state codes are 1..n in sorted order of the training values, 0 for
    unseen values.

    Attributes
    ----------
    title_tokens : list of str
    employer_tokens : list of str
    cities : list of str
    states : list of str
    """

    def __init__(self, title_tokens=(), employer_tokens=(), cities=(), states=()):
        self.title_tokens = list(title_tokens)
        self.employer_tokens = list(employer_tokens)
        self.cities = list(cities)
        self.states = list(states)
        self._title_index = {t: i for i, t in enumerate(self.title_tokens)}
        self._employer_index = {t: i for i, t in enumerate(self.employer_tokens)}
        self._city_code = {c: i + 1 for i, c in enumerate(self.cities)}
        self._state_code = {s: i + 1 for i, s in enumerate(self.states)}

    @classmethod
    def fit(cls, redacted, top_n=BOW_TOP_N):
        """Select vocabularies and category codes from training identities.

        Parameters
        ----------
        redacted : list of RedactedIdentity
        top_n : int, optional
        """
        if len(redacted) == 0:
            raise ContractViolation("Cannot fit a featurizer on no identities.")
        if top_n > BOW_TOP_N:
            raise ConfigurationError(f"top_n must not exceed {BOW_TOP_N}.")

        cities = sorted({key_normalize(r.city) for r in redacted if r.city})
        states = sorted({r.state for r in redacted if r.state})

        return cls(
            _top_tokens([r.job_title for r in redacted], top_n),
            _top_tokens([r.employer for r in redacted], top_n),
            cities, states,
        )

    @property
    def dim(self):
        return BOW_DIM

    def transform(self, redacted):
        """Feature vector of one identity, length ``BOW_DIM``."""
        vector = np.zeros(BOW_DIM)

        for token in tokenize(redacted.job_title):
            i = self._title_index.get(token)
            if i is not None:
                vector[i] += 1

        for token in tokenize(redacted.employer):
            i = self._employer_index.get(token)
            if i is not None:
                vector[BOW_TOP_N + i] += 1

        city = key_normalize(redacted.city) if redacted.city else None
        vector[2 * BOW_TOP_N] = self._city_code.get(city, 0)
        vector[2 * BOW_TOP_N + 1] = self._state_code.get(redacted.state, 0)

        return vector

    def transform_many(self, redacted):
        if len(redacted) == 0:
            return np.zeros((0, BOW_DIM))
        return np.vstack([self.transform(r) for r in redacted])

    def to_dict(self):
        return {
            'format': BOW_FORMAT,
            'version': BOW_VERSION,
            'title_tokens': self.title_tokens,
            'employer_tokens': self.employer_tokens,
            'cities': self.cities,
            'states': self.states,
        }

    @classmethod
    def from_dict(cls, data):
        if data.get('format') != BOW_FORMAT or data.get('version') != BOW_VERSION:
            raise ConfigurationError(
                f"Unsupported featurizer format {data.get('format')!r} "
                f"version {data.get('version')!r}."
            )
        return cls(
            data['title_tokens'], data['employer_tokens'],
            data['cities'], data['states'],
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


def bow_featurize(featurizer, redacted):
    """Return the bag-of-words vector of a redacted identity."""
    return featurizer.transform(redacted)

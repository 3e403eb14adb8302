import re

from IncomeVerification.dataStructure import Structure, NonEmptyString, Switch


__all__ = ['TIERS', 'Query', 'build_queries', 'tokenize']


TIERS = ['employer_title', 'title_only', 'industry_title']
"""list: Query tiers, from specific to generic."""

_token = re.compile(r'[^\W_]+')


def tokenize(text):
    """Case-fold and split text on non-alphanumeric characters."""
    return _token.findall(text.casefold())


class Query(Structure):
    """Salary search query.

    Attributes
    ----------
    text : str
    tier : {'employer_title', 'title_only', 'industry_title'}
    """

    text = NonEmptyString()
    tier = Switch(valid=TIERS)

    _parameters = ['text', 'tier']

    @property
    def rank(self):
        """int: Position of the tier in ``TIERS``."""
        return TIERS.index(self.tier)

    def __repr__(self):
        return f'Query({self.text!r}, tier={self.tier!r})'


def _fill(*slots):
    return ' '.join(' '.join(slots).split())


def build_queries(identity, industry=None):
    """Build the salary queries of an identity in tier order.

    Parameters
    ----------
    identity : Identity or RedactedIdentity
        Canonicalized identity.
    industry : str, optional
        Industry of the employer. If None, the industry query is omitted.

    Returns
    -------
    list of Query

    Examples
    --------
    For employer 'XYZ Company', title 'Software Engineer' and industry 'Travel'
    the queries are 'XYZ Company Software Engineer Salary',
    'Software Engineer Salary' and 'Travel Software Engineer Salary'.
    """
    queries = [
        Query(text=_fill(identity.employer, identity.job_title, 'Salary'),
              tier='employer_title'),
        Query(text=_fill(identity.job_title, 'Salary'), tier='title_only'),
    ]
    if industry is not None:
        queries.append(
            Query(text=_fill(industry, identity.job_title, 'Salary'),
                  tier='industry_title')
        )

    return queries

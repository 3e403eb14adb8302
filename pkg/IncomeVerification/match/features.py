import numpy as np

from IncomeVerification.canon import canonicalize, default_alias_table
from IncomeVerification.core.identity import redact
from IncomeVerification.retrieval.industry import infer_industry

from .similarity import ADDRESS_FIELDS, address_score, employment_sim, name_score


__all__ = ['FEATURE_NAMES', 'MatchFeatures', 'build_match_features']


FEATURE_NAMES = (
    ('name_score',) + ADDRESS_FIELDS + ('employer_cos', 'title_cos', 'industry_match')
)


class MatchFeatures():
    """Similarity features of one (identity, source record) pair.

    Masked features were not computable because one side lacked the field;
    their value is stored as 0.

    Parameters
    ----------
    values : array_like
        One value per entry of ``FEATURE_NAMES``.
    mask : array_like of bool
        True where the feature was computed.
    """

    def __init__(self, values, mask):
        values = np.asarray(values, dtype=float)
        mask = np.asarray(mask, dtype=bool)
        if values.shape != (len(FEATURE_NAMES),) or mask.shape != values.shape:
            raise ValueError(
                f"Expected {len(FEATURE_NAMES)} features, got {values.shape}."
            )
        if np.any((values < 0) | (values > 1)):
            raise ValueError("Similarity features must lie in [0, 1].")

        self.values = np.where(mask, values, 0.0)
        self.mask = mask

    @classmethod
    def from_components(cls, components):
        """Build features from a name -> value dict where None marks masked."""
        values = []
        mask = []
        for name in FEATURE_NAMES:
            value = components.get(name)
            mask.append(value is not None)
            values.append(0.0 if value is None else float(value))

        return cls(values, mask)

    def __getitem__(self, name):
        index = FEATURE_NAMES.index(name)
        if not self.mask[index]:
            return None
        return self.values[index]

    def to_dict(self):
        return {name: self[name] for name in FEATURE_NAMES}

    def __eq__(self, other):
        if not isinstance(other, MatchFeatures):
            return NotImplemented
        return (
            np.array_equal(self.mask, other.mask)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        present = {k: round(v, 3) for k, v in self.to_dict().items() if v is not None}
        return f'MatchFeatures({present})'


def build_match_features(
        identity, record, industry_table,
        alias_table=None, initial_factor=0.9, conflict_factor=0.7):
    """Compare an identity with the identity fragment of a source record.

    The record's employer and occupation are canonicalized before the
    comparison; the identity is expected to be canonical already.

    Parameters
    ----------
    identity : Identity
    record : SourceRecord
    industry_table : IndustryTable
    alias_table : AliasTable, optional
        Defaults to the shipped alias table.
    initial_factor, conflict_factor : float, optional
        Middle name factors passed to ``name_score``.

    Returns
    -------
    MatchFeatures
    """
    alias_table = alias_table if alias_table is not None else default_alias_table()
    fragment = dict(record.identity_fragment)
    if fragment.get('employer'):
        fragment['employer'] = canonicalize(fragment['employer'], 'employer', alias_table)
    if fragment.get('occupation'):
        fragment['occupation'] = canonicalize(
            fragment['occupation'], 'title', alias_table
        )

    components = {}

    name = fragment.get('name')
    if identity.name is not None and name and name.get('first') and name.get('last'):
        components['name_score'] = name_score(
            identity.name, name, initial_factor, conflict_factor
        )

    components.update(address_score(identity.address, fragment.get('address')))
    components.update(employment_sim(redact(identity), fragment))

    industry_a = infer_industry(identity.employer, industry_table)
    industry_b = infer_industry(fragment.get('employer'), industry_table)
    if industry_a is not None and industry_b is not None:
        components['industry_match'] = float(industry_a == industry_b)

    return MatchFeatures.from_components(components)

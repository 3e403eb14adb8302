from IncomeVerification.dataStructure import Structure, String
from IncomeVerification.core.money import Money
from .attributes import SalaryAttributes, SourceRecord, parse_money_text
from .fragments import parse_name, parse_location


__all__ = ['StructuredSchema', 'extract_structured']


class StructuredSchema(Structure):
    """Field names of a structured (government) salary row.

    The defaults mirror the government payloads of the corpus.
    """

    name = String(default='name')
    salary = String(default='salary')
    bonus = String(default='bonus')
    agency = String(default='agency')
    location = String(default='location')
    occupation = String(default='occupation')
    year = String(default='year')

    _parameters = ['name', 'salary', 'bonus', 'agency', 'location', 'occupation', 'year']


def extract_structured(row, schema=None, record_id='structured'):
    """Extract a government record from a structured row.

    ``base_median`` is the salary and ``total_median`` the salary plus bonus;
    a missing or unparsable bonus counts as zero.

    Parameters
    ----------
    row : dict
        Field values (strings or numbers).
    schema : StructuredSchema, optional
    record_id : str, optional

    Returns
    -------
    SourceRecord
        Discardable (with reason) if the salary cannot be parsed.

    Examples
    --------
    A government row ('$84,443', bonus '$10000') yields base_median 84443 and
    total_median 94443.
    """
    if schema is None:
        schema = StructuredSchema()

    def field(key):
        value = row.get(getattr(schema, key))
        if value is None:
            return None
        value = str(value).strip()
        return value or None

    fragment = {}
    if field('name'):
        name = parse_name(field('name'))
        if name is not None:
            fragment['name'] = name
    if field('location'):
        fragment['address'] = parse_location(field('location'))
    if field('agency'):
        fragment['employer'] = field('agency')
    if field('occupation'):
        fragment['occupation'] = field('occupation')
    if field('year'):
        fragment['year'] = field('year')

    salary = parse_money_text(field('salary'))
    if salary is None:
        return SourceRecord(
            record_id=record_id,
            source_type='government',
            identity_fragment=fragment,
            discard_reason=f'unparsable salary {field("salary")!r}',
        )

    bonus = parse_money_text(field('bonus')) or Money(0)
    attributes = SalaryAttributes(base_median=salary, total_median=salary + bonus)

    return SourceRecord(
        record_id=record_id,
        source_type='government',
        identity_fragment=fragment,
        attributes=attributes,
    )

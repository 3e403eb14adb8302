import datetime

from IncomeVerification.IncomeVerificationError import ContractViolation
from IncomeVerification.dataStructure import (
    Structure, Typed, String, NonEmptyString, StateCode, dumps
)
from .money import MoneyParameter


__all__ = [
    'Name', 'Address', 'Identity', 'RedactedIdentity',
    'redact', 'identity_from_dict', 'identity_to_dict',
]


class Date(Typed):
    """Calendar date; ISO strings (YYYY-MM-DD) are cast."""

    ty = datetime.date

    def cast_value(self, value):
        if isinstance(value, str):
            value = datetime.date.fromisoformat(value.strip())
        return value


class Name(Structure):
    """Personal name.

    Attributes
    ----------
    first : str
    middle : str, optional
    last : str
    """

    first = NonEmptyString()
    middle = String(is_optional=True)
    last = NonEmptyString()

    _parameters = ['first', 'middle', 'last']

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        if self.first is None or self.last is None:
            raise ContractViolation("Name requires first and last name.")
        if self.middle is not None and not self.middle.strip():
            self.middle = None

    @property
    def full(self):
        """str: 'first last', without middle name."""
        return f'{self.first} {self.last}'


class Address(Structure):
    """Postal address; every component is optional."""

    street = String(is_optional=True)
    city = String(is_optional=True)
    county = String(is_optional=True)
    state = StateCode(is_optional=True)
    zip = String(is_optional=True)
    country = String(is_optional=True)

    _parameters = ['street', 'city', 'county', 'state', 'zip', 'country']

    def __init__(self, *args, **kwargs):
        kwargs = {
            key: (None if isinstance(value, str) and not value.strip() else value)
            for key, value in kwargs.items()
        }
        super().__init__(*args, **kwargs)


class Identity(Structure):
    """Input row of the verification task.

    Attributes
    ----------
    name : Name, optional
        Missing for disclosure records, which carry no personal names.
    address : Address
    dob : datetime.date, optional
    employer : str
    job_title : str
    stated_income : Money, optional
        Annual income the person claims; must be positive.
    identity_id : str, optional
        Row identifier used in label and report files.

    Notes
    -----
    Model feature builders never receive an ``Identity`` directly, only its
    ``RedactedIdentity`` projection (see ``redact``).
    """

    name = Typed(ty=Name, is_optional=True)
    address = Typed(ty=Address, default=Address())
    dob = Date(is_optional=True)
    employer = NonEmptyString()
    job_title = NonEmptyString()
    stated_income = MoneyParameter(is_optional=True)
    identity_id = String(is_optional=True)

    _parameters = [
        'name', 'address', 'dob', 'employer', 'job_title',
        'stated_income', 'identity_id',
    ]

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        if self.employer is None or self.job_title is None:
            raise ContractViolation("Identity requires employer and job_title.")
        self.employer = ' '.join(self.employer.split())
        self.job_title = ' '.join(self.job_title.split())
        if self.stated_income is not None and self.stated_income.cents <= 0:
            raise ContractViolation("stated_income must be positive.")

    def replace(self, **changes):
        """Return a copy with some fields replaced."""
        values = {param: getattr(self, param) for param in self._parameters}
        values.update(changes)
        return Identity(**values)

    def to_dict(self):
        return identity_to_dict(self)

    def __eq__(self, other):
        if not isinstance(other, Identity):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(dumps(self.to_dict()))

    def __repr__(self):
        return (
            f'Identity(employer={self.employer!r}, job_title={self.job_title!r}, '
            f'id={self.identity_id!r})'
        )


class RedactedIdentity(Structure):
    """Identity projection without name, date of birth, street or zip."""

    employer = NonEmptyString()
    job_title = NonEmptyString()
    city = String(is_optional=True)
    state = StateCode(is_optional=True)

    _parameters = ['employer', 'job_title', 'city', 'state']


def redact(identity):
    """Project an identity onto the fields model features may use.

    Parameters
    ----------
    identity : Identity

    Returns
    -------
    RedactedIdentity
    """
    return RedactedIdentity(
        employer=identity.employer,
        job_title=identity.job_title,
        city=identity.address.city,
        state=identity.address.state,
    )


def identity_from_dict(data):
    """Create an ``Identity`` from a nested or flat dictionary.

    Both nested ({"name": {"first": ...}}) and flat ({"first_name": ...})
    layouts are accepted. Empty strings count as absent.

    Parameters
    ----------
    data : dict

    Returns
    -------
    Identity
    """
    def get(key, container=data):
        value = container.get(key)
        if isinstance(value, str) and not value.strip():
            return None
        return value

    name = data.get('name')
    if isinstance(name, dict):
        first, middle, last = get('first', name), get('middle', name), get('last', name)
    else:
        first, middle, last = get('first_name'), get('middle_name'), get('last_name')

    address = data.get('address')
    if not isinstance(address, dict):
        address = {
            key: data.get(key)
            for key in ('street', 'city', 'county', 'state', 'zip', 'country')
        }
    address = {
        key: (str(value) if value is not None else None)
        for key, value in address.items()
    }

    stated_income = get('stated_income')
    if isinstance(stated_income, str):
        from IncomeVerification.extract.attributes import parse_money_text
        parsed = parse_money_text(stated_income)
        if parsed is None:
            raise ContractViolation(f"Unparsable stated_income {stated_income!r}.")
        stated_income = parsed

    identity_id = get('identity_id')
    return Identity(
        name=Name(first=first, middle=middle, last=last) if first and last else None,
        address=Address(**address),
        dob=get('dob'),
        employer=get('employer'),
        job_title=get('job_title') or get('position'),
        stated_income=stated_income,
        identity_id=str(identity_id) if identity_id is not None else None,
    )


def identity_to_dict(identity):
    """Serialize an ``Identity`` into the nested dictionary layout."""
    return {
        'identity_id': identity.identity_id,
        'name': identity.name.to_dict() if identity.name is not None else None,
        'address': identity.address.to_dict(),
        'dob': identity.dob.isoformat() if identity.dob is not None else None,
        'employer': identity.employer,
        'job_title': identity.job_title,
        'stated_income': (
            identity.stated_income.dollars
            if identity.stated_income is not None else None
        ),
    }

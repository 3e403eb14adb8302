import copy
import math
import operator

import numpy as np

from .dataStructure import Descriptor


__all__ = [
    'ParameterBase', 'Constant', 'Switch',
    'Typed', 'Bool', 'Integer', 'Float', 'String', 'Tuple', 'List', 'Dict',
    'NdArray',
    'Ranged', 'RangedInteger', 'RangedFloat',
    'Unsigned', 'UnsignedInteger', 'UnsignedFloat',
    'Sized', 'SizedNdArray', 'DimensionalizedArray', 'Vector', 'Matrix',
    'NonEmptyString', 'Ratio', 'StateCode', 'STATE_CODES',
]


class ParameterBase(Descriptor):
    """Base class for validated parameters.

    Parameters can have a default value, can be flagged as optional and may
    prepare (cast) values before checking them.

    Attributes
    ----------
    default : Any
        Default value of the parameter. Returned as a deep copy so mutable
        defaults are never shared between instances.
    is_optional : bool
        If True, the parameter is not required.
    unit : str
        Unit of the parameter.
    description : str
        Description of the parameter.

    See Also
    --------
    Descriptor
    Structure

    """

    def __init__(
            self,
            *args,
            default=None,
            is_optional=False,
            unit=None,
            description=None,
            **kwargs):
        self.default = default
        self.is_optional = is_optional
        self.unit = unit
        self.description = description
        super().__init__(*args, **kwargs)

    @property
    def default(self):
        """Any: Default value of the parameter."""
        return copy.deepcopy(self._default)

    @default.setter
    def default(self, value):
        if value is not None:
            val = self._prepare(None, value, recursive=True)
            self._check(None, val, recursive=True)

        self._default = value

    def get_default_value(self, instance):
        """Return the prepared default value."""
        default = self.default

        if default is not None:
            default = self._prepare(instance, default, recursive=True)
            self._check(instance, default, recursive=True)

        return default

    def __get__(self, instance, cls):
        if instance is None:
            return self

        try:
            value = Descriptor.__get__(self, instance, cls)
        except KeyError:
            value = self.get_default_value(instance)

        return value

    def __set__(self, instance, value):
        if value is None:
            value = self.get_default_value(instance)

        if value is not None:
            value = self._prepare(instance, value, recursive=True)
            self._check(instance, value, recursive=True)

        try:
            if self.name in instance._parameters:
                instance._parameters_dict[self.name] = value
        except AttributeError:
            pass

        super().__set__(instance, value)

    def _prepare(self, instance, value, recursive=False):
        """Cast value before it is checked. Override in subclasses."""
        return value

    def _check(self, instance, value, recursive=False):
        """Check value. Override in subclasses; raise on violation."""
        return


# %% Constant / Switch
class Constant(ParameterBase):
    """Parameter that cannot be modified after class creation."""

    def __init__(self, value, *args, **kwargs):
        super().__init__(*args, default=value, **kwargs)

    def __set__(self, instance, value):
        raise ValueError("Cannot modify constant parameter.")


class Switch(ParameterBase):
    """Parameter restricted to a list of valid options.

    Parameters
    ----------
    valid : list
        Valid options.
    """

    def __init__(self, *args, valid, **kwargs):
        if not isinstance(valid, list):
            raise TypeError("Expected a list for valid entries")
        if not valid:
            raise ValueError("The valid options list cannot be empty.")
        self.valid = valid

        super().__init__(*args, **kwargs)

    def _check(self, instance, value, recursive=False):
        if value not in self.valid:
            raise ValueError(f"Value {value!r} must be one of {self.valid}")

        if recursive:
            super()._check(instance, value, recursive)


# %% Typed
class Typed(ParameterBase):
    """Parameter constrained to a type ``ty``.

    Subclasses either set ``ty`` as class attribute or it is passed at
    instantiation. ``cast_value`` can be overridden for lenient casting.
    """

    def __init__(self, *args, ty=None, **kwargs):
        if ty is not None:
            self.ty = ty
        elif not hasattr(self, 'ty'):
            raise ValueError(
                "Type must be provided either in a subclass or during instantiation."
            )

        super().__init__(*args, **kwargs)

    def cast_value(self, value):
        return value

    def _prepare(self, instance, value, recursive=False):
        value = self.cast_value(value)

        if recursive:
            value = super()._prepare(instance, value, recursive)

        return value

    def _check(self, instance, value, recursive=False):
        if not isinstance(value, self.ty):
            raise TypeError(f"Expected type {self.ty}, got {type(value)}")

        if recursive:
            super()._check(instance, value, recursive)


class Bool(Typed):
    """Boolean parameter; integers 0 and 1 are cast."""

    ty = bool

    def cast_value(self, value):
        if isinstance(value, (int, np.bool_)) and value in (0, 1):
            value = bool(value)
        return value


class Integer(Typed):
    """Integer parameter; numpy integers are cast."""

    ty = int

    def cast_value(self, value):
        if isinstance(value, np.integer):
            value = int(value)
        return value

    def _check(self, instance, value, recursive=False):
        if isinstance(value, bool):
            raise TypeError("Expected an integer, got bool")

        super()._check(instance, value, recursive)


class Float(Typed):
    """Float parameter; integers and numpy numbers are cast."""

    ty = float

    def cast_value(self, value):
        if isinstance(value, (int, np.number)) and not isinstance(value, bool):
            value = float(value)
        return value


class String(Typed):
    """String parameter."""

    ty = str


class NonEmptyString(String):
    """String parameter that must contain non-whitespace characters."""

    def _check(self, instance, value, recursive=False):
        if isinstance(value, str) and not value.strip():
            raise ValueError(f"{getattr(self, 'name', 'value')} must not be empty.")

        super()._check(instance, value, recursive)


class Tuple(Typed):
    """Tuple parameter; lists are cast."""

    ty = tuple

    def cast_value(self, value):
        if isinstance(value, list):
            value = tuple(value)
        return value


class List(Typed):
    """List parameter."""

    ty = list


class Dict(Typed):
    """Dictionary parameter."""

    ty = dict


class NdArray(Typed):
    """Numpy array parameter; lists and scalars are cast."""

    ty = np.ndarray

    def cast_value(self, value):
        if isinstance(value, (list, tuple)):
            value = np.array(value, dtype=float)
        elif isinstance(value, (int, float)):
            value = np.array((value,), dtype=float)

        return value


# %% Ranged
class Ranged(ParameterBase):
    """Parameter within lower and upper bounds.

    By default, bounds are inclusive: a value violates the lower bound if
    ``lb_op(value, lb)`` is True (``operator.lt``), and the upper bound if
    ``ub_op(value, ub)`` is True (``operator.gt``).
    """

    def __init__(
            self, *args,
            lb=-math.inf, lb_op=operator.lt,
            ub=math.inf, ub_op=operator.gt,
            **kwargs):
        self.lb = lb
        self.lb_op = lb_op
        self.ub = ub
        self.ub_op = ub_op

        super().__init__(*args, **kwargs)

    def check_range(self, value):
        value_array = np.asarray(value)
        if np.any(self.lb_op(value_array, self.lb)):
            raise ValueError(f"Value {value} is below the lower bound of {self.lb}")
        if np.any(self.ub_op(value_array, self.ub)):
            raise ValueError(f"Value {value} is above the upper bound of {self.ub}")
        if np.any(np.isnan(value_array)):
            raise ValueError("Value must not be NaN")

    def _check(self, instance, value, recursive=False):
        self.check_range(value)

        if recursive:
            super()._check(instance, value, recursive)


class RangedInteger(Integer, Ranged):
    """Integer parameter within bounds."""


class RangedFloat(Float, Ranged):
    """Float parameter within bounds."""


class Unsigned(Ranged):
    """Non-negative parameter."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, lb=0, lb_op=operator.lt, **kwargs)


class UnsignedInteger(Integer, Unsigned):
    """Non-negative integer parameter."""


class UnsignedFloat(Float, Unsigned):
    """Non-negative float parameter."""


class Ratio(RangedFloat):
    """Float parameter in the closed interval [0, 1]."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, lb=0, ub=1, **kwargs)


# %% Sized
class Sized(ParameterBase):
    """Parameter with an expected shape.

    Parameters
    ----------
    size : int, str or tuple
        Expected shape. Strings refer to other (integer) attributes of the
        instance, e.g. ``size=('n_features',)``.
    """

    def __init__(self, *args, size, **kwargs):
        if not isinstance(size, tuple):
            size = (size,)
        self.size = size

        super().__init__(*args, **kwargs)

    @property
    def is_independent(self):
        """bool: True if the size does not depend on other attributes."""
        return not any(isinstance(i, str) for i in self.size)

    def get_expected_size(self, instance):
        if not self.is_independent and instance is None:
            raise ValueError("Parameter is not independent, need instance!")

        expected_size = []
        for i in self.size:
            if isinstance(i, int):
                expected_size.append(i)
                continue

            dim = getattr(instance, i)
            if dim is None:
                raise ValueError(f"Value for {i} not set.")
            expected_size.append(int(dim))

        return tuple(expected_size)

    def check_size(self, instance, value):
        try:
            expected_size = self.get_expected_size(instance)
        except ValueError:
            return

        if np.shape(value) != expected_size:
            raise ValueError(
                f"Expected shape {expected_size}, got {np.shape(value)}"
            )

    def _check(self, instance, value, recursive=False):
        self.check_size(instance, value)

        if recursive:
            super()._check(instance, value, recursive)


class SizedNdArray(NdArray, Sized):
    """Numpy array with an expected shape."""


class DimensionalizedArray(NdArray):
    """Numpy array with a fixed number of dimensions ``n_dim``."""

    n_dim = None

    def __init__(self, *args, n_dim=None, **kwargs):
        if n_dim is not None:
            self.n_dim = n_dim
        if self.n_dim is None:
            raise ValueError('Dimensionality (n_dim) must be set.')

        super().__init__(*args, **kwargs)

    def _check(self, instance, value, recursive=False):
        if isinstance(value, np.ndarray) and value.ndim != self.n_dim:
            raise ValueError(
                f"Expected {self.n_dim}-dimensional array, got {value.ndim}"
            )

        if recursive:
            super()._check(instance, value, recursive)


class Vector(DimensionalizedArray):
    """One-dimensional numpy array."""

    n_dim = 1


class Matrix(DimensionalizedArray):
    """Two-dimensional numpy array."""

    n_dim = 2


# %% Domain specific
STATE_CODES = [
    'AL', 'AK', 'AZ', 'AR', 'CA', 'CO', 'CT', 'DE', 'FL', 'GA',
    'HI', 'ID', 'IL', 'IN', 'IA', 'KS', 'KY', 'LA', 'ME', 'MD',
    'MA', 'MI', 'MN', 'MS', 'MO', 'MT', 'NE', 'NV', 'NH', 'NJ',
    'NM', 'NY', 'NC', 'ND', 'OH', 'OK', 'OR', 'PA', 'RI', 'SC',
    'SD', 'TN', 'TX', 'UT', 'VT', 'VA', 'WA', 'WV', 'WI', 'WY',
    'DC', 'PR', 'GU', 'VI', 'AS', 'MP',
]
"""list: US states (first 50 entries), DC and territories."""


class StateCode(Switch):
    """Two-letter US state or territory code; input is upper-cased."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, valid=STATE_CODES, **kwargs)

    def _prepare(self, instance, value, recursive=False):
        if isinstance(value, str):
            value = value.strip().upper()

        if recursive:
            value = super()._prepare(instance, value, recursive)

        return value

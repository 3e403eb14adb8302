from abc import ABC
from inspect import Parameter, Signature

from addict import Dict


__all__ = ['Descriptor', 'StructMeta', 'Structure']


# %% Descriptors
class Descriptor(ABC):
    """Base class for descriptors.

    A descriptor stores its value in the ``__dict__`` of the instance that owns
    it. Classes using descriptors must be created by ``StructMeta`` so that every
    descriptor learns its attribute name.

    See Also
    --------
    StructMeta
    ParameterBase

    """

    def __init__(self, *args, **kwargs):
        pass

    def __get__(self, instance, cls):
        return instance.__dict__[self.name]

    def __set__(self, instance, value):
        if value is None:
            instance.__dict__.pop(self.name, None)
            return

        instance.__dict__[self.name] = value

    def __delete__(self, instance):
        del instance.__dict__[self.name]


def _unique(*groups):
    return list(dict.fromkeys(name for group in groups for name in group))


class StructMeta(type):
    """Metaclass collecting the descriptors of a class and its bases.

    Every descriptor is told its attribute name and the class receives a
    signature over all descriptor names, so that ``Structure.__init__`` can
    bind positional and keyword arguments.

    Attributes
    ----------
    _descriptors : list
        Names of all descriptors; own ones first, then those of the bases.
    _parameters : list
        Names of the parameters that make up ``Structure.parameters``.
    _optional_parameters : list
        Parameters flagged as optional.

    """

    def __new__(mcs, clsname, bases, clsdict):
        own = []
        for name, value in clsdict.items():
            if isinstance(value, Descriptor):
                value.name = name
                own.append(name)

        clsobj = super().__new__(mcs, clsname, bases, clsdict)

        clsobj._descriptors = _unique(
            own, *(getattr(base, '_descriptors', []) for base in bases)
        )
        clsobj._parameters = _unique(
            clsdict.get('_parameters', []),
            *(getattr(base, '_parameters', []) for base in bases)
        )

        optional = []
        for param in clsobj._parameters:
            descriptor = getattr(clsobj, param)
            if isinstance(descriptor, Descriptor) and descriptor.is_optional:
                optional.append(param)
        clsobj._optional_parameters = optional

        clsobj.__signature__ = Signature(
            Parameter(name, Parameter.POSITIONAL_OR_KEYWORD)
            for name in clsobj._descriptors
        )

        return clsobj


# %% Structure
class Structure(metaclass=StructMeta):
    """Base class for objects whose attributes are validated descriptors.

    Positional and keyword arguments of ``__init__`` are bound against the
    signature generated by ``StructMeta``, i.e. against the descriptor names.
    """

    def __init__(self, *args, **kwargs):
        self._parameters_dict = Dict()
        for param in self._parameters:
            value = getattr(self, param)
            if param in self._optional_parameters and value is None:
                continue

            self._parameters_dict[param] = value

        bound = self.__signature__.bind_partial(*args, **kwargs)
        for name, val in bound.arguments.items():
            setattr(self, name, val)

    @property
    def parameters(self):
        """dict: Parameters of the instance."""
        return self._parameters_dict

    @parameters.setter
    def parameters(self, parameters):
        for param, value in parameters.items():
            if param not in self._parameters:
                raise ValueError(f'Not a valid parameter: "{param}".')
            if value is not None:
                setattr(self, param, value)

    def to_dict(self):
        """dict: Values of all parameters.

        Nested structures are converted recursively, tuples become lists.
        """
        return {param: _plain(getattr(self, param)) for param in self._parameters}


def _plain(value):
    if isinstance(value, Structure):
        return value.to_dict()
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value

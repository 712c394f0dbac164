"""Init enums package"""
from .families import Family, Mode, Conditioning
from .methods import TrainMethod, AdaptMethod
from .transforms import ElementwiseKind, FilterKind, LabelerKind,\
                        SubstitutionKind, PositionFunction, RearrangeKind


def check_is_enum(enum_cls, value):
    """Normalise ``value`` to the string value of a member of ``enum_cls``.

    Accepts a member, a member value or a member name.

    Returns:
        str: the member value, or None when value is None.

    Raises:
        ValueError: If value does not name a member of enum_cls.
    """
    if value is None:
        return None
    if isinstance(value, enum_cls):
        return value.value
    if isinstance(value, str):
        for member in enum_cls:
            if value in (member.value, member.name):
                return member.value
        raise ValueError(
            '[%s] %r is not one of %s'
            % (enum_cls.__name__, value, [m.value for m in enum_cls]))
    raise ValueError('[%s] Type Error' % type(value).__name__)

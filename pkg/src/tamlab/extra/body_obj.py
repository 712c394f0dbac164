# pylint: disable=too-few-public-methods
"""Config Objects

The unit of every tamlab configuration. Support turning each config object
to json format and listing every schema violation at once.

"""
import copy
import json

from tamlab.extra.exceptions import ConfigError


class ComplexEncoder(json.JSONEncoder):
    """Extending JSONEncoder

    Define own JSON Encoder for the object having the function `jsonable`. It will
    return Dictionary object is having `jsonable`.

    Returns:
        function: `jsonable`
    """
    def default(self, obj):  # pylint: disable=arguments-differ
        if hasattr(obj, 'jsonable'):
            return obj.jsonable()
        # Let the base class default method raise the TypeError
        return json.JSONEncoder.default(self, obj)


class ConfigBody:
    """Base class of all config objects.

    Attributes start from ``DEFAULTS`` and are overridden by the keyword
    arguments that are not None. ``NESTED`` maps attribute names to the
    ConfigBody subclass their dict form is turned into.

    """
    DEFAULTS = {}
    NESTED = {}

    def __init__(self, **kwargs):
        """Add the defaults and the argument passed in as attributes."""
        self.__dict__.update(copy.deepcopy(self.DEFAULTS))
        for key, val in kwargs.items():
            if val is None:
                continue
            if key in self.NESTED and isinstance(val, dict):
                val = self.NESTED[key].from_dict(val)
            self.__dict__[key] = val

    def __eq__(self, other):
        return type(self) is type(other) and self.jsonable() == other.jsonable()

    def __repr__(self):
        return '%s(%s)' % (type(self).__name__, self.to_json(indent=None))

    def jsonable(self):
        """Return the Dictionary of Object, nested configs included."""
        return {
            key: val.jsonable() if isinstance(val, ConfigBody) else val
            for key, val in sorted(self.__dict__.items())}

    def to_json(self, indent=2):
        """Dump the object as canonical json text."""
        return json.dumps(self, cls=ComplexEncoder, sort_keys=True,
                          indent=indent)

    @classmethod
    def from_dict(cls, data):
        """Build an object from a plain dict such as a parsed config file."""
        return cls(**data)

    def replace(self, **kwargs):
        """Return a copy with the given attributes overridden."""
        data = copy.deepcopy(self.__dict__)
        data.update((k, v) for k, v in kwargs.items() if v is not None)
        return type(self)(**data)

    def validate(self):
        """Return the list of every violation of the schema.

        Subclasses extend :meth:`_violations`; unknown keys are always
        violations.
        """
        name = type(self).__name__
        violations = [
            '%s: unknown key %r' % (name, key)
            for key in sorted(self.__dict__) if key not in self.DEFAULTS]
        violations.extend(
            '%s: %s' % (name, msg) for msg in self._violations())
        for key in sorted(self.NESTED):
            nested = self.__dict__.get(key)
            if isinstance(nested, ConfigBody):
                violations.extend(nested.validate())
            else:
                violations.append(
                    '%s: %s must be a %s object'
                    % (name, key, self.NESTED[key].__name__))
        return violations

    def check(self):
        """Raise ConfigError listing every violation, return self otherwise."""
        violations = self.validate()
        if violations:
            raise ConfigError(violations)
        return self

    def _violations(self):
        return []

    def _int_at_least(self, key, minimum):
        val = self.__dict__.get(key)
        if isinstance(val, bool) or not isinstance(val, int) or val < minimum:
            return ['%s must be an integer >= %s, got %r' % (key, minimum, val)]
        return []

    def _real_in(self, key, low, high=None, low_open=False):
        val = self.__dict__.get(key)
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            return ['%s must be a real number, got %r' % (key, val)]
        too_low = val <= low if low_open else val < low
        if too_low or (high is not None and val > high):
            bound = '(%s, %s]' if low_open else '[%s, %s]'
            return ['%s must lie in %s, got %r'
                    % (key, bound % (low, 'inf' if high is None else high), val)]
        return []

    def _choice(self, key, enum_cls):
        val = self.__dict__.get(key)
        choices = [member.value for member in enum_cls]
        if val not in choices:
            return ['%s must be one of %s, got %r' % (key, choices, val)]
        return []

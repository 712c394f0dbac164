"""Decorators shared by jobs and config objects."""
import logging
from collections.abc import Mapping
from functools import wraps

from tamlab.extra.const import JobStatus
from tamlab.extra.exceptions import ConfigError

logger = logging.getLogger(__name__)


def block_method(func):
    """Return None instead of a value while the Job is unfinished.

    A finished job asked for an attribute it does not have also gets None,
    with an error in the log.
    """
    @wraps(func)
    def wrapper(self, *args, **kwargs):
        if not self.is_done():
            logger.info('[Job] %s not finished, %s unavailable',
                        self.name, ', '.join(map(repr, args)))
            return None
        try:
            return func(self, *args, **kwargs)
        except AttributeError:
            logger.error('[Job] %s has no attribute %s',
                         self.name, ', '.join(map(repr, args)))
            return None

    return wrapper


def update(func):
    """Copy the keys of a task result dict onto the job.

    A result that is not a mapping fails the job and skips ``func``.
    """
    @wraps(func)
    def wrapper(self, task_result, *args, **kwargs):
        kind = type(self).__name__
        if not isinstance(task_result, Mapping):
            logger.error('[%s] %s got a %s result, expected a dict',
                         kind, self.name, type(task_result).__name__)
            self.status = JobStatus.FAIL
            return None
        logger.debug('[%s] %s update result: %s',
                     kind, self.name, sorted(task_result))
        self.result = task_result
        for attr, val in task_result.items():
            setattr(self, attr, val)
        return func(self, task_result, *args, **kwargs)

    return wrapper


def config_obj(required):
    """Guard the ``create`` classmethod of a ConfigBody.

    Args:
        required (list(str)): Keywords that must be given and not None.
            None means nothing is required.

    Raises:
        ConfigError: Listing every missing required keyword.
    """
    def decorator(func):
        @wraps(func)
        def wrapper(cls, *args, **kwargs):
            missing = [key for key in sorted(required or ())
                       if kwargs.get(key) is None]
            if missing:
                raise ConfigError(
                    ['%s: missing required value %s' % (cls.__name__, key)
                     for key in missing])
            return func(cls, *args, **kwargs)

        return wrapper

    return decorator

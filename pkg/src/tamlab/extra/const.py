# pylint: disable=too-few-public-methods
"""Define variables of tamlab for all modules."""

DISCARD = -1
'int: Label used for inputs a classification pipeline throws away.'

PATH_TOKEN_OFFSET = 100
'int: Offset added to rasterized cells of a path target sequence.'

SPLIT_FORMAT = 'tamlab-split'
CHECKPOINT_FORMAT = 'tamlab-checkpoint'
FORMAT_VERSION = 1


class JobStatus:
    """Status for tasks and jobs."""
    DONE = 'done'
    PENDING = 'pending'
    FAIL = 'fail'
    RUNNING = 'running'
    DONE_STATUS = [DONE, FAIL]
    FAIL_STATUS = [FAIL]
    ALL_STATUS = [PENDING, RUNNING, DONE, FAIL]


class StopReason:
    """Why an inner adaptation loop ended."""
    NO_IMPROVEMENT = 'no-improvement'
    MAX_STEPS = 'max-steps'


class RecordKind:
    """Record kinds of a split file."""
    META = 'meta'
    TASK = 'task'
    EXAMPLE = 'example'

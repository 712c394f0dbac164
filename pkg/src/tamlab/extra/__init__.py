"""Init extra package"""
from .const import JobStatus, StopReason, RecordKind, DISCARD

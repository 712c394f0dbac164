"""tamlab

tamlab is a python laboratory for few-shot learning over discrete
sequences: synthetic benchmark generation, task-embedding conditioned
transformers trained by alternating minimization, and k-shot evaluation.

"""
import logging
import sys

from .context import Context
from .client import LabClient
from .plot import show_task_embeddings

__version__ = '0.3.1'

lab_logger = logging.getLogger(__name__)
lab_logger.addHandler(logging.NullHandler())


def enable_default_logger(level=logging.INFO):
    """Set the default logger handler for the package.

    Will set the root handles to empty list, prevent duplicate handlers added
    by other packages causing duplicate logging message.

    Args:
        level (int): Logging level of the package logger.
    """
    logging.root.handlers = []
    lab_logger.setLevel(level)

    if all(isinstance(handler, logging.NullHandler)
           for handler in lab_logger.handlers):

        default_handler = logging.StreamHandler(sys.stderr)
        default_handler.setFormatter(
            logging.Formatter(
                fmt='%(asctime)s [%(levelname)8s] '
                    '%(message)s',
                datefmt='%H:%M:%S')
        )
        lab_logger.addHandler(default_handler)

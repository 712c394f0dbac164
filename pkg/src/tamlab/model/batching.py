"""Collating examples into model batches."""
import numpy as np

from tamlab.enums import Family, check_is_enum


class Batch:
    """Examples of one family as arrays.

    Attributes:
        family (str): Family value.
        x (numpy.ndarray): (B, n) input tokens.
        y (numpy.ndarray): (B,) labels, or (B, m) targets right-padded
            with 0.
        mask (numpy.ndarray): (B, m) 1.0 on real target positions; None
            for classification.
    """
    def __init__(self, family, x, y, mask=None):
        self.family = family
        self.x = x
        self.y = y
        self.mask = mask

    def __len__(self):
        return self.x.shape[0]

    def take(self, indices):
        """Sub-batch of the rows ``indices``."""
        indices = np.asarray(indices, dtype=np.int64)
        return Batch(self.family, self.x[indices], self.y[indices],
                     None if self.mask is None else self.mask[indices])


def collate(examples, family):
    """Stack ``examples`` into a :class:`Batch`.

    Inputs of one task share their length; sequence targets may differ in
    length (paths) and are right-padded.
    """
    family = check_is_enum(Family, family)
    examples = list(examples)
    if not examples:
        raise ValueError('[Batch] no examples to collate')
    x = np.asarray([ex.x for ex in examples], dtype=np.int64)
    if not Family.is_sequence_output(family):
        return Batch(family, x, np.asarray([ex.y for ex in examples],
                                           dtype=np.int64))
    width = max(len(ex.y) for ex in examples)
    y = np.zeros((len(examples), width), dtype=np.int64)
    mask = np.zeros((len(examples), width))
    for row, ex in enumerate(examples):
        y[row, :len(ex.y)] = ex.y
        mask[row, :len(ex.y)] = 1.0
    return Batch(family, x, y, mask)

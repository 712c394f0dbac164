"""Task specifications, primitive inventories and task builders.

A task is three primitives applied in order. Classification and
transduction primitives are transforms; path-finding primitives are the
start, waypoint and end cells. Every builder either returns a
:class:`TaskData` or a :class:`Rejection`; rejection is an ordinary outcome.
"""
import functools
import logging

import numpy as np

from tamlab.benchgen import transforms as tf
from tamlab.benchgen.grid import gen_pathfinding_example
from tamlab.enums import Family, check_is_enum
from tamlab.extra.const import DISCARD
from tamlab.extra.utils import child_rng

logger = logging.getLogger(__name__)

POOL_STREAM = 1


class TaskSpec:
    """Symbolic description of one task.

    Attributes:
        family (str): Value of :class:`~tamlab.enums.Family`.
        transforms (tuple): (T1, T2, T3) for classification/transduction.
        class_map (list(int)): Raw outputs of the C classes, most frequent
            first (classification).
        start, end, waypoint (tuple): Cells (path-finding).
        primitive_ids (tuple(int)): Global inventory ids of the three slots
            (compositional mode).
        unseen_slot (int): Slot holding a held-out primitive, if any.
    """
    def __init__(self, family, transforms=None, class_map=None, start=None,
                 end=None, waypoint=None, primitive_ids=None,
                 unseen_slot=None):
        self.family = check_is_enum(Family, family)
        self.transforms = tuple(transforms) if transforms else None
        self.class_map = None if class_map is None \
            else [int(v) for v in class_map]
        self.start = _cell(start)
        self.end = _cell(end)
        self.waypoint = _cell(waypoint)
        self.primitive_ids = None if primitive_ids is None \
            else tuple(int(i) for i in primitive_ids)
        self.unseen_slot = None if unseen_slot is None else int(unseen_slot)
        self._check()

    def _check(self):
        if self.family == Family.pathfinding.value:
            if self.start is None or self.end is None or self.start == self.end:
                raise ValueError('[Benchgen] path task needs start != end, '
                                 'got %s and %s' % (self.start, self.end))
            if any(v < 0 for cell in (self.start, self.end, self.waypoint)
                   if cell is not None for v in cell):
                raise ValueError('[Benchgen] negative cell coordinate')
        elif self.transforms is None or len(self.transforms) != 3:
            raise ValueError('[Benchgen] %s task needs three transforms'
                             % self.family)
        if self.class_map is not None and \
                len(set(self.class_map)) != len(self.class_map):
            raise ValueError('[Benchgen] class_map values must be distinct')

    def to_dict(self):
        return {
            'family': self.family,
            'transforms': None if self.transforms is None
            else [t.to_dict() for t in self.transforms],
            'class_map': self.class_map,
            'start': _listed(self.start),
            'end': _listed(self.end),
            'waypoint': _listed(self.waypoint),
            'primitive_ids': None if self.primitive_ids is None
            else list(self.primitive_ids),
            'unseen_slot': self.unseen_slot,
        }

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if data.get('transforms') is not None:
            data['transforms'] = [tf.transform_from_dict(t)
                                  for t in data['transforms']]
        return cls(**data)

    def __eq__(self, other):
        return isinstance(other, TaskSpec) and self.to_dict() == other.to_dict()

    def __repr__(self):
        if self.family == Family.pathfinding.value:
            return 'TaskSpec(path %s -> %s via %s)' % (
                self.start, self.end, self.waypoint)
        return 'TaskSpec(%s %s)' % (self.family, list(self.transforms))


def _cell(cell):
    return None if cell is None else (int(cell[0]), int(cell[1]))


def _listed(cell):
    return None if cell is None else list(cell)


class Example:
    """One (x, y) pair; y is an int label or a tuple of tokens."""
    __slots__ = ('x', 'y')

    def __init__(self, x, y):
        self.x = tuple(int(v) for v in x)
        self.y = int(y) if np.isscalar(y) else tuple(int(v) for v in y)

    def to_dict(self):
        return {'x': list(self.x),
                'y': self.y if isinstance(self.y, int) else list(self.y)}

    def __eq__(self, other):
        return isinstance(other, Example) and \
            (self.x, self.y) == (other.x, other.y)

    def __repr__(self):
        return 'Example(x=%s, y=%s)' % (list(self.x), self.y)


class TaskData:
    """A task spec with its ordered example list."""
    def __init__(self, spec, examples):
        self.spec = spec
        self.examples = list(examples)

    def __len__(self):
        return len(self.examples)

    def __eq__(self, other):
        return isinstance(other, TaskData) and self.spec == other.spec \
            and self.examples == other.examples

    def support(self, k):
        """First k examples, the adaptation pool of a k-shot task."""
        return self.examples[:k]

    def query(self, support_size):
        """Examples after the adaptation pool, used for evaluation."""
        return self.examples[support_size:]


class Rejection:
    """Why a candidate task was not built."""
    def __init__(self, reason, details=None):
        self.reason = reason
        self.details = details or {}

    def __repr__(self):
        return 'Rejection(%s, %s)' % (self.reason, self.details)


class PrimitiveInventory:
    """The three primitive lists S1, S2, S3 under one global id space.

    Slot s owns ids ``offsets[s] .. offsets[s] + len(slots[s]) - 1``.
    """
    def __init__(self, family, slots):
        self.family = check_is_enum(Family, family)
        self.slots = [list(slot) for slot in slots]
        self.offsets = [0, len(self.slots[0]),
                        len(self.slots[0]) + len(self.slots[1])]

    @property
    def size(self):
        return sum(len(slot) for slot in self.slots)

    def slot_ids(self, slot):
        start = self.offsets[slot]
        return list(range(start, start + len(self.slots[slot])))

    def slot_of(self, global_id):
        for slot in (2, 1, 0):
            if global_id >= self.offsets[slot]:
                return slot
        raise IndexError(global_id)

    def primitive(self, global_id):
        slot = self.slot_of(global_id)
        return self.slots[slot][global_id - self.offsets[slot]]

    def to_dict(self):
        def dump(item):
            return item.to_dict() if isinstance(item, tf.Transform) \
                else list(item)
        return {'family': self.family,
                'slots': [[dump(item) for item in slot]
                          for slot in self.slots]}

    @classmethod
    def from_dict(cls, data):
        def load(item):
            return tf.transform_from_dict(item) if isinstance(item, dict) \
                else tuple(item)
        return cls(data['family'],
                   [[load(item) for item in slot] for slot in data['slots']])


def build_inventory(config):
    """Full primitive inventory for the family of ``config``."""
    vocab, length = config.vocab_size, config.seq_len
    if config.family == Family.classification.value:
        slots = [tf.elementwise_inventory(vocab), tf.filter_inventory(vocab),
                 tf.labeler_inventory()]
    elif config.family == Family.transduction.value:
        slots = [tf.elementwise_inventory(vocab),
                 tf.substitution_inventory(vocab, length),
                 tf.rearrange_inventory(length)]
    else:
        cells = [(r, c) for r in range(config.grid_size)
                 for c in range(config.grid_size)]
        slots = [cells, list(cells), list(cells)]
    return PrimitiveInventory(config.family, slots)


def spec_from_ids(inventory, ids, compositional=True, unseen_slot=None):
    """TaskSpec whose three slots are the primitives ``ids``.

    Plain path tasks ignore the waypoint slot and no task outside
    compositional mode records its primitive ids.
    """
    prims = [inventory.primitive(i) for i in ids]
    if inventory.family == Family.pathfinding.value:
        return TaskSpec(inventory.family, start=prims[0], end=prims[2],
                        waypoint=prims[1] if compositional else None,
                        primitive_ids=ids if compositional else None,
                        unseen_slot=unseen_slot)
    return TaskSpec(inventory.family, transforms=prims,
                    primitive_ids=ids if compositional else None,
                    unseen_slot=unseen_slot)


@functools.lru_cache(maxsize=4)
def candidate_pool(seed, size, vocab_size, seq_len):
    """Uniform random input sequences shared by every task of a split."""
    pool = child_rng(seed, POOL_STREAM).integers(
        0, vocab_size, size=(size, seq_len))
    pool.setflags(write=False)
    return pool


def probe_inputs(probe_seed, size, vocab_size, seq_len):
    return np.random.default_rng(probe_seed).integers(
        0, vocab_size, size=(size, seq_len))


# Pipelines

def classification_outputs(spec, inputs):
    """Raw T3(T2(T1(x))) for every row, DISCARD where T2 keeps nothing."""
    t1, t2, t3 = spec.transforms
    mapped = t1.apply_batch(inputs)
    return t3.apply_batch(mapped, t2.mask_batch(mapped))


def eval_classification_pipeline(spec, x):
    """Raw output of ``spec`` on one sequence, or DISCARD."""
    return int(classification_outputs(spec, np.asarray([x]))[0])


def class_labels(spec, raw):
    """Index of every raw output in ``spec.class_map``, DISCARD if absent."""
    labels = np.full(np.shape(raw), DISCARD, dtype=np.int64)
    for index, value in enumerate(spec.class_map):
        labels[raw == value] = index
    return labels


def transduction_outputs(spec, inputs):
    t1, t2, t3 = spec.transforms
    return t3.apply_batch(t2.apply_batch(t1.apply_batch(inputs)))


def eval_transduction_pipeline(spec, x, vocab_size=None):
    """T3(T2(T1(x))); None when a token leaves ``[0, vocab_size)``."""
    out = [int(v) for v in transduction_outputs(spec, np.asarray([x]))[0]]
    if vocab_size is not None and any(v < 0 or v >= vocab_size for v in out):
        return None
    return out


# Builders

def build_classification_task(t1, t2, t3, rng, pool, num_classes=4,
                              examples_per_task=500, **spec_fields):
    """Class-balanced classification task over the shared candidate ``pool``.

    The ``num_classes`` most frequent raw outputs over the pool (ties to
    the smaller value) become the classes. The pool is permuted by ``rng``
    and the first ``examples_per_task // num_classes`` inputs of every class
    are kept, in permuted order.
    """
    spec = TaskSpec(Family.classification.value, transforms=(t1, t2, t3),
                    **spec_fields)
    raw = classification_outputs(spec, pool)
    values, counts = np.unique(raw[raw != DISCARD], return_counts=True)
    if len(values) < num_classes:
        return Rejection('too-few-outputs', {'distinct': int(len(values))})
    order = np.lexsort((values, -counts))[:num_classes]
    spec.class_map = [int(v) for v in values[order]]

    quota = examples_per_task // num_classes
    perm = rng.permutation(len(pool))
    labels = class_labels(spec, raw[perm])
    rank = np.zeros_like(labels)
    for label in range(num_classes):
        hits = labels == label
        rank[hits] = np.arange(hits.sum())
    deficits = {label: int(quota - (labels == label).sum())
                for label in range(num_classes)
                if (labels == label).sum() < quota}
    if deficits:
        return Rejection('class-quota', {'deficits': deficits,
                                         'quota': quota})
    keep = (labels != DISCARD) & (rank < quota)
    inputs = pool[perm][keep]
    return TaskData(spec, [Example(x, y) for x, y in
                           zip(inputs, labels[keep])])


def build_transduction_task(t1, t2, t3, rng, pool, vocab_size=12,
                            examples_per_task=500, **spec_fields):
    """Transduction task keeping the first in-vocabulary outputs of the
    permuted pool."""
    spec = TaskSpec(Family.transduction.value, transforms=(t1, t2, t3),
                    **spec_fields)
    inputs = pool[rng.permutation(len(pool))]
    outputs = transduction_outputs(spec, inputs)
    valid = ((outputs >= 0) & (outputs < vocab_size)).all(axis=1)
    if valid.sum() < examples_per_task:
        return Rejection('out-of-range', {'in_range': int(valid.sum())})
    inputs, outputs = inputs[valid][:examples_per_task], \
        outputs[valid][:examples_per_task]
    return TaskData(spec, [Example(x, y) for x, y in zip(inputs, outputs)])


def build_pathfinding_task(spec, rng, examples_per_task=500, grid_size=10,
                           num_obstacles=8, max_resamples=1000):
    examples = [
        Example(*gen_pathfinding_example(spec, rng, grid_size, num_obstacles,
                                         max_resamples))
        for _ in range(examples_per_task)]
    return TaskData(spec, examples)


# Deduplication

def task_signature(spec, probe):
    """Bytes identifying the input-output behaviour of ``spec``.

    Classification compares class labels (with DISCARD), transduction raw
    outputs, both over the probe inputs; path tasks compare their cells.
    """
    if spec.family == Family.pathfinding.value:
        return repr((spec.start, spec.waypoint, spec.end)).encode()
    if spec.family == Family.classification.value:
        raw = classification_outputs(spec, probe)
        out = raw if spec.class_map is None else class_labels(spec, raw)
    else:
        out = transduction_outputs(spec, probe)
    return np.ascontiguousarray(out, dtype=np.int64).tobytes()


class Deduplicator:
    """Remembers task signatures and admits only new behaviours."""
    def __init__(self, probe):
        self.probe = probe
        self._seen = set()
        self.removed = 0

    def add(self, spec):
        """True if ``spec`` is new, False (and counted) if a duplicate."""
        signature = task_signature(spec, self.probe)
        if signature in self._seen:
            self.removed += 1
            return False
        self._seen.add(signature)
        return True


def dedup_tasks(tasks, probe):
    """Keep the first task of every equivalence class on ``probe``.

    Args:
        tasks (list): TaskSpec or TaskData items.
        probe (numpy.ndarray): Shared (n, L) probe inputs.
    """
    dedup = Deduplicator(probe)
    return [task for task in tasks
            if dedup.add(getattr(task, 'spec', task))]

"""Sequence transforms benchmark tasks are composed of.

Each transform has a per-sequence form (``apply`` on a list of ints) and a
batch form over an ``(n, L)`` integer array. Filters return a boolean mask
in batch form; labelers reduce the masked entries of every row.
"""
import numpy as np

from tamlab.enums import ElementwiseKind, FilterKind, LabelerKind,\
                         SubstitutionKind, PositionFunction, RearrangeKind,\
                         check_is_enum
from tamlab.extra.const import DISCARD
from tamlab.extra.exceptions import LabelerError


class Transform:
    """Base class: equality, hashing and dict form come from ``fields``."""
    group = None

    def fields(self):
        raise NotImplementedError

    def to_dict(self):
        return dict(self.fields(), group=self.group)

    def __eq__(self, other):
        return type(self) is type(other) and self.fields() == other.fields()

    def __hash__(self):
        return hash((self.group, tuple(sorted(self.fields().items()))))

    def __repr__(self):
        args = ', '.join('%s=%r' % kv for kv in sorted(self.fields().items()))
        return '%s(%s)' % (type(self).__name__, args)


class ElementwiseTransform(Transform):
    """``x -> op(x, v)`` with op one of mul, add, div (floor) and mod."""
    group = 'elementwise'

    def __init__(self, kind, v):
        self.kind = check_is_enum(ElementwiseKind, kind)
        self.v = int(v)
        minimum = 0 if self.kind == ElementwiseKind.add.value else 1
        if self.v < minimum:
            raise ValueError('[Transform] %s needs v >= %s, got %s'
                             % (self.kind, minimum, self.v))

    def fields(self):
        return {'kind': self.kind, 'v': self.v}

    def apply(self, seq):
        return [int(val) for val in self.apply_batch(np.asarray([seq]))[0]] \
            if len(seq) else []

    def apply_batch(self, arr):
        arr = np.asarray(arr, dtype=np.int64)
        if self.kind == 'mul':
            return arr * self.v
        if self.kind == 'add':
            return arr + self.v
        if self.kind == 'div':
            return arr // self.v
        return arr % self.v


def divisor_count_table(limit):
    """Number of positive divisors of every value in ``[0, limit]``; 0 -> 0."""
    table = np.zeros(limit + 1, dtype=np.int64)
    for d in range(1, limit + 1):
        table[d::d] += 1
    return table


class FilterTransform(Transform):
    """Order-preserving subsequence of the elements satisfying a predicate.

    ``exact-divisor-count v`` keeps values with exactly v positive divisors;
    the value 0 never satisfies it.
    """
    group = 'filter'

    def __init__(self, kind, v, negated=False):
        self.kind = check_is_enum(FilterKind, kind)
        self.v = int(v)
        self.negated = bool(negated)
        if self.v < 1 and self.kind != FilterKind.greater_than.value:
            raise ValueError('[Transform] %s needs v >= 1, got %s'
                             % (self.kind, self.v))

    def fields(self):
        return {'kind': self.kind, 'v': self.v, 'negated': self.negated}

    def mask_batch(self, arr):
        arr = np.asarray(arr, dtype=np.int64)
        if self.kind == 'multiple-of':
            keep = arr % self.v == 0
        elif self.kind == 'greater-than':
            keep = arr > self.v
        else:
            limit = int(arr.max()) if arr.size else 0
            table = divisor_count_table(max(limit, 1))
            keep = table[arr] == self.v
        return ~keep if self.negated else keep

    def apply(self, seq):
        if not len(seq):
            return []
        mask = self.mask_batch(np.asarray([seq]))[0]
        return [int(val) for val, k in zip(seq, mask) if k]


def _masked_mode(arr, mask):
    # smallest value among the most frequent ones
    rows = np.nonzero(mask)[0]
    values = arr[mask]
    counts = np.zeros((arr.shape[0], int(values.max(initial=0)) + 1),
                      dtype=np.int64)
    np.add.at(counts, (rows, values), 1)
    return counts.argmax(axis=1)


class LabelerTransform(Transform):
    """Reduction of a non-empty sequence to one integer.

    mean is the floor of the arithmetic mean, median the element at index
    ``(n - 1) // 2`` of the sorted sequence, middle the element at index
    ``n // 2`` of the original order; mode ties go to the smallest value.
    """
    group = 'labeler'

    def __init__(self, kind):
        self.kind = check_is_enum(LabelerKind, kind)

    def fields(self):
        return {'kind': self.kind}

    def apply(self, seq):
        if not len(seq):
            raise LabelerError('[Transform] %s of an empty sequence'
                               % self.kind)
        arr = np.asarray([seq], dtype=np.int64)
        return int(self.apply_batch(arr, np.ones_like(arr, dtype=bool))[0])

    def apply_batch(self, arr, mask):
        """Label every row of ``arr`` over its ``mask`` entries.

        Rows with an empty mask get :data:`~tamlab.extra.const.DISCARD`.
        """
        arr = np.asarray(arr, dtype=np.int64)
        mask = np.asarray(mask, dtype=bool)
        count = mask.sum(axis=1)
        valid = count > 0
        safe_count = np.maximum(count, 1)
        n, length = arr.shape
        rows = np.arange(n)
        big = np.iinfo(np.int64).max
        kind = self.kind

        if kind == 'count':
            out = count
        elif kind in ('min', 'max', 'max-min'):
            low = np.where(mask, arr, big).min(axis=1)
            high = np.where(mask, arr, -1).max(axis=1)
            out = {'min': low, 'max': high}.get(kind, high - low)
        elif kind == 'mean':
            out = np.where(mask, arr, 0).sum(axis=1) // safe_count
        elif kind == 'median':
            ordered = np.sort(np.where(mask, arr, big), axis=1)
            out = ordered[rows, (safe_count - 1) // 2]
        elif kind == 'first':
            out = arr[rows, mask.argmax(axis=1)]
        elif kind == 'last':
            out = arr[rows, length - 1 - mask[:, ::-1].argmax(axis=1)]
        elif kind == 'middle':
            rank = np.cumsum(mask, axis=1)
            hit = mask & (rank == (count // 2 + 1)[:, None])
            out = arr[rows, hit.argmax(axis=1)]
        else:
            out = _masked_mode(arr, mask)
        return np.where(valid, out, DISCARD)


class SubstitutionTransform(Transform):
    """Length-preserving substitution.

    ``replace-value`` maps every v to v2. ``replace-position`` sets
    ``x_i <- f(x_i, x_j)`` with 1-indexed positions and f one of
    ``a * x_i + b``, ``x_j``, ``|x_i - x_j|`` and ``x_i + x_j``.
    """
    group = 'substitution'

    def __init__(self, kind, v=None, v2=None, i=None, j=None, fn=None,
                 a=None, b=None):
        self.kind = check_is_enum(SubstitutionKind, kind)
        if self.kind == SubstitutionKind.replace_value.value:
            self.params = {'v': int(v), 'v2': int(v2)}
        else:
            fn = check_is_enum(PositionFunction, fn)
            self.params = {'i': int(i), 'j': int(j), 'fn': fn}
            if fn == PositionFunction.affine.value:
                self.params.update(a=int(a), b=int(b))
            if self.params['i'] < 1 or self.params['j'] < 1:
                raise ValueError('[Transform] positions are 1-indexed')

    def fields(self):
        return dict(self.params, kind=self.kind)

    def apply(self, seq):
        if not len(seq):
            return []
        return [int(val) for val in self.apply_batch(np.asarray([seq]))[0]]

    def apply_batch(self, arr):
        arr = np.asarray(arr, dtype=np.int64)
        p = self.params
        if self.kind == 'replace-value':
            return np.where(arr == p['v'], p['v2'], arr)
        out = arr.copy()
        xi, xj = arr[:, p['i'] - 1], arr[:, p['j'] - 1]
        if p['fn'] == 'affine':
            val = p['a'] * xi + p['b']
        elif p['fn'] == 'copy':
            val = xj
        elif p['fn'] == 'absdiff':
            val = np.abs(xi - xj)
        else:
            val = xi + xj
        out[:, p['i'] - 1] = val
        return out


class RearrangeTransform(Transform):
    """Multiset-preserving rearrangement.

    ``swap`` exchanges 1-indexed positions i and j; ``shift-right`` rotates
    right by v.
    """
    group = 'rearrange'

    def __init__(self, kind, i=None, j=None, v=None):
        self.kind = check_is_enum(RearrangeKind, kind)
        self.params = {}
        if self.kind == RearrangeKind.swap.value:
            self.params = {'i': int(i), 'j': int(j)}
        elif self.kind == RearrangeKind.shift_right.value:
            self.params = {'v': int(v)}

    def fields(self):
        return dict(self.params, kind=self.kind)

    def apply(self, seq):
        if not len(seq):
            return []
        return [int(val) for val in self.apply_batch(np.asarray([seq]))[0]]

    def apply_batch(self, arr):
        arr = np.asarray(arr, dtype=np.int64)
        if self.kind == 'sort-ascending':
            return np.sort(arr, axis=1)
        if self.kind == 'sort-descending':
            return np.sort(arr, axis=1)[:, ::-1]
        if self.kind == 'reverse':
            return arr[:, ::-1]
        if self.kind == 'shift-right':
            return np.roll(arr, self.params['v'], axis=1)
        out = arr.copy()
        i, j = self.params['i'] - 1, self.params['j'] - 1
        out[:, [i, j]] = arr[:, [j, i]]
        return out


_GROUPS = {cls.group: cls for cls in (
    ElementwiseTransform, FilterTransform, LabelerTransform,
    SubstitutionTransform, RearrangeTransform)}


def transform_from_dict(data):
    """Inverse of :meth:`Transform.to_dict`."""
    data = dict(data)
    cls = _GROUPS[data.pop('group')]
    return cls(**data)


def apply_elementwise(t, seq):
    return t.apply(seq)


def apply_filter(t, seq):
    return t.apply(seq)


def apply_labeler(t, seq):
    return t.apply(seq)


def elementwise_inventory(vocab_size):
    """Every elementwise primitive with v in 1..vocab_size-1."""
    return [ElementwiseTransform(kind, v)
            for kind in ElementwiseKind for v in range(1, vocab_size)]


def filter_inventory(vocab_size):
    return [FilterTransform(kind, v, negated)
            for kind in FilterKind for v in range(1, vocab_size)
            for negated in (False, True)]


def labeler_inventory():
    return [LabelerTransform(kind) for kind in LabelerKind]


def substitution_inventory(vocab_size, seq_len):
    """replace-value for v in 1..V-1, v2 in 0..V-1, v2 != v, and
    replace-position for every ordered pair i != j of positions."""
    subs = [SubstitutionTransform('replace-value', v=v, v2=v2)
            for v in range(1, vocab_size) for v2 in range(vocab_size)
            if v2 != v]
    pairs = [(i, j) for i in range(1, seq_len + 1)
             for j in range(1, seq_len + 1) if i != j]
    for i, j in pairs:
        subs.extend(SubstitutionTransform('replace-position', i=i, j=j,
                                          fn='affine', a=a, b=b)
                    for a in (1, 2, 3) for b in range(4))
        subs.extend(SubstitutionTransform('replace-position', i=i, j=j, fn=fn)
                    for fn in ('copy', 'absdiff', 'sum'))
    return subs


def rearrange_inventory(seq_len):
    moves = [RearrangeTransform(kind) for kind in
             ('sort-ascending', 'sort-descending', 'reverse')]
    moves.extend(RearrangeTransform('swap', i=i, j=j)
                 for i in range(1, seq_len + 1)
                 for j in range(i + 1, seq_len + 1))
    moves.extend(RearrangeTransform('shift-right', v=v)
                 for v in range(1, seq_len))
    return moves

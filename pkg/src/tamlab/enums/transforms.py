"""Kinds of the sequence transforms benchmarks are composed of."""
from enum import Enum


class ElementwiseKind(Enum):
    """Elementwise integer maps."""
    mul = 'mul'
    add = 'add'
    div = 'div'
    mod = 'mod'


class FilterKind(Enum):
    """Predicates extracting a subsequence."""
    multiple_of = 'multiple-of'
    greater_than = 'greater-than'
    exact_divisor_count = 'exact-divisor-count'


class LabelerKind(Enum):
    """Reductions of a sequence to one integer."""
    count = 'count'
    min = 'min'
    max = 'max'
    mean = 'mean'
    median = 'median'
    mode = 'mode'
    first = 'first'
    last = 'last'
    max_min = 'max-min'
    middle = 'middle'


class SubstitutionKind(Enum):
    """Length-preserving substitutions."""
    replace_value = 'replace-value'
    replace_position = 'replace-position'


class PositionFunction(Enum):
    """Functions f(x_i, x_j) for replace-position."""
    affine = 'affine'
    copy = 'copy'
    absdiff = 'absdiff'
    sum = 'sum'


class RearrangeKind(Enum):
    """Multiset-preserving rearrangements."""
    sort_ascending = 'sort-ascending'
    sort_descending = 'sort-descending'
    reverse = 'reverse'
    swap = 'swap'
    shift_right = 'shift-right'

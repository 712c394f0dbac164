"""Split files.

A split is one JSON-lines file. The first record is ``meta``; every task
record is followed by its example records. Records are dumped with sorted
keys and no whitespace so equal splits give equal bytes.

Record kinds::

    {"kind": "meta", "format": "tamlab-split", "version": 1, "config": {...},
     "counts": {"train": .., "val": .., "test": .., "examples": ..},
     "compositional": {...} | null, "stats": {...}, "support_size": 20}
    {"kind": "task", "index": 0, "role": "train", "n_examples": 500,
     "spec": {...}}
    {"kind": "example", "task": 0, "x": [...], "y": 3 | [...]}

"""
import json
import logging

from tamlab.benchgen.config import GenConfig
from tamlab.benchgen.split import ROLES, BenchmarkSplit, CompositionalSplit
from tamlab.benchgen.tasks import Example, PrimitiveInventory, TaskData,\
                                  TaskSpec
from tamlab.extra.const import FORMAT_VERSION, SPLIT_FORMAT, RecordKind
from tamlab.extra.exceptions import SplitFormatError
from tamlab.extra.utils import canonical_json

logger = logging.getLogger(__name__)

SPLIT_FILE = 'split.jsonl'


def split_records(split):
    """Yield the records of ``split`` in file order."""
    comp = split.compositional
    yield {
        'kind': RecordKind.META,
        'format': SPLIT_FORMAT,
        'version': FORMAT_VERSION,
        'config': split.config.jsonable(),
        'counts': dict(
            {role: len(split.tasks(role)) for role in ROLES},
            examples=sum(len(t) for role in ROLES for t in split.tasks(role))),
        'compositional': None if comp is None else comp.to_dict(),
        'stats': split.stats,
        'support_size': split.support_size,
    }
    index = 0
    for role in ROLES:
        for task in split.tasks(role):
            yield {'kind': RecordKind.TASK, 'index': index, 'role': role,
                   'n_examples': len(task), 'spec': task.spec.to_dict()}
            for example in task.examples:
                yield dict(example.to_dict(), kind=RecordKind.EXAMPLE,
                           task=index)
            index += 1


def serialize_split(split, path):
    """Write ``split`` to ``path`` as canonical JSON lines."""
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        for record in split_records(split):
            fh.write(canonical_json(record))
            fh.write('\n')
    logger.debug('[Split] wrote %s', path)
    return path


def _expect(condition, index, reason):
    if not condition:
        raise SplitFormatError(index, reason)


def _parse(records):
    """Turn ``(index, dict)`` pairs back into a BenchmarkSplit."""
    records = iter(records)
    index, meta = next(records, (0, None))
    _expect(meta is not None, 0, 'empty file')
    _expect(isinstance(meta, dict), index, 'record is not an object')
    _expect(meta.get('kind') == RecordKind.META
            and meta.get('format') == SPLIT_FORMAT, index,
            'first record is not split meta')
    _expect(meta.get('version') == FORMAT_VERSION, index,
            'unsupported version %s' % meta.get('version'))
    try:
        config = GenConfig(**meta['config'])
        counts = meta['counts']
        comp = None
        if meta['compositional'] is not None:
            comp = CompositionalSplit(
                PrimitiveInventory.from_dict(
                    meta['compositional']['inventory']),
                meta['compositional']['held_out'])
    except (KeyError, TypeError, ValueError) as err:
        raise SplitFormatError(index, 'bad meta: %s' % err) from None

    roles = {role: [] for role in ROLES}
    task, task_index, expected = None, -1, 0
    seen = 0
    for index, record in records:
        _expect(isinstance(record, dict), index, 'record is not an object')
        kind = record.get('kind')
        try:
            if kind == RecordKind.TASK:
                _expect(task is None or len(task) == expected, index,
                        'task %s is missing examples' % task_index)
                _expect(record['index'] == task_index + 1, index,
                        'task index %s out of order' % record['index'])
                _expect(record['role'] in roles, index,
                        'unknown role %r' % record['role'])
                task_index = record['index']
                expected = record['n_examples']
                task = TaskData(TaskSpec.from_dict(record['spec']), [])
                roles[record['role']].append(task)
            elif kind == RecordKind.EXAMPLE:
                _expect(task is not None and record['task'] == task_index,
                        index, 'example outside its task')
                task.examples.append(Example(record['x'], record['y']))
                seen += 1
            else:
                raise SplitFormatError(index, 'unknown record kind %r' % kind)
        except (KeyError, TypeError, ValueError) as err:
            if isinstance(err, SplitFormatError):
                raise
            raise SplitFormatError(index, 'bad %s record: %s'
                                   % (kind, err)) from None
    end = index + 1
    _expect(task is None or len(task) == expected, end,
            'truncated: task %s has %s of %s examples'
            % (task_index, 0 if task is None else len(task), expected))
    for role in ROLES:
        _expect(len(roles[role]) == counts[role], end,
                'truncated: %s of %s %s tasks'
                % (len(roles[role]), counts[role], role))
    _expect(seen == counts['examples'], end,
            'truncated: %s of %s examples' % (seen, counts['examples']))
    return BenchmarkSplit(config, roles['train'], roles['val'], roles['test'],
                          compositional=comp, stats=meta.get('stats', {}))


def load_split(path):
    """Read a split written by :func:`serialize_split`.

    Raises:
        SplitFormatError: Naming the first malformed or missing record.
    """
    def lines():
        with open(path, 'r', encoding='utf-8') as fh:
            for index, line in enumerate(fh):
                try:
                    yield index, json.loads(line)
                except json.JSONDecodeError as err:
                    raise SplitFormatError(index, 'invalid json: %s'
                                           % err.msg) from None
    return _parse(lines())

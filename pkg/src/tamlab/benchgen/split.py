"""Assembling train/val/test task splits.

Candidate ``c`` of role ``r`` is built from its own child generator of the
split seed, so the outcome of a candidate never depends on the others and
candidates can be built in worker processes. Acceptance and deduplication
always run in candidate order; ``jobs`` changes speed, never the split.
"""
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from tamlab.benchgen.config import GenConfig
from tamlab.benchgen.tasks import Deduplicator, Rejection, TaskSpec,\
                                  build_classification_task,\
                                  build_inventory, build_pathfinding_task,\
                                  build_transduction_task, candidate_pool,\
                                  probe_inputs, spec_from_ids
from tamlab.enums import Family
from tamlab.extra.exceptions import GenerationError
from tamlab.extra.utils import child_rng, progress

logger = logging.getLogger(__name__)

CANDIDATE_STREAM = 2
HELD_OUT_STREAM = 3
SHUFFLE_STREAM = 4
ROLES = ('train', 'val', 'test')
MAX_DRAWS = 100


class CompositionalSplit:
    """Primitive inventory plus the held-out subsets S1', S2', S3'.

    Attributes:
        inventory (:class:`~tamlab.benchgen.tasks.PrimitiveInventory`)
        held_out (list(list(int))): Held-out global ids per slot.
    """
    def __init__(self, inventory, held_out):
        self.inventory = inventory
        self.held_out = [sorted(int(i) for i in slot) for slot in held_out]

    @property
    def unseen_mask(self):
        mask = np.zeros(self.inventory.size, dtype=bool)
        for slot in self.held_out:
            mask[slot] = True
        return mask

    @property
    def seen_mask(self):
        return ~self.unseen_mask

    def seen_ids(self, slot):
        held = set(self.held_out[slot])
        return [i for i in self.inventory.slot_ids(slot) if i not in held]

    def unseen_count(self, primitive_ids):
        mask = self.unseen_mask
        return int(sum(mask[i] for i in primitive_ids))

    def to_dict(self):
        return {'inventory': self.inventory.to_dict(),
                'held_out': self.held_out}


class BenchmarkSplit:
    """Train, validation and test tasks of one benchmark.

    Attributes:
        config (:class:`~tamlab.benchgen.config.GenConfig`)
        train_tasks, val_tasks, test_tasks (list(TaskData))
        compositional (:class:`CompositionalSplit`): None in plain mode.
        stats (dict): Candidates drawn, rejections by reason and
            duplicates removed.
    """
    def __init__(self, config, train_tasks, val_tasks, test_tasks,
                 compositional=None, stats=None):
        self.config = config
        self.train_tasks = list(train_tasks)
        self.val_tasks = list(val_tasks)
        self.test_tasks = list(test_tasks)
        self.compositional = compositional
        self.stats = stats or {}

    @property
    def seed(self):
        return self.config.seed

    @property
    def family(self):
        return self.config.family

    @property
    def support_size(self):
        return self.config.support_size

    def tasks(self, role):
        return {'train': self.train_tasks, 'val': self.val_tasks,
                'test': self.test_tasks}[role]

    def __eq__(self, other):
        return isinstance(other, BenchmarkSplit) \
            and self.config == other.config \
            and all(self.tasks(r) == other.tasks(r) for r in ROLES) \
            and self.stats == other.stats \
            and ((self.compositional is None and other.compositional is None)
                 or (self.compositional is not None
                     and other.compositional is not None
                     and self.compositional.to_dict()
                     == other.compositional.to_dict()))

    def summary(self):
        return dict(
            family=self.family, mode=self.config.mode, seed=self.seed,
            **{'n_%s' % r: len(self.tasks(r)) for r in ROLES},
            duplicates=self.stats.get('duplicates', 0),
            rejections=sum(self.stats.get('rejected', {}).values()))


def draw_held_out(inventory, rng, fraction):
    """Pick ``max(1, int(len * fraction))`` held-out ids in every slot."""
    held_out = []
    for slot in range(3):
        ids = inventory.slot_ids(slot)
        count = max(1, int(len(ids) * fraction))
        held_out.append(sorted(int(i) for i in
                               rng.choice(ids, size=count, replace=False)))
    return held_out


def _draw_ids(config, rng, allowed):
    # path-finding cells of one task must be pairwise distinct
    for _ in range(MAX_DRAWS):
        ids = [int(rng.choice(slot)) for slot in allowed]
        if config.family != Family.pathfinding.value:
            return ids
        if config.is_compositional:
            cells = {id_ % config.grid_size ** 2 for id_ in ids}
            if len(cells) == 3:
                return ids
        elif ids[0] % config.grid_size ** 2 != ids[2] % config.grid_size ** 2:
            return ids
    raise GenerationError('[Benchgen] could not draw distinct path cells')


def build_candidate(config, held_out, role_index, index):
    """Build candidate ``index`` of role ``role_index``.

    Returns:
        TaskData or Rejection
    """
    rng = child_rng(config.seed, CANDIDATE_STREAM, role_index, index)
    inventory = build_inventory(config)
    unseen_slot = None
    allowed = [inventory.slot_ids(slot) for slot in range(3)]
    if config.is_compositional:
        comp = CompositionalSplit(inventory, held_out)
        allowed = [comp.seen_ids(slot) for slot in range(3)]
        if ROLES[role_index] != 'train':
            unseen_slot = int(rng.integers(3))
            allowed[unseen_slot] = comp.held_out[unseen_slot]
    ids = _draw_ids(config, rng, allowed)
    spec = spec_from_ids(inventory, ids, config.is_compositional, unseen_slot)

    if config.family == Family.pathfinding.value:
        return build_pathfinding_task(
            spec, rng, config.examples_per_task, config.grid_size,
            config.num_obstacles, config.max_resamples)
    pool = candidate_pool(config.seed, config.candidate_pool,
                          config.vocab_size, config.seq_len)
    extra = {'primitive_ids': spec.primitive_ids,
             'unseen_slot': spec.unseen_slot}
    if config.family == Family.classification.value:
        return build_classification_task(
            *spec.transforms, rng, pool, config.num_classes,
            config.examples_per_task, **extra)
    return build_transduction_task(
        *spec.transforms, rng, pool, config.vocab_size,
        config.examples_per_task, **extra)


def _build_chunk(args):
    config, held_out, role_index, indices = args
    return [build_candidate(config, held_out, role_index, i) for i in indices]


def _collect(config, held_out, role_index, needed, dedup, stats, executor,
             jobs, show_progress):
    accepted = []
    limit = max(needed, config.max_candidates_factor * needed)
    chunk = 16
    bar = progress(total=needed, desc='%s tasks' % ROLES[role_index],
                   disable=not show_progress)
    start = 0
    while len(accepted) < needed:
        if start >= limit:
            bar.close()
            raise GenerationError(
                '[Benchgen] only %s of %s unique %s tasks after %s candidates'
                % (len(accepted), needed, ROLES[role_index], limit),
                {'shortfall': needed - len(accepted), 'stats': dict(stats)})
        stop = min(limit, start + chunk * jobs)
        chunks = [(config, held_out, role_index,
                   list(range(lo, min(lo + chunk, stop))))
                  for lo in range(start, stop, chunk)]
        results = map(_build_chunk, chunks) if executor is None \
            else executor.map(_build_chunk, chunks)
        for result in (r for part in results for r in part):
            if len(accepted) == needed:
                break
            stats['candidates'] += 1
            if isinstance(result, Rejection):
                stats['rejected'][result.reason] += 1
            elif not dedup.add(result.spec):
                stats['duplicates'] += 1
            else:
                accepted.append(result)
                bar.update(1)
        start = stop
    bar.close()
    return accepted


def build_split(config, jobs=1, show_progress=False):
    """Generate the benchmark described by ``config``.

    Plain mode draws ``n_train + n_val + n_test`` unique tasks, shuffles
    them and cuts the list in that order. Compositional mode draws training
    tasks from seen primitives only and validation/test tasks with exactly
    one held-out primitive.

    Args:
        config (:class:`~tamlab.benchgen.config.GenConfig`)
        jobs (int): Worker processes building candidates.
        show_progress (bool): Show tqdm bars.

    Returns:
        :class:`BenchmarkSplit`

    Raises:
        ConfigError: If config violates its schema.
        GenerationError: If too few unique tasks can be built.
    """
    if not isinstance(config, GenConfig):
        config = GenConfig.create(**config)
    config.check()
    inventory = build_inventory(config)
    comp = None
    held_out = None
    if config.is_compositional:
        held_out = draw_held_out(inventory,
                                 child_rng(config.seed, HELD_OUT_STREAM),
                                 config.held_out_fraction)
        comp = CompositionalSplit(inventory, held_out)
    probe = None
    if config.family != Family.pathfinding.value:
        probe = probe_inputs(config.probe_seed, config.probe_size,
                             config.vocab_size, config.seq_len)
    dedup = Deduplicator(probe)
    stats = {'candidates': 0, 'duplicates': 0, 'rejected': Counter()}

    executor = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        if config.is_compositional:
            roles = [_collect(config, held_out, i, n, dedup, stats, executor,
                              jobs, show_progress)
                     for i, n in enumerate((config.n_train, config.n_val,
                                            config.n_test))]
        else:
            tasks = _collect(config, None, 0, config.total_tasks, dedup,
                             stats, executor, jobs, show_progress)
            order = child_rng(config.seed, SHUFFLE_STREAM).permutation(
                len(tasks))
            tasks = [tasks[i] for i in order]
            cut1, cut2 = config.n_train, config.n_train + config.n_val
            roles = [tasks[:cut1], tasks[cut1:cut2], tasks[cut2:]]
    finally:
        if executor is not None:
            executor.shutdown()

    stats['rejected'] = dict(sorted(stats['rejected'].items()))
    split = BenchmarkSplit(config, *roles, compositional=comp, stats=stats)
    if comp is not None and any(
            comp.unseen_count(task.spec.primitive_ids) != 1
            for task in split.val_tasks + split.test_tasks):
        raise GenerationError('[Benchgen] evaluation task without exactly '
                              'one unseen primitive')
    logger.info('[Benchgen] %s', split.summary())
    return split


__all__ = ['BenchmarkSplit', 'CompositionalSplit', 'TaskSpec', 'build_split',
           'build_candidate', 'draw_held_out']

"""BenchmarkJob generates a split or loads one from disk."""
import logging
import os

from tamlab.benchgen import SPLIT_FILE, GenConfig, build_split, load_split,\
                            serialize_split
from tamlab.extra.decorators import update
from tamlab.extra.utils import gen_id
from tamlab.jobs.job import Job
from tamlab.jobs.task import CallableTask

logger = logging.getLogger(__name__)


def make_split(config=None, path=None, out_dir=None, jobs=1,
               show_progress=False):
    """Load ``path`` when no config is given, otherwise build the split and
    write it to ``out_dir`` if one is given."""
    if config is None:
        split = load_split(path)
        logger.info('[Benchmark] loaded %s', path)
    else:
        if not isinstance(config, GenConfig):
            config = GenConfig.create(**config)
        split = build_split(config, jobs=jobs, show_progress=show_progress)
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            path = serialize_split(split, os.path.join(out_dir, SPLIT_FILE))
    return {'split': split, 'path': path, 'config': split.config,
            'summary': split.summary()}


class BenchmarkJob(Job):
    """Provide the split every later job works on.

    Attributes:
        config (:class:`~tamlab.benchgen.config.GenConfig`): Generation
            settings, read from the file for loaded splits.
        path (str): Split file, None for an in-memory split.
        split (:class:`~tamlab.benchgen.split.BenchmarkSplit`)
        summary (dict): Task counts, duplicates and rejections.
        name (str): Name to track Job progress.
    """
    def __init__(self, config=None, path=None, out_dir=None, jobs=1,
                 show_progress=False, name=None):
        if config is None and path is None:
            raise ValueError('[Benchmark] need a config or a split path')
        name = gen_id(self.__class__.__name__, name)
        super().__init__(
            task=CallableTask(make_split, config, path, out_dir, jobs,
                              show_progress, name=name),
            name=name)
        self.config = config
        self.path = path
        self.split = None
        self.summary = None

    @update
    def update_result(self, task_result):
        """Update from 'result' in Task response."""
        return

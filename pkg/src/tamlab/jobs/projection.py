"""ProjectionJob projects the task embeddings of path-finding tasks."""
import logging

import pandas as pd

from tamlab.enums import AdaptMethod, Family
from tamlab.extra.decorators import update
from tamlab.extra.utils import gen_id
from tamlab.jobs.evaluation import resolve_model, trained_method
from tamlab.jobs.job import Job
from tamlab.jobs.task import CallableTask
from tamlab.meta import TamConfig, adapt_test_task, default_adapt_method,\
                        pca_project

logger = logging.getLogger(__name__)

COORD_COLUMNS = ['task', 'end_row', 'end_col', 'pc1', 'pc2']


def project_on(data, model, tam_config, start=None, role='train', k=None):
    """PCA coordinates of the embeddings of the tasks starting at ``start``.

    Training tasks of a multitask model use their learned embeddings; every
    other task gets its embedding by adapting to its first k examples.
    """
    split = data.split
    if split.family != Family.pathfinding.value:
        raise ValueError('[Projection] needs a path-finding split, got %s'
                         % split.family)
    start = None if start is None else tuple(start)
    selected = [(i, task) for i, task in enumerate(split.tasks(role))
                if start is None or task.spec.start == start]
    if not selected:
        starts = sorted({task.spec.start for task in split.tasks(role)})
        raise ValueError('[Projection] no %s task starts at %s; %s tasks '
                         'start at %s' % (role, start, role, starts))
    params, extras = resolve_model(model)
    table = extras.get('task_embeddings')
    if role == 'train' and table is not None:
        embeddings = [table[i] for i, _ in selected]
    else:
        method = default_adapt_method(trained_method(params, extras),
                                      params.config.compositional)
        if method == AdaptMethod.finetune_full.value:
            raise ValueError('[Projection] %s models have no task embedding'
                             % extras.get('method'))
        k = min(tam_config.max_k, split.support_size) if k is None else k
        embeddings = [adapt_test_task(params, task, k, method,
                                      tam_config).result.z_best
                      for _, task in selected]
    projection = pca_project(embeddings)
    coords = pd.DataFrame({
        'task': [i for i, _ in selected],
        'end_row': [task.spec.end[0] for _, task in selected],
        'end_col': [task.spec.end[1] for _, task in selected],
        'pc1': projection.coords[:, 0],
        'pc2': projection.coords[:, 1],
    }, columns=COORD_COLUMNS)
    logger.info('[Projection] %s tasks, explained variance %s',
                len(coords), projection.explained_variance_ratio)
    return {'coords': coords, 'projection': projection}


class ProjectionJob(Job):
    """Two-dimensional view of task embeddings.

    Attributes:
        coords (:class:`pandas.DataFrame`): task, end_row, end_col, pc1, pc2.
        projection (:class:`~tamlab.meta.pca.Projection`)
    """
    def __init__(self, data, model, tam_config=None, start=None, role='train',
                 k=None, name=None):
        tam_config = tam_config if tam_config is not None \
            else TamConfig.create()
        prerequired = [data] if isinstance(model, str) else [data, model]
        name = gen_id(self.__class__.__name__, name)
        super().__init__(
            task=CallableTask(project_on, data, model, tam_config, start,
                              role, k, name=name),
            jobs=prerequired, name=name)
        self.coords = None
        self.projection = None

    @update
    def update_result(self, task_result):
        """Update from 'result' in Task response."""
        return

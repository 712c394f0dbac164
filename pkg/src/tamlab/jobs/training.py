"""TrainingJob runs one training method on the split of a BenchmarkJob."""
import logging
import os

import numpy as np

from tamlab.enums import TrainMethod, check_is_enum
from tamlab.extra.decorators import update
from tamlab.extra.utils import gen_id
from tamlab.jobs.job import Job
from tamlab.jobs.task import CallableTask
from tamlab.meta import TamConfig, model_config_for, train
from tamlab.model import save_checkpoint

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = 'checkpoint.json'
LOG_FILE = 'train_log.jsonl'


def train_on(data, method, tam_config, model_overrides=None, out_dir=None):
    """Train ``method`` on ``data.split`` and write checkpoint and log."""
    split = data.split
    overrides = dict(model_overrides or {})
    overrides.setdefault('seed', tam_config.seed)
    model_cfg = model_config_for(method, split.config, **overrides)
    training = train(method, split, model_cfg, tam_config)
    checkpoint = log_path = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        extras = {'method': method, 'seed': tam_config.seed,
                  'iterations': tam_config.max_outer_iterations,
                  'best_iteration': training.best_iteration,
                  'best_metric': training.best_metric}
        if training.task_embeddings is not None:
            extras['task_embeddings'] = np.asarray(training.task_embeddings)
        checkpoint = save_checkpoint(os.path.join(out_dir, CHECKPOINT_FILE),
                                     training.params,
                                     training.optimizer_state, extras)
        log_path = training.log.write_jsonl(os.path.join(out_dir, LOG_FILE))
    return {'params': training.params, 'training': training,
            'model_config': model_cfg, 'checkpoint': checkpoint,
            'log_path': log_path}


class TrainingJob(Job):
    """Train a task-conditioned transformer.

    Attributes:
        jobs (list(:class:`~tamlab.jobs.job.Job`)): [BenchmarkJob].
        method (str): :class:`~tamlab.enums.TrainMethod` value.
        tam_config (:class:`~tamlab.meta.config.TamConfig`)
        params (:class:`~tamlab.model.params.ModelParams`): Trained weights.
        training (:class:`~tamlab.meta.training.TrainingResult`)
        model_config (:class:`~tamlab.model.config.ModelConfig`)
        checkpoint (str): Checkpoint path when ``out_dir`` was given.
        log_path (str): Training log path when ``out_dir`` was given.
    """
    def __init__(self, data, method, tam_config=None, model_overrides=None,
                 out_dir=None, name=None):
        method = check_is_enum(TrainMethod, method)
        tam_config = tam_config if tam_config is not None \
            else TamConfig.create()
        name = gen_id(self.__class__.__name__, name)
        super().__init__(
            task=CallableTask(train_on, data, method, tam_config,
                              model_overrides, out_dir, name=name),
            jobs=[data], name=name)
        self.method = method
        self.tam_config = tam_config
        self.params = None
        self.training = None
        self.model_config = None
        self.checkpoint = None
        self.log_path = None

    @update
    def update_result(self, task_result):
        """Update from 'result' in Task response."""
        logger.info('[Job] %s trained %s, checkpoint %s',
                    self.name, self.method, self.checkpoint)

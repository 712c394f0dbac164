# pylint: disable=too-many-arguments
"""Functions for running lab actions as jobs."""
import logging

from tamlab.context import Context
from tamlab.jobs import BenchmarkJob, EvaluationJob, ProjectionJob,\
                        TrainingJob

logger = logging.getLogger(__name__)


class LabClient(Context):
    """Create jobs for generating benchmarks, training, evaluating and
    projecting, and record them in the session.

    Nothing runs until :meth:`~tamlab.context.Context.run` is called.

    Example:
        .. code-block:: python

            from tamlab import LabClient
            client = LabClient()
            data = client.gen({'family': 'classification', 'seed': 0})
            model = client.train(data, 'tam')
            result = client.evaluate(data, model, k_values=[1, 20])
            client.run()
            result.metrics

    """
    def __init__(self):
        """Start a fresh session."""
        Context.create()

    @staticmethod
    def gen(config, out_dir=None, jobs=1, show_progress=False, name=None):
        """Generate a benchmark split.

        Args:
            config (dict or :class:`~tamlab.benchgen.config.GenConfig`)
            out_dir (str): Directory receiving the split file.
            jobs (int): Worker processes building candidates.

        Returns:
            :class:`~tamlab.jobs.benchmark.BenchmarkJob`
        """
        logger.debug('[Lab] Create BenchmarkJob')
        return Context.add_job(BenchmarkJob(
            config=config, out_dir=out_dir, jobs=jobs,
            show_progress=show_progress, name=name))

    @staticmethod
    def load(path, name=None):
        """Load a split written by ``gen``.

        Returns:
            :class:`~tamlab.jobs.benchmark.BenchmarkJob`
        """
        return Context.add_job(BenchmarkJob(path=path, name=name))

    @staticmethod
    def train(data, method, tam_config=None, model_overrides=None,
              out_dir=None, name=None):
        """Train ``method`` on the split of ``data``.

        Returns:
            :class:`~tamlab.jobs.training.TrainingJob`
        """
        return Context.add_job(TrainingJob(
            data, method, tam_config=tam_config,
            model_overrides=model_overrides, out_dir=out_dir, name=name))

    @staticmethod
    def evaluate(data, model, tam_config=None, k_values=None, method=None,
                 label=None, jobs=1, name=None):
        """k-shot evaluation of a TrainingJob or a checkpoint path.

        Returns:
            :class:`~tamlab.jobs.evaluation.EvaluationJob`
        """
        return Context.add_job(EvaluationJob(
            data, model, tam_config=tam_config, k_values=k_values,
            method=method, label=label, jobs=jobs, name=name))

    @staticmethod
    def project(data, model, tam_config=None, start=None, role='train',
                k=None, name=None):
        """PCA of the task embeddings of path-finding tasks.

        Returns:
            :class:`~tamlab.jobs.projection.ProjectionJob`
        """
        return Context.add_job(ProjectionJob(
            data, model, tam_config=tam_config, start=start, role=role, k=k,
            name=name))

# pylint: disable=invalid-name
"""This module defines jobs to handle all kinds of actions.

Handle the order of task execution, and stores the result of task in its
attributes.
"""
import abc
import logging

from tamlab.extra.const import JobStatus
from tamlab.extra.decorators import block_method

logger = logging.getLogger(__name__)


class Job:
    """Handle the timing of task's execution.

    Every Job waits for all the Jobs in its ``jobs`` list to succeed before
    it runs its task, and fails without running if any of them failed.

    Attributes:
        status (str): Job status.
        result (dict): Job result.
        task (:class:`~tamlab.jobs.task.Task`): Task to be run by Job.
        jobs (list(:class:`~tamlab.jobs.job.Job`)): Jobs that must succeed
            before running the task.
        name (str): Name to track Job progress.
    """
    def __init__(self, task, jobs=None, name=None):
        self.status = JobStatus.PENDING
        self.result = None
        self.task = task
        self.jobs = jobs
        self.name = name

    def is_done(self):
        """True once the job has succeeded or failed."""
        return self.status in JobStatus.DONE_STATUS

    def not_done(self):
        return not self.is_done()

    def is_success(self):
        """True when the task finished and handed back a result."""
        return self.status == JobStatus.DONE and self.result is not None

    def is_fail(self):
        return self.status in JobStatus.FAIL_STATUS or \
            (self.status == JobStatus.DONE and self.result is None)

    @property
    def error(self):
        """Exception of the failed task, None otherwise."""
        return self.task.error

    def run(self):
        """Run the task once the prerequired jobs succeeded."""
        if self.is_done():
            logger.debug('[Job] %s skipped, already %s',
                         self.name, self.status)
            return
        if self.jobs is not None and \
                not all(job.is_success() for job in self.jobs):
            self.status = JobStatus.FAIL
            logger.info(
                '[Job] %s not run, prerequired jobs: %s', self.name,
                ', '.join('%s=%s' % (job.name, job.status)
                          for job in self.jobs))
            return

        self.status = JobStatus.RUNNING
        self.task.run()
        self.status = self.task.status
        if self.task.is_success():
            self.update_result(self.task.result)
        logger.info('[Job] %s finished: %s', self.name, self.status)

    @abc.abstractmethod
    def update_result(self, task_result):
        """Update the task result to Job's attributes.

        Raises:
            NotImplementedError: If child class do not implement this function.
        """
        raise NotImplementedError('Please Implement update_result method')

    def stop(self):
        """Stop Job.

        A pending job is marked as fail, a finished one keeps its status.
        """
        if self.status in (JobStatus.PENDING, JobStatus.RUNNING):
            self.task.stop()
            self.status = JobStatus.FAIL
            logger.info('[Job] %s stop successfully', self.name)
        else:
            logger.info(
                '[Job] %s have finished already status %s',
                self.name, self.status)

    @block_method
    def get(self, attr):
        """Result attribute ``attr``, None while the job is unfinished.

        Example:
            .. code-block:: python

                data = client.gen({'family': 'pathfinding'})
                data.get('split')   # None
                client.run()
                data.get('summary')['n_train']
        """
        return getattr(self, attr)

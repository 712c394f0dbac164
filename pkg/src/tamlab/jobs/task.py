# pylint: disable=C0103
"""This module defines tasks for different :class:`~tamlab.jobs.job.Job`.

A task does the work of a job (generate a split, train, evaluate, project)
and hands a result dict back to it.
"""
import abc
import logging

from tamlab.extra.const import JobStatus
from tamlab.extra.utils import gen_id

logger = logging.getLogger(__name__)


class Task:
    """Handle the execution of one action and track its status.

    Attributes:
        status (str): Status of task.
        result (dict): Attributes handed to the job on success.
        error (Exception): What made the task fail, if anything.
        name (str): Name of task for tracking process.
    """
    def __init__(self, name=None):
        self.status = JobStatus.PENDING
        self.result = None
        self.error = None
        self.name = gen_id(self.__class__.__name__, name)

    def is_done(self):
        """
        Return:
            bool. True for task in `DONE_STATUS`, False otherwise.
        """
        return self.status in JobStatus.DONE_STATUS

    def not_done(self):
        return not self.is_done()

    def is_success(self):
        """
        Return:
            bool. True for success, False otherwise.
        """
        return self.status == JobStatus.DONE and self.result is not None

    def is_fail(self):
        """
        Return:
            bool. True for failed, False otherwise.
        """
        return self.status in JobStatus.FAIL_STATUS or \
            (self.status == JobStatus.DONE and self.result is None)

    def run(self):
        """Execute the task, recording failure instead of raising."""
        if self.is_done():
            logger.debug('[Task] \'%s\' already %s', self.name, self.status)
            return
        logger.debug('[%s] \'%s\' start.', self.__class__.__name__, self.name)
        self.status = JobStatus.RUNNING
        try:
            self.result = self.execute()
        except Exception as err:  # pylint: disable=broad-except
            self.error = err
            self.status = JobStatus.FAIL
            logger.error('[Task] \'%s\' failed: %s', self.name, err)
            return
        self.status = JobStatus.DONE
        logger.debug('[Task] \'%s\' done.', self.name)

    @abc.abstractmethod
    def execute(self):
        """Do the work and return the result dict.

        Raises:
            NotImplementedError: If child class do not implement this function.
        """
        raise NotImplementedError('Please Implement execute method')

    def stop(self):
        """Mark an unfinished task as failed."""
        if self.not_done():
            self.status = JobStatus.FAIL
        logger.info('[Task] Stop Task %s while %s', self.name, self.status)


class CallableTask(Task):
    """Task running ``func(*args, **kwargs)``, which returns a dict."""
    def __init__(self, func, *args, name=None, **kwargs):
        super().__init__(name=name)
        self.func = func
        self.args = args
        self.kwargs = kwargs

    def execute(self):
        return self.func(*self.args, **self.kwargs)

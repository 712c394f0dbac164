"""Bookkeeping of the jobs of one session."""
import logging

import pandas as pd

from tamlab.extra.const import JobStatus

logger = logging.getLogger(__name__)


class Context:
    """Keep the jobs of a session and run them in creation order.

    Example:
        .. code-block:: python

            from tamlab import LabClient
            client = LabClient()
            data = client.gen({'family': 'transduction', 'seed': 7})
            client.run()

    """
    JOBS = []
    'list(:class:`~tamlab.jobs.job.Job`): List of finished and waited Jobs.'

    @classmethod
    def create(cls):
        """Start a fresh session, dropping every recorded job."""
        context = cls()
        context.close()
        return context

    @staticmethod
    def run():
        """Run every pending job in the order it was created.

        A job whose prerequired job failed is marked as fail without
        running.
        """
        pending = [job for job in Context.JOBS if job.not_done()]
        logger.debug('[Context] run %s pending jobs', len(pending))
        for job in pending:
            job.run()

    @staticmethod
    def close():
        """Reset JOBS."""
        logger.debug('[Context] close with %s jobs', len(Context.JOBS))
        Context.JOBS = []

    @staticmethod
    def add_job(job):
        Context.JOBS.append(job)
        return job

    @staticmethod
    def get_all_jobs():
        """Get a list of Jobs that have been or waiting to be executed.

        Returns:
            list(:class:`~tamlab.jobs.job.Job`)

        """
        return Context.JOBS


    @staticmethod
    def get_jobs_status(sort_by_status=False, status=None):
        """Status table of the session.

        Columns are ``Job`` (name), ``kind`` (job class), ``status`` and
        ``error`` (exception class of a failed task, empty otherwise).

        Args:
            sort_by_status (bool): Group rows of equal status.
            status (list(str)): Keep only these statuses.

        Returns:
            :class:`pandas.DataFrame`

        Raises:
            ValueError: If ``status`` holds an unknown status.
        """
        unknown = sorted(set(status or ()) - set(JobStatus.ALL_STATUS))
        if unknown:
            raise ValueError('[Context] unknown job status %s' % unknown)

        table = pd.DataFrame(
            [(job.name, type(job).__name__, job.status,
              type(job.error).__name__ if job.error is not None else '')
             for job in Context.JOBS],
            columns=['Job', 'kind', 'status', 'error'])
        if status:
            table = table[table['status'].isin(status)]
        elif sort_by_status:
            table = table.sort_values(by='status', kind='stable')
        return table

    @staticmethod
    def get_jobs_by_name(names):
        """Jobs whose name is in ``names``, in creation order."""
        wanted = set(names)
        return [job for job in Context.JOBS if job.name in wanted]

    @staticmethod
    def stop_jobs(jobs_list):
        """Stop every job of ``jobs_list``; finished jobs keep their status."""
        for job in jobs_list:
            job.stop()

"""Test jobs, tasks, the session context and the lab client."""
import os

import pytest

from tamlab import Context, LabClient, show_task_embeddings
from tamlab.config import ExperimentConfig
from tamlab.extra.const import JobStatus
from tamlab.extra.exceptions import CheckpointError, ConfigError
from tamlab.jobs import BenchmarkJob, CallableTask, TrainingJob
from tamlab.jobs.projection import COORD_COLUMNS
from tamlab.meta import METRIC_COLUMNS
from tests.conftest import CLASS_SETTINGS, PATH_SETTINGS, TRANS_SETTINGS


def missing_split(tmp_path):
    return BenchmarkJob(path=str(tmp_path / 'missing.jsonl'), name='missing')


def test_failed_job_records_error(context, tmp_path):
    """A failing task marks its job as fail and keeps the exception."""
    job = context.add_job(missing_split(tmp_path))
    context.run()
    assert job.status == JobStatus.FAIL
    assert job.is_fail()
    assert isinstance(job.error, FileNotFoundError)


def test_dependent_job_fails_without_running(context, tmp_path, tam_config):
    """Jobs after a failed job fail without running their task."""
    data = context.add_job(missing_split(tmp_path))
    model = context.add_job(TrainingJob(data, 'tam', tam_config))
    context.run()
    assert model.status == JobStatus.FAIL
    assert model.error is None
    assert model.task.status == JobStatus.PENDING


def test_jobs_status(context, tmp_path):
    """Status table lists every job and filters by status."""
    context.add_job(missing_split(tmp_path))
    context.add_job(BenchmarkJob(config=CLASS_SETTINGS, name='class'))
    context.run()
    table = context.get_jobs_status()
    assert table['Job'].tolist() == ['missing', 'class']
    failed = context.get_jobs_status(status=[JobStatus.FAIL])
    assert failed['Job'].tolist() == ['missing']
    with pytest.raises(ValueError):
        context.get_jobs_status(status=['unknown'])
    assert [j.name for j in context.get_jobs_by_name(['class'])] == ['class']


def test_stop_pending_jobs(context, tam_config):
    """Stopped jobs fail and are skipped by run."""
    data = context.add_job(BenchmarkJob(config=CLASS_SETTINGS))
    model = context.add_job(TrainingJob(data, 'tam', tam_config))
    context.stop_jobs([data])
    assert data.status == JobStatus.FAIL
    context.run()
    assert model.status == JobStatus.FAIL
    assert data.get('split') is None


def test_get_before_done(context):
    """Attributes of unfinished jobs read as None."""
    data = context.add_job(BenchmarkJob(config=CLASS_SETTINGS))
    assert data.get('split') is None
    context.run()
    assert data.get('split') is not None
    assert data.get('summary')['n_train'] == 4


def test_benchmark_job_needs_input():
    """A BenchmarkJob needs a config or a path."""
    with pytest.raises(ValueError):
        BenchmarkJob()


def test_callable_task():
    """Task errors are recorded, not raised."""
    task = CallableTask(lambda: 1 / 0, name='boom')
    task.run()
    assert task.is_fail()
    assert isinstance(task.error, ZeroDivisionError)
    task = CallableTask(dict, a=1)
    task.run()
    assert task.is_success() and task.result == {'a': 1}


def test_non_dict_result_fails_job(context, tmp_path):
    """A job whose task hands back something other than a dict fails."""
    job = context.add_job(missing_split(tmp_path))
    job.task = CallableTask(lambda: 42, name='answer')
    context.run()
    assert job.is_fail()
    assert job.get('split') is None


def test_status_table_names_errors(context, tmp_path):
    """The status table carries the job class and the error class."""
    context.add_job(missing_split(tmp_path))
    context.run()
    row = context.get_jobs_status().iloc[0]
    assert row['kind'] == 'BenchmarkJob'
    assert row['error'] == 'FileNotFoundError'


def test_experiment_requires_method():
    """Missing required keys are listed in one ConfigError."""
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.create(seeds=[0])
    assert info.value.violations == [
        'ExperimentConfig: missing required value method']



def test_close_forgets_jobs(context):
    """A new session starts empty."""
    context.add_job(BenchmarkJob(config=CLASS_SETTINGS))
    assert len(Context.get_all_jobs()) == 1
    Context.create()
    assert Context.get_all_jobs() == []


def test_client_pipeline(tmp_path, tam_config, model_overrides):
    """gen, train and evaluate run in order and write their files."""
    client = LabClient()
    data = client.gen(CLASS_SETTINGS, out_dir=str(tmp_path / 'data'))
    model = client.train(data, 'tam', tam_config, model_overrides,
                         out_dir=str(tmp_path / 'run'))
    result = client.evaluate(data, model, tam_config)
    client.run()
    assert all(job.is_success() for job in (data, model, result))
    assert os.path.isfile(data.path)
    assert os.path.isfile(model.checkpoint)
    assert os.path.isfile(model.log_path)
    assert list(result.metrics.columns) == METRIC_COLUMNS
    assert result.metrics['k'].tolist() == [1, 5]
    assert result.method == 'tam-z'

    loaded = client.load(data.path)
    from_file = client.evaluate(loaded, model.checkpoint, tam_config)
    client.run()
    assert from_file.is_success()
    assert from_file.metrics['mean'].tolist() == \
        result.metrics['mean'].tolist()
    client.close()


def test_checkpoint_must_fit_split(tmp_path, tam_config, model_overrides):
    """A classifier checkpoint cannot score a transduction split."""
    client = LabClient()
    data = client.gen(CLASS_SETTINGS)
    model = client.train(data, 'multitask', tam_config, model_overrides,
                         out_dir=str(tmp_path))
    other = client.gen(TRANS_SETTINGS)
    client.run()
    result = client.evaluate(other, model.checkpoint, tam_config)
    client.run()
    assert result.is_fail()
    assert isinstance(result.error, CheckpointError)
    assert 'family' in result.error.fields
    client.close()


def test_projection(tmp_path, tam_config, model_overrides):
    """Path-finding embeddings are projected and plotted."""
    client = LabClient()
    data = client.gen(PATH_SETTINGS)
    model = client.train(data, 'tam', tam_config, model_overrides)
    view = client.project(data, model, tam_config)
    client.run()
    assert view.is_success()
    assert list(view.coords.columns) == COORD_COLUMNS
    assert len(view.coords) == 4
    path = str(tmp_path / 'embeddings.png')
    show_task_embeddings(view.coords, path=path)
    assert os.path.isfile(path)
    client.close()


def test_projection_needs_path_split(tam_config, model_overrides):
    """Other families have no cells to colour by."""
    client = LabClient()
    data = client.gen(CLASS_SETTINGS)
    model = client.train(data, 'tam', tam_config, model_overrides)
    view = client.project(data, model, tam_config)
    client.run()
    assert view.is_fail()
    assert isinstance(view.error, ValueError)
    client.close()


def test_projection_filters_training_starts(path_split, tam_config,
                                            model_overrides):
    """By default the start filter selects training tasks; a start no
    task has fails with the starts on offer."""
    start = path_split.train_tasks[0].spec.start
    expected = [i for i, task in enumerate(path_split.train_tasks)
                if task.spec.start == start]
    client = LabClient()
    data = client.gen(PATH_SETTINGS)
    model = client.train(data, 'tam', tam_config, model_overrides)
    view = client.project(data, model, tam_config, start=start)
    missing = client.project(data, model, tam_config, start=(9, 9),
                             role='test')
    client.run()
    assert view.is_success()
    assert list(view.coords['task']) == expected
    assert missing.is_fail()
    assert 'test tasks start at' in str(missing.error)
    client.close()

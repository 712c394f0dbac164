# pylint: disable=redefined-outer-name
"""Test the command line: exit codes, output files and manifests."""
import json
import os

import pandas as pd
import pytest

from tamlab import __version__
from tamlab.cli import main, manifest_path
from tamlab.jobs.projection import COORD_COLUMNS
from tamlab.meta import METRIC_COLUMNS
from tests.conftest import CLASS_SETTINGS, MODEL_OVERRIDES, PATH_SETTINGS,\
                           TAM_SETTINGS


def write_json(path, data):
    with open(str(path), 'w', encoding='utf-8') as fh:
        json.dump(data, fh)
    return str(path)


def gen(directory, settings):
    os.makedirs(directory, exist_ok=True)
    config = write_json(os.path.join(directory, 'gen.json'), settings)
    out = os.path.join(directory, 'data')
    assert main(['gen', '--config', config, '--out', out]) == 0
    return os.path.join(out, 'split.jsonl')


def train(directory, split, seeds, method='tam'):
    config = write_json(os.path.join(directory, 'experiment.json'), {
        'method': method, 'split': split, 'model': MODEL_OVERRIDES,
        'tam': TAM_SETTINGS, 'seeds': seeds,
        'output_dir': os.path.join(directory, 'runs')})
    return main(['train', config])


@pytest.fixture(scope='module')
def class_run(tmp_path_factory):
    """Return directory, split and checkpoints of two trained seeds."""
    directory = str(tmp_path_factory.mktemp('class_run'))
    split = gen(directory, CLASS_SETTINGS)
    assert train(directory, split, [0, 1]) == 0
    checkpoints = [os.path.join(directory, 'runs', 'seed-%s' % s,
                                'checkpoint.json') for s in (0, 1)]
    tam = write_json(os.path.join(directory, 'tam.json'), TAM_SETTINGS)
    return {'dir': directory, 'split': split, 'checkpoints': checkpoints,
            'tam': tam}


def test_gen_needs_family(tmp_path):
    """gen without a family is a usage error."""
    assert main(['gen', '--out', str(tmp_path)]) == 2


def test_gen_unknown_family(tmp_path):
    """An unknown family is rejected by the parser."""
    assert main(['gen', '--family', 'regression', '--out',
                 str(tmp_path)]) == 2


def test_gen_print_config(capsys):
    """--print-config shows the resolved config and writes nothing."""
    assert main(['gen', '--family', 'trans', '--mode', 'comp',
                 '--print-config']) == 0
    config = json.loads(capsys.readouterr().out)
    assert config['family'] == 'transduction'
    assert config['n_train'] == 5000


def test_gen_invalid_settings(tmp_path):
    """Violations of the generation schema exit with 2."""
    assert main(['gen', '--family', 'path', '--grid-size', '11', '--out',
                 str(tmp_path)]) == 2


def test_gen_is_reproducible(tmp_path):
    """Two runs with one config write identical splits and manifests."""
    first = gen(str(tmp_path / 'a'), CLASS_SETTINGS)
    second = gen(str(tmp_path / 'b'), CLASS_SETTINGS)
    with open(first, 'rb') as fa, open(second, 'rb') as fb:
        assert fa.read() == fb.read()
    with open(os.path.join(os.path.dirname(first), 'manifest.json'),
              encoding='utf-8') as fh:
        manifest = json.load(fh)
    assert manifest['command'] == 'gen'
    assert manifest['version'] == __version__
    assert list(manifest['outputs']) == [first]


def test_train_writes_trials(class_run):
    """Every seed gets a checkpoint, a log and a manifest."""
    for checkpoint in class_run['checkpoints']:
        trial = os.path.dirname(checkpoint)
        assert os.path.isfile(checkpoint)
        assert os.path.isfile(os.path.join(trial, 'train_log.jsonl'))
        with open(os.path.join(trial, 'manifest.json'),
                  encoding='utf-8') as fh:
            manifest = json.load(fh)
        assert list(manifest['inputs']) == [class_run['split']]


def test_eval_trials(class_run, tmp_path):
    """Two checkpoints give their rows plus the combined rows."""
    out = str(tmp_path / 'metrics.csv')
    assert main(['eval', '--checkpoint'] + class_run['checkpoints'] +
                ['--split', class_run['split'], '--k', '1,5', '--config',
                 class_run['tam'], '--out', out]) == 0
    table = pd.read_csv(out)
    assert list(table.columns) == METRIC_COLUMNS
    assert len(table) == 6
    assert table['seed'].astype(str).tolist()[-2:] == ['all', 'all']
    assert os.path.isfile(manifest_path(out))
    assert manifest_path(out).endswith('metrics.manifest.json')


def test_eval_k_too_large(class_run, tmp_path):
    """k beyond the adaptation pool is a runtime failure."""
    assert main(['eval', '--checkpoint', class_run['checkpoints'][0],
                 '--split', class_run['split'], '--k', '50', '--config',
                 class_run['tam'], '--out', str(tmp_path / 'm.csv')]) == 1


def test_comp_tam_on_plain_split(class_run, tmp_path):
    """comp-tam on a plain split is a config error."""
    assert train(str(tmp_path), class_run['split'], [0],
                 method='comp-tam') == 2


def test_unknown_config_key(tmp_path):
    """Unknown experiment keys are config errors."""
    config = write_json(tmp_path / 'bad.json', {'method': 'tam',
                                                'learning_rate': 0.1})
    assert main(['train', config]) == 2


def test_experiment_needs_method(tmp_path):
    """An experiment file must name its training method."""
    config = write_json(tmp_path / 'exp.json', {'seeds': [0]})
    assert main(['train', config]) == 2


def test_jobs_must_be_positive(tmp_path):
    """--jobs below 1 is a usage error."""
    config = write_json(tmp_path / 'exp.json', {'method': 'tam'})
    assert main(['train', config, '--jobs', '0']) == 2


def test_version():
    """--version exits cleanly."""
    assert main(['--version']) == 0


def test_viz_embeddings(tmp_path):
    """Path-finding embeddings are projected to a CSV and a plot."""
    directory = str(tmp_path)
    split = gen(directory, PATH_SETTINGS)
    assert train(directory, split, [0]) == 0
    checkpoint = os.path.join(directory, 'runs', 'seed-0', 'checkpoint.json')
    tam = write_json(tmp_path / 'tam.json', TAM_SETTINGS)
    out = str(tmp_path / 'coords.csv')
    plot = str(tmp_path / 'coords.png')
    assert main(['viz-embeddings', '--checkpoint', checkpoint, '--split',
                 split, '--config', tam, '--out', out, '--plot', plot]) == 0
    assert list(pd.read_csv(out).columns) == COORD_COLUMNS
    assert os.path.isfile(plot)


def test_selfcheck():
    """Built-in checks pass."""
    assert main(['selfcheck']) == 0

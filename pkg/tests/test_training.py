"""Test the outer training loops of every method."""
import json

import numpy as np
import pytest

from tamlab.benchgen import GenConfig
from tamlab.extra.exceptions import ConfigError
from tamlab.meta import TamConfig, comp_tam_train, default_adapt_method,\
                        model_config_for, multitask_train, tam_train,\
                        task_agnostic_train, train
from tests.conftest import MODEL_OVERRIDES, TAM_SETTINGS, tiny_model


def settings(**kwargs):
    return TamConfig.create(**dict(TAM_SETTINGS, **kwargs))


@pytest.fixture
def comp_model(path_comp_split):
    """Return the tiny compositional model of the path split."""
    return model_config_for('comp-tam', path_comp_split.config,
                            **MODEL_OVERRIDES)


def test_zero_inner_steps_is_multitask(class_split):
    """Without inner steps the method is multitask training at z = 0."""
    cfg = settings(max_inner_steps=0, validation_interval=100)
    model = tiny_model('classification', zero_init_output=False)
    tam = tam_train(class_split, model, cfg)
    plain = multitask_train(class_split, model, cfg, freeze_embeddings=True)
    for ours, theirs in zip(tam.final_params, plain.final_params):
        assert np.array_equal(ours.data, theirs.data), ours.name


def test_log_events(class_split, tam_config):
    """Every iteration is logged; validation runs at its interval."""
    result = tam_train(class_split, tiny_model('classification'), tam_config)
    iterations = result.log.of_kind('iteration')
    assert [e['iteration'] for e in iterations] == [1, 2, 3, 4]
    assert all(e['inner_steps'] <= 3 for e in iterations)
    assert len(result.log.losses()) == 4
    validations = result.log.of_kind('validation')
    assert [e['iteration'] for e in validations] == [2, 4]
    assert all(e['metric'] == 'accuracy' for e in validations)


def test_best_validation_is_kept(class_split, tam_config):
    """The returned weights are those of the best validation score."""
    result = tam_train(class_split, tiny_model('classification'), tam_config)
    values = [(e['value'], e['iteration'])
              for e in result.log.of_kind('validation')]
    best = max(v for v, _ in values)
    assert result.best_metric == best
    assert result.best_iteration == min(i for v, i in values if v == best)
    if result.best_iteration == 4:
        assert result.params.equal(result.final_params)


def test_no_validation_tasks(path_split, tam_config):
    """Without validation tasks the final weights are returned."""
    cfg = model_config_for('tam', path_split.config, **MODEL_OVERRIDES)
    result = tam_train(path_split, cfg, tam_config)
    assert result.log.of_kind('validation') == []
    assert result.best_iteration is None
    assert result.params is result.final_params


def test_transduction_losses_finite(trans_split, tam_config):
    """Sequence training produces finite losses."""
    result = tam_train(trans_split, tiny_model('transduction'), tam_config)
    assert np.all(np.isfinite(result.log.losses()))
    validations = result.log.of_kind('validation')
    assert all(e['metric'] == 'perplexity' for e in validations)


def test_multitask_learns_embeddings(class_split, tam_config):
    """The per-task table moves away from zero."""
    result = multitask_train(class_split, tiny_model(
        'classification', zero_init_output=False), tam_config)
    assert result.task_embeddings.shape == (4, 8)
    assert np.any(result.task_embeddings != 0.0)


def test_frozen_embeddings_stay_zero(class_split, tam_config):
    """A frozen table stays at zero."""
    result = multitask_train(class_split, tiny_model(
        'classification', zero_init_output=False), tam_config,
                             freeze_embeddings=True)
    assert not np.any(result.task_embeddings)


def test_task_agnostic(class_split, tam_config):
    """Task-agnostic training has no task embeddings."""
    result = task_agnostic_train(class_split, tiny_model('classification'),
                                 tam_config)
    assert result.task_embeddings is None
    assert len(result.log.of_kind('iteration')) == 4
    assert all(e['task'] == 0 for e in result.log.of_kind('iteration'))


def test_comp_tam_needs_compositional_split(class_split, tam_config):
    """comp-tam refuses plain splits."""
    with pytest.raises(ValueError):
        comp_tam_train(class_split, tiny_model('classification'), tam_config)


def test_tam_refuses_compositional_model(path_comp_split, comp_model,
                                         tam_config):
    """tam has no primitive table to train."""
    with pytest.raises(ValueError):
        tam_train(path_comp_split, comp_model, tam_config)


def test_comp_tam_never_moves_unknown_vector(path_comp_split, comp_model,
                                             tam_config):
    """Only multitask training uses the unknown-primitive vector."""
    result = comp_tam_train(path_comp_split, comp_model, tam_config)
    assert not np.any(result.final_params['unknown_primitive'].data)
    slots = [e['unknown_slot'] for e in result.log.of_kind('iteration')]
    assert set(slots) <= {0, 1, 2}


def test_family_mismatch(class_split, tam_config):
    """A model of another family is refused."""
    with pytest.raises(ValueError):
        tam_train(class_split, tiny_model('transduction'), tam_config)


def test_invalid_settings_refused(class_split):
    """Settings are checked before training."""
    with pytest.raises(ConfigError):
        tam_train(class_split, tiny_model('classification'),
                  settings(k_values=[]))


def test_same_seed_same_weights(class_split, tam_config):
    """Training depends on its settings only."""
    first = train('tam', class_split, tiny_model('classification'),
                  tam_config)
    second = train('tam', class_split, tiny_model('classification'),
                   tam_config)
    assert first.final_params.equal(second.final_params)


@pytest.mark.parametrize('method, compositional', [
    ('tam', False),
    ('comp-tam', True),
    ('multitask', True),
    ('task-agnostic', False),
])
def test_model_config_for(method, compositional):
    """Only comp-tam and multitask train a primitive table."""
    gen = GenConfig.create(family='transduction', mode='comp')
    cfg = model_config_for(method, gen, **MODEL_OVERRIDES)
    assert cfg.compositional is compositional
    assert cfg.num_primitives == (44 + 421 + 17 if compositional else 0)
    assert cfg.embed_dim == 8


@pytest.mark.parametrize('method, compositional, expected', [
    ('tam', False, 'tam-z'),
    ('comp-tam', True, 'comp-slot'),
    ('multitask', True, 'comp-slot'),
    ('multitask', False, 'tam-z'),
    ('task-agnostic', False, 'finetune-full'),
])
def test_default_adapt_method(method, compositional, expected):
    """Each training method has its natural adaptation method."""
    assert default_adapt_method(method, compositional) == expected


def test_log_file(class_split, tam_config, tmp_path):
    """The log is written one JSON event per line."""
    result = multitask_train(class_split, tiny_model('classification'),
                             tam_config)
    path = result.log.write_jsonl(str(tmp_path / 'log.jsonl'))
    with open(path, 'r', encoding='utf-8') as fh:
        events = [json.loads(line) for line in fh]
    assert events == result.log.events
    assert events[0]['event'] == 'iteration'

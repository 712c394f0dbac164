# pylint: disable=redefined-outer-name
"""Config for pytest

Define pytest fixtures and variables. Splits are tiny and built once per
session; models have one layer of width 8 so every training test runs a
handful of outer iterations in well under a second.
"""
import os

import pytest

from tamlab import Context
from tamlab.benchgen import GenConfig, build_split, serialize_split
from tamlab.meta import TamConfig
from tamlab.model import ModelConfig

MODEL_OVERRIDES = {
    'num_layers': 1,
    'embed_dim': 8,
    'num_heads': 2,
    'feedforward_dim': 16,
    'max_positions': 32,
    'adapter_bottleneck_dim': 2,
}

TAM_SETTINGS = {
    'max_inner_steps': 3,
    'inner_lr': 0.05,
    'examples_per_task': 16,
    'max_outer_iterations': 4,
    'k_values': [1, 5],
    'adaptation_steps_at_test': 3,
    'validation_interval': 2,
    'finetune_steps': 3,
    'seed': 0,
}

CLASS_SETTINGS = {
    'family': 'classification', 'seed': 3, 'n_train': 4, 'n_val': 2,
    'n_test': 2, 'examples_per_task': 60, 'support_size': 20,
    'candidate_pool': 2000, 'probe_size': 128,
}

TRANS_SETTINGS = {
    'family': 'transduction', 'seed': 5, 'n_train': 4, 'n_val': 2,
    'n_test': 2, 'examples_per_task': 40, 'support_size': 10,
    'candidate_pool': 2000, 'probe_size': 128,
}

PATH_SETTINGS = {
    'family': 'pathfinding', 'seed': 2, 'grid_size': 5, 'num_obstacles': 2,
    'n_train': 4, 'n_val': 0, 'n_test': 4, 'examples_per_task': 24,
    'support_size': 8,
}

PATH_COMP_SETTINGS = dict(PATH_SETTINGS, mode='comp', seed=1, n_train=6,
                          n_val=2, n_test=3)


def tiny_model(family, **kwargs):
    """Return a one-layer ModelConfig of ``family``."""
    values = dict(MODEL_OVERRIDES, family=family)
    values.update(kwargs)
    return ModelConfig.create(**values)


@pytest.fixture(scope='session')
def class_split():
    """Return a plain classification split of 4/2/2 tasks."""
    return build_split(GenConfig.create(**CLASS_SETTINGS))


@pytest.fixture(scope='session')
def trans_split():
    """Return a plain transduction split of 4/2/2 tasks."""
    return build_split(GenConfig.create(**TRANS_SETTINGS))


@pytest.fixture(scope='session')
def path_split():
    """Return a plain 5x5 path-finding split without validation tasks."""
    return build_split(GenConfig.create(**PATH_SETTINGS))


@pytest.fixture(scope='session')
def path_comp_split():
    """Return a compositional 5x5 path-finding split of 6/2/3 tasks."""
    return build_split(GenConfig.create(**PATH_COMP_SETTINGS))


@pytest.fixture(scope='session')
def class_split_file(class_split, tmp_path_factory):
    """Return the path of the classification split written to disk."""
    path = os.path.join(str(tmp_path_factory.mktemp('data')), 'split.jsonl')
    return serialize_split(class_split, path)


@pytest.fixture
def tam_config():
    """Return a TamConfig with a few inner and outer steps."""
    return TamConfig.create(**TAM_SETTINGS)


@pytest.fixture
def model_overrides():
    """Return the ModelConfig overrides of the tiny test model."""
    return dict(MODEL_OVERRIDES)


@pytest.fixture
def context():
    """Create and close context before and after unittest."""
    context_ = Context.create()
    yield context_
    context_.close()

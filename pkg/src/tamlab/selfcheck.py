"""Built-in correctness checks run by ``tamlab selfcheck``.

Gradient checks of small transformers in every family and conditioning
mode, the worked transduction example and the printed path-finding
examples.
"""
import logging

from tamlab.benchgen import ElementwiseTransform, Example, Grid,\
                            RearrangeTransform, SubstitutionTransform,\
                            TaskSpec, eval_transduction_pipeline,\
                            rasterize, shortest_path
from tamlab.benchgen.grid import path_length
from tamlab.enums import Conditioning, Family
from tamlab.extra.const import PATH_TOKEN_OFFSET
from tamlab.extra.utils import child_rng
from tamlab.model import ModelConfig, ModelParams, collate, nll_loss
from tamlab.numerics import Tensor, finite_difference_check

logger = logging.getLogger(__name__)

PRINTED_PATHS = [
    ([39, 78, 51, 9, 31, 63, 44, 69],
     [170, 160, 150, 140, 130, 121, 112, 103, 114]),
    ([12, 35, 99, 22, 62, 44, 25, 21],
     [170, 161, 152, 143, 134, 124, 114]),
    ([90, 99, 1, 96, 34, 50, 94, 31],
     [170, 171, 162, 152, 143, 133, 123, 114]),
]


class CheckResult:
    """Outcome of one named check."""
    def __init__(self, name, passed, detail=''):
        self.name = name
        self.passed = bool(passed)
        self.detail = detail

    def __repr__(self):
        return '%s %s %s' % ('PASS' if self.passed else 'FAIL', self.name,
                             self.detail)


def tiny_config(family, conditioning, seed=0):
    """One-layer, dimension-8 model with non-zero output weights."""
    return ModelConfig.create(
        family=family, conditioning=conditioning, num_layers=1, embed_dim=8,
        num_heads=2, feedforward_dim=16, vocab_size=12, num_classes=4,
        max_positions=16, adapter_bottleneck_dim=2, init_std=0.3,
        zero_init_output=False, seed=seed)


def tiny_batch(family, rng, batch=2, length=4):
    x = rng.integers(0, 12, size=(batch, length))
    if family == Family.classification.value:
        examples = [Example(row, int(rng.integers(4))) for row in x]
    else:
        examples = [Example(row, rng.integers(0, 12, size=length))
                    for row in x]
    return collate(examples, family)


def gradient_check(family, conditioning, seed=0, samples=None):
    """Finite-difference check of every parameter and of z.

    Every coordinate is checked unless ``samples`` limits them per tensor.
    """
    cfg = tiny_config(family, conditioning, seed)
    rng = child_rng(seed, 11)
    params = ModelParams.init(cfg)
    z = Tensor(rng.normal(0.0, 0.1, size=cfg.task_embedding_shape()),
               requires_grad=True, name='z')
    batch = tiny_batch(family, rng)
    report = finite_difference_check(
        lambda: nll_loss(params, z, batch), list(params) + [z],
        samples=samples, rng=rng, tolerance=1e-4, abs_floor=1e-5)
    return CheckResult('gradcheck %s/%s' % (family, conditioning),
                       report.passed,
                       'max relative error %.2e over %s coordinates'
                       % (report.max_relative_error, len(report.entries)))


def transduction_oracle():
    spec = TaskSpec(Family.transduction.value, transforms=(
        ElementwiseTransform('add', 2),
        SubstitutionTransform('replace-value', v=2, v2=1),
        RearrangeTransform('reverse')))
    out = eval_transduction_pipeline(spec, [0, 5, 0, 3, 6])
    return CheckResult('transduction oracle', out == [8, 5, 1, 7, 1],
                       'got %s' % out)


def printed_paths():
    results = []
    start, end = (7, 0), (1, 4)
    for index, (source, target) in enumerate(PRINTED_PATHS):
        grid = Grid.from_tokens(source)
        path = shortest_path(grid, start, end)
        ok = path is not None and len(path) == len(target) \
            == path_length(grid, start, end) \
            and path[0] == start and path[-1] == end \
            and rasterize(path[-1]) + PATH_TOKEN_OFFSET == target[-1]
        results.append(CheckResult(
            'printed path %s' % (index + 1), ok,
            'length %s, expected %s' % (None if path is None else len(path),
                                        len(target))))
    return results


def run_selfcheck(seed=0):
    """Run every check.

    Returns:
        list(:class:`CheckResult`)
    """
    results = [gradient_check(family.value, mode.value, seed)
               for family in (Family.classification, Family.transduction)
               for mode in Conditioning]
    results.append(transduction_oracle())
    results.extend(printed_paths())
    for result in results:
        log = logger.info if result.passed else logger.error
        log('[Selfcheck] %s', result)
    return results

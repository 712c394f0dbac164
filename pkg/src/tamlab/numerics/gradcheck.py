"""Central finite-difference check of analytic gradients."""
import logging

import numpy as np

from tamlab.extra.exceptions import GradientCheckError
from tamlab.numerics.tensor import backward, no_grad, recording

logger = logging.getLogger(__name__)


class GradCheckReport:
    """Outcome of :func:`finite_difference_check`.

    Attributes:
        entries (list(tuple)): ``(param_index, coordinate, analytic,
            numeric, relative_error)`` per checked coordinate.
        tolerance (float): Largest accepted relative error.
    """
    def __init__(self, entries, tolerance):
        self.entries = entries
        self.tolerance = tolerance

    @property
    def max_relative_error(self):
        return max((e[-1] for e in self.entries), default=0.0)

    @property
    def passed(self):
        return self.max_relative_error <= self.tolerance

    @property
    def worst(self):
        return max(self.entries, key=lambda e: e[-1], default=None)

    def __repr__(self):
        return 'GradCheckReport(passed=%s, max_relative_error=%.3g, n=%s)' % (
            self.passed, self.max_relative_error, len(self.entries))


def relative_error(analytic, numeric, abs_floor):
    scale = max(abs(analytic), abs(numeric))
    if scale < abs_floor:
        return 0.0
    return abs(analytic - numeric) / scale


def _evaluate(f, param_index, coordinate):
    with no_grad():
        value = f().item()
    if not np.isfinite(value):
        raise GradientCheckError(param_index, coordinate, value)
    return value


def finite_difference_check(f, params, step=1e-5, tolerance=1e-4,
                            samples=None, rng=None, abs_floor=1e-8):
    """Compare backward gradients of ``f`` with central differences.

    Args:
        f (function): No-argument callable returning a scalar Tensor that
            depends on ``params``.
        params (list(Tensor)): Leaves requiring gradients; perturbed in
            place and restored.
        step (float): Finite-difference half width h.
        tolerance (float): Largest accepted relative error.
        samples (int): Coordinates checked per parameter, all when None.
        rng (numpy.random.Generator): Picks the sampled coordinates.
        abs_floor (float): Pairs of gradients both below it count as equal.

    Returns:
        :class:`GradCheckReport`

    Raises:
        ValueError: If step is not positive.
        GradientCheckError: If f is non-finite at an evaluated point.
    """
    if step <= 0:
        raise ValueError('[GradCheck] step must be positive, got %s' % step)
    rng = rng if rng is not None else np.random.default_rng(0)

    for param in params:
        param.zero_grad()
    with recording():
        loss = f()
        if not np.isfinite(loss.item()):
            raise GradientCheckError(None, (), loss.item())
        backward(loss)
    analytic = [np.zeros(p.shape) if p.grad is None else p.grad.copy()
                for p in params]

    entries = []
    for index, param in enumerate(params):
        size = param.size
        if samples is None or samples >= size:
            picks = np.arange(size)
        else:
            picks = np.sort(rng.choice(size, size=samples, replace=False))
        for pick in picks:
            coordinate = np.unravel_index(pick, param.shape)
            original = param.data[coordinate]
            param.data[coordinate] = original + step
            plus = _evaluate(f, index, coordinate)
            param.data[coordinate] = original - step
            minus = _evaluate(f, index, coordinate)
            param.data[coordinate] = original
            numeric = (plus - minus) / (2.0 * step)
            grad = float(analytic[index][coordinate])
            entries.append((index, tuple(int(c) for c in coordinate), grad,
                            numeric, relative_error(grad, numeric, abs_floor)))

    report = GradCheckReport(entries, tolerance)
    logger.debug('[GradCheck] %s', report)
    return report

"""Adam optimizer.

``adam_step`` is the bare bias-corrected update over explicit gradients;
:class:`Adam` binds it to a parameter list and reads their ``grad``.
"""
import logging

import numpy as np

from tamlab.extra.exceptions import ShapeError

logger = logging.getLogger(__name__)


class AdamState:
    """Moments and hyperparameters of one Adam optimizer.

    Attributes:
        step_count (int): Number of updates applied so far.
        first_moment (list(numpy.ndarray)): Running mean of gradients.
        second_moment (list(numpy.ndarray)): Running mean of squared
            gradients.
        learning_rate (float): Step size.
        beta1 (float): Decay of the first moment.
        beta2 (float): Decay of the second moment.
        epsilon (float): Denominator floor.
    """
    def __init__(self, shapes, learning_rate=1e-3, beta1=0.9, beta2=0.999,
                 epsilon=1e-8):
        self.step_count = 0
        self.first_moment = [np.zeros(shape) for shape in shapes]
        self.second_moment = [np.zeros(shape) for shape in shapes]
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.epsilon = float(epsilon)

    @classmethod
    def create(cls, params, **hyper):
        """Fresh state for the tensors ``params``."""
        return cls([p.shape for p in params], **hyper)

    def state_dict(self):
        return {
            'step_count': self.step_count,
            'learning_rate': self.learning_rate,
            'beta1': self.beta1,
            'beta2': self.beta2,
            'epsilon': self.epsilon,
            'first_moment': [m.copy() for m in self.first_moment],
            'second_moment': [v.copy() for v in self.second_moment]}

    @classmethod
    def from_state_dict(cls, state):
        obj = cls([np.shape(m) for m in state['first_moment']],
                  state['learning_rate'], state['beta1'], state['beta2'],
                  state['epsilon'])
        obj.step_count = int(state['step_count'])
        obj.first_moment = [np.array(m, dtype=np.float64)
                            for m in state['first_moment']]
        obj.second_moment = [np.array(v, dtype=np.float64)
                             for v in state['second_moment']]
        return obj


def adam_step(state, params, grads):
    """Apply one Adam update to ``params`` in place.

    Args:
        state (:class:`AdamState`): Advanced in place.
        params (list(Tensor)): Parameters, updated through their ``data``.
        grads (list(numpy.ndarray)): One gradient per parameter; None is
            read as zeros.

    Raises:
        ShapeError: If the gradients or the state do not match params.
    """
    if len(params) != len(grads) or len(params) != len(state.first_moment):
        raise ShapeError(
            'adam_step', [(len(params),), (len(grads),),
                          (len(state.first_moment),)],
            'params, grads and moments differ in count')
    for param, grad, moment in zip(params, grads, state.first_moment):
        if grad is not None and np.shape(grad) != param.shape \
                or moment.shape != param.shape:
            raise ShapeError(
                'adam_step', [param.shape, np.shape(grad), moment.shape])

    state.step_count += 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1 ** state.step_count
    correction2 = 1.0 - b2 ** state.step_count
    for i, (param, grad) in enumerate(zip(params, grads)):
        if grad is None:
            grad = np.zeros(param.shape)
        m = state.first_moment[i]
        v = state.second_moment[i]
        m *= b1
        m += (1.0 - b1) * grad
        v *= b2
        v += (1.0 - b2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        param.data -= state.learning_rate * m_hat / (np.sqrt(v_hat)
                                                     + state.epsilon)


class Adam:
    """Adam over a fixed list of parameter tensors.

    Args:
        params (list(Tensor)): Tensors to update.
        learning_rate, beta1, beta2, epsilon: See :class:`AdamState`.
    """
    def __init__(self, params, learning_rate=1e-3, beta1=0.9, beta2=0.999,
                 epsilon=1e-8):
        self.params = list(params)
        self.state = AdamState.create(
            self.params, learning_rate=learning_rate, beta1=beta1,
            beta2=beta2, epsilon=epsilon)

    def step(self, grads=None):
        """Update with ``grads``, or with the params' own ``grad``."""
        if grads is None:
            grads = [p.grad for p in self.params]
        adam_step(self.state, self.params, list(grads))

    def zero_grad(self):
        for param in self.params:
            param.zero_grad()

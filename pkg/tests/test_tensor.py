"""Test the tape, backward and the differentiable ops."""
import numpy as np
import pytest

from tamlab.extra.exceptions import IndexRangeError, ShapeError, TapeError
from tamlab.numerics import Tensor, backward, no_grad, ops, recording


def test_broadcast_add_gradient():
    """Gradient of a broadcast operand is summed back to its shape."""
    x = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
    b = Tensor([1.0, 2.0, 3.0], requires_grad=True)
    with recording():
        backward(ops.sum(ops.mul(ops.add(x, b), 2.0)))
    np.testing.assert_array_equal(x.grad, np.full((2, 3), 2.0))
    np.testing.assert_array_equal(b.grad, np.full(3, 4.0))


def test_leaf_gradients_accumulate():
    """Two backward passes add up in ``grad`` until it is cleared."""
    x = Tensor([1.0, 2.0], requires_grad=True)
    for _ in range(2):
        with recording():
            backward(ops.sum(x * x))
    np.testing.assert_array_equal(x.grad, [4.0, 8.0])
    x.zero_grad()
    assert x.grad is None


def test_reused_tensor_gets_summed_gradient():
    """A tensor feeding two ops receives both gradients."""
    x = Tensor([3.0], requires_grad=True)
    with recording():
        y = x * 2.0
        backward(ops.sum(y * y + y))
    # d/dx (4x^2 + 2x) = 8x + 2
    np.testing.assert_allclose(x.grad, [26.0])


def test_backward_needs_scalar():
    """Backward of a non-scalar raises TapeError."""
    x = Tensor([1.0, 2.0], requires_grad=True)
    with recording():
        with pytest.raises(TapeError, match='scalar'):
            backward(x * 2.0)


def test_backward_outside_its_tape():
    """A loss recorded in a closed block cannot be differentiated later."""
    x = Tensor([1.0], requires_grad=True)
    with recording():
        loss = ops.sum(x * x)
    with pytest.raises(TapeError, match='current tape'):
        backward(loss)


def test_constant_loss_has_no_tape():
    """Ops over constants are not recorded, so backward refuses them."""
    with recording() as tape:
        loss = ops.sum(Tensor([1.0, 2.0]))
        assert len(tape) == 0
        with pytest.raises(TapeError):
            backward(loss)


def test_no_grad_records_nothing():
    """Inside no_grad outputs never require gradients."""
    x = Tensor([1.0, 2.0], requires_grad=True)
    with recording() as tape:
        with no_grad():
            out = ops.sum(x * x)
        assert not out.requires_grad
        assert len(tape) == 0
    assert out.item() == 5.0


def test_recording_restores_previous_tape():
    """Nested blocks give the outer tape back on exit."""
    x = Tensor([1.0], requires_grad=True)
    with recording() as outer:
        ops.sum(x)
        with recording() as inner:
            ops.sum(x)
            ops.sum(x)
        ops.sum(x)
    assert len(inner) == 2
    assert len(outer) == 2


def test_cross_entropy_uniform():
    """Zero logits over 3 classes cost ln 3; gradient is softmax - onehot."""
    logits = Tensor(np.zeros((2, 3)), requires_grad=True)
    with recording():
        losses = ops.cross_entropy(logits, [0, 2])
        backward(ops.sum(losses))
    np.testing.assert_allclose(losses.data, [np.log(3.0)] * 2)
    expected = np.full((2, 3), 1.0 / 3.0)
    expected[0, 0] -= 1.0
    expected[1, 2] -= 1.0
    np.testing.assert_allclose(logits.grad, expected)


def test_cross_entropy_large_logits_stay_finite():
    """Logits are shifted before exponentiation."""
    losses = ops.cross_entropy(Tensor([[1000.0, 0.0]]), [1])
    np.testing.assert_allclose(losses.data, [1000.0])


@pytest.mark.parametrize('targets', [[3], [-1]])
def test_cross_entropy_target_range(targets):
    """Targets outside [0, V) raise IndexRangeError."""
    with pytest.raises(IndexRangeError):
        ops.cross_entropy(Tensor(np.zeros((1, 3))), targets)


def test_embedding_gradient_with_repeats():
    """Repeated rows add their gradients."""
    table = Tensor(np.zeros((4, 2)), requires_grad=True)
    with recording():
        backward(ops.sum(ops.embedding(table, [[1, 1], [3, 1]])))
    np.testing.assert_array_equal(table.grad[:, 0], [0.0, 3.0, 0.0, 1.0])


def test_embedding_out_of_range():
    """An index past the table raises IndexRangeError naming it."""
    with pytest.raises(IndexRangeError) as err:
        ops.embedding(Tensor(np.zeros((4, 2))), [1, 4])
    assert err.value.index == 4
    assert err.value.size == 4


def test_matmul_shape_error():
    """Disagreeing inner dimensions raise ShapeError with both shapes."""
    with pytest.raises(ShapeError) as err:
        ops.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))
    assert err.value.op == 'matmul'
    assert err.value.shapes == [(2, 3), (2, 3)]


def test_add_not_broadcastable():
    """Operands numpy cannot broadcast raise ShapeError."""
    with pytest.raises(ShapeError):
        ops.add(Tensor(np.zeros(3)), Tensor(np.zeros(4)))


def test_softmax_rows_sum_to_one():
    """Softmax normalises the last axis."""
    out = ops.softmax(Tensor(np.arange(6.0).reshape(2, 3)))
    np.testing.assert_allclose(out.data.sum(axis=-1), [1.0, 1.0])


def test_layer_norm_statistics():
    """Layer norm output has zero mean and unit variance per row."""
    out = ops.layer_norm(Tensor([[1.0, 2.0, 3.0, 6.0]]))
    np.testing.assert_allclose(out.data.mean(axis=-1), [0.0], atol=1e-12)
    np.testing.assert_allclose(out.data.var(axis=-1), [1.0], atol=1e-4)


def test_causal_mask():
    """Entries above the diagonal are -inf, the rest zero."""
    mask = ops.causal_mask(3).data
    assert np.isneginf(mask[0, 1]) and np.isneginf(mask[1, 2])
    assert mask[1, 0] == 0.0 and mask[2, 2] == 0.0


def test_getitem_gradient():
    """Indexing scatters the gradient back to the picked entries."""
    x = Tensor(np.arange(4.0), requires_grad=True)
    with recording():
        backward(ops.sum(x[np.array([0, 2, 2])]))
    np.testing.assert_array_equal(x.grad, [1.0, 0.0, 2.0, 0.0])

# Third party imports
import numpy as np
import pytest

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.error_handling.exceptions.dimension_exception import DimensionException
from app.error_handling.exceptions.non_finite_exception import NonFiniteException
from app.error_handling.exceptions.tensor_index_exception import TensorIndexException
from app.service.autodiff.functional import matmul
from app.service.autodiff.tensor import ComputeGraph, Tensor, backward, checked_mode, no_grad


def test_matmul_identity():
    a = Tensor(np.eye(2))
    b = Tensor([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(matmul(a, b).data, b.data)


def test_matmul_hand_product():
    out = matmul(Tensor([[1.0, 2.0], [3.0, 4.0]]), Tensor([[5.0], [6.0]]))
    assert np.array_equal(out.data, np.array([[17.0], [39.0]]))


def test_matmul_mismatch_names_both_shapes():
    with pytest.raises(DimensionException) as excinfo:
        matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))
    assert "(2, 3)" in str(excinfo.value)


def test_batched_matmul_broadcasts_weight():
    x = Tensor(np.arange(12.0).reshape(2, 3, 2), requires_grad=True)
    w = Tensor(np.ones((2, 4)), requires_grad=True)
    out = x @ w
    assert out.shape == (2, 3, 4)
    backward(out.sum())
    assert w.grad.shape == (2, 4)
    assert np.allclose(w.grad[0], x.data[..., 0].sum())


def test_sum_gradient_is_all_ones():
    x = Tensor(np.random.default_rng(0).normal(size=(3, 4)), requires_grad=True)
    backward(x.sum())
    assert np.array_equal(x.grad, np.ones((3, 4)))


def test_quadratic_gradient():
    x = Tensor([3.0], requires_grad=True)
    backward((x * x).sum())
    assert np.array_equal(x.grad, np.array([6.0]))


def test_unused_parameters_get_zero_gradient():
    x = Tensor([3.0], requires_grad=True)
    unused = Tensor(np.ones((2, 2)), requires_grad=True)
    frozen = Tensor(np.ones(2))
    backward((x * x).sum(), params=[x, unused, frozen])
    assert np.array_equal(x.grad, np.array([6.0]))
    assert np.array_equal(unused.grad, np.zeros((2, 2)))
    assert frozen.grad is None


def test_shared_subexpression_accumulates():
    x = Tensor([2.0], requires_grad=True)
    y = x * 3.0
    backward((y + y).sum())
    assert x.grad[0] == pytest.approx(6.0)


def test_backward_rejects_non_scalar_loss():
    x = Tensor(np.ones(3), requires_grad=True)
    with pytest.raises(ContractException):
        backward(x * 2.0)


def test_node_ids_are_topological():
    x = Tensor(np.ones(2), requires_grad=True)
    loss = ((x * 2.0) + x).sum()
    graph = ComputeGraph.trace(loss)
    ids = [node.node_id for node in graph.nodes]
    assert ids == sorted(ids)
    for node in graph.nodes:
        assert all(parent < node.node_id for parent in node.input_ids)
    assert graph.leaves() == [x]


def test_backward_is_bitwise_deterministic():
    rng = np.random.default_rng(3)
    w = Tensor(rng.normal(size=(4, 4)), requires_grad=True)
    x = Tensor(rng.normal(size=(5, 4)))

    def run():
        w.grad = None
        backward(((x @ w) * (x @ w)).mean())
        return w.grad.copy()

    assert np.array_equal(run(), run())


def test_frozen_tensors_record_no_parents():
    frozen = Tensor(np.ones((2, 2)))
    out = frozen @ Tensor(np.ones((2, 2)))
    assert out.parents == ()
    assert not out.requires_grad


def test_no_grad_disables_recording():
    x = Tensor(np.ones(2), requires_grad=True)
    with no_grad():
        out = x * 2.0
    assert not out.requires_grad
    assert out.parents == ()


def test_checked_mode_rejects_non_finite():
    with pytest.raises(NonFiniteException):
        Tensor([1.0, np.nan])
    x = Tensor([0.0])
    with pytest.raises(NonFiniteException):
        x.log()


def test_unchecked_mode_allows_non_finite():
    with checked_mode(False):
        out = Tensor([0.0]).log()
    assert np.isneginf(out.data[0])


def test_indexing_backward_scatters():
    x = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
    backward(x[:, 1].sum())
    assert np.array_equal(x.grad, np.array([[0.0, 1.0, 0.0], [0.0, 1.0, 0.0]]))


def test_fancy_indexing_accumulates_repeats():
    x = Tensor(np.arange(3.0), requires_grad=True)
    backward(x[np.array([0, 0, 2])].sum())
    assert np.array_equal(x.grad, np.array([2.0, 0.0, 1.0]))


def test_invalid_axis_raises_index_error():
    with pytest.raises(TensorIndexException):
        Tensor(np.ones((2, 2))).sum(axis=2)


def test_reshape_and_transpose_gradients():
    x = Tensor(np.arange(6.0), requires_grad=True)
    out = x.reshape(2, 3).T
    assert out.shape == (3, 2)
    backward((out * Tensor(np.arange(6.0).reshape(3, 2))).sum())
    assert np.array_equal(x.grad, np.array([0.0, 2.0, 4.0, 1.0, 3.0, 5.0]))

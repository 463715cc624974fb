# Python standard library imports
import itertools
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.error_handling.exceptions.dimension_exception import DimensionException
from app.error_handling.exceptions.non_finite_exception import NonFiniteException
from app.error_handling.exceptions.tensor_index_exception import TensorIndexException


"""
SUMMARY:

Dense float64 tensors with reverse-mode differentiation. Every tensor gets a
node id from one global counter when it is created, so ids are a valid
topological order: an op output always has a larger id than its inputs.
backward walks the traced nodes in descending id and accumulates parent
gradients in the order each node lists its inputs, which makes two runs on the
same graph produce bitwise-identical gradients.

Tensors that do not require grad (frozen weights, constants, anything built
under no_grad) record no parents, so nothing behind them is kept alive.
"""

logger = logging.getLogger(__name__)

_node_counter = itertools.count()

BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]
Operand = Union["Tensor", float, int, np.ndarray]


class _GraphMode:
    recording: bool = True
    checked: bool = True


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording, used for evaluation and decoding."""
    previous = _GraphMode.recording
    _GraphMode.recording = False
    try:
        yield
    finally:
        _GraphMode.recording = previous


@contextmanager
def checked_mode(enabled: bool = True) -> Iterator[None]:
    """Toggle the NaN/Inf check performed whenever a tensor is created."""
    previous = _GraphMode.checked
    _GraphMode.checked = enabled
    try:
        yield
    finally:
        _GraphMode.checked = previous


def set_checked_mode(enabled: bool) -> None:
    _GraphMode.checked = bool(enabled)


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to the operand's shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _as_tensor(value: Operand) -> "Tensor":
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


class Tensor:
    """
    A dense row-major float64 array with an optional gradient slot.

    Attributes:
        data (np.ndarray): The values, always float64 and C-contiguous
        grad (np.ndarray | None): Accumulated gradient, same shape as data; None until backward reaches it
        requires_grad (bool): Whether gradients flow into this tensor
        name (str | None): Optional label used by checkpoints and error messages
        op (str): The operation that produced the tensor, "leaf" for parameters and constants
        parents (tuple): Input tensors of the producing operation
        node_id (int): Creation order, doubles as the topological order of the graph
    """

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        array = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
        if _GraphMode.checked and array.size and not np.isfinite(array).all():
            raise NonFiniteException(
                detail="Refusing to create a tensor with non-finite values",
                operation="leaf" if name is None else name,
                bad_count=int(array.size - np.isfinite(array).sum())
            )
        self.data: np.ndarray = array
        self.grad: Optional[np.ndarray] = None
        self.requires_grad: bool = bool(requires_grad)
        self.name = name
        self.op: str = "leaf"
        self.parents: Tuple["Tensor", ...] = ()
        self._backward_fn: Optional[BackwardFn] = None
        self.node_id: int = next(_node_counter)

    @classmethod
    def from_op(cls, data: np.ndarray, parents: Sequence["Tensor"], op: str, backward_fn: BackwardFn) -> "Tensor":
        """Create an operation output and register it on the graph when any input needs grad."""
        array = np.ascontiguousarray(data, dtype=np.float64)
        if _GraphMode.checked and array.size and not np.isfinite(array).all():
            raise NonFiniteException(
                detail="Operation produced non-finite values",
                operation=op,
                bad_count=int(array.size - np.isfinite(array).sum())
            )
        out = cls.__new__(cls)
        out.data = array
        out.grad = None
        out.name = None
        out.op = op
        out.node_id = next(_node_counter)
        needs_grad = _GraphMode.recording and any(p.requires_grad for p in parents)
        out.requires_grad = needs_grad
        out.parents = tuple(parents) if needs_grad else ()
        out._backward_fn = backward_fn if needs_grad else None
        return out

    # ---------------------- Introspection ---------------------- #
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self._backward_fn is None

    def item(self) -> float:
        if self.size != 1:
            raise ContractException(f"item() needs a single element, got shape {self.shape}", "item")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data) if self.requires_grad else None

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, op={self.op!r}, requires_grad={self.requires_grad}{label})"

    # ---------------------- Elementwise arithmetic ---------------------- #
    def _broadcast_shape(self, other: "Tensor", op: str) -> None:
        try:
            np.broadcast_shapes(self.shape, other.shape)
        except ValueError as e:
            raise DimensionException("Operands cannot be broadcast together", self.shape, other.shape, op) from e

    def __add__(self, other: Operand) -> "Tensor":
        other = _as_tensor(other)
        self._broadcast_shape(other, "add")
        a_shape, b_shape = self.shape, other.shape
        return Tensor.from_op(
            self.data + other.data, (self, other), "add",
            lambda g: (_unbroadcast(g, a_shape), _unbroadcast(g, b_shape))
        )

    def __radd__(self, other: Operand) -> "Tensor":
        return _as_tensor(other) + self

    def __sub__(self, other: Operand) -> "Tensor":
        other = _as_tensor(other)
        self._broadcast_shape(other, "sub")
        a_shape, b_shape = self.shape, other.shape
        return Tensor.from_op(
            self.data - other.data, (self, other), "sub",
            lambda g: (_unbroadcast(g, a_shape), _unbroadcast(-g, b_shape))
        )

    def __rsub__(self, other: Operand) -> "Tensor":
        return _as_tensor(other) - self

    def __neg__(self) -> "Tensor":
        return Tensor.from_op(-self.data, (self,), "neg", lambda g: (-g,))

    def __mul__(self, other: Operand) -> "Tensor":
        other = _as_tensor(other)
        self._broadcast_shape(other, "mul")
        a, b = self.data, other.data
        return Tensor.from_op(
            a * b, (self, other), "mul",
            lambda g: (_unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape))
        )

    def __rmul__(self, other: Operand) -> "Tensor":
        return _as_tensor(other) * self

    def __truediv__(self, other: Operand) -> "Tensor":
        other = _as_tensor(other)
        self._broadcast_shape(other, "div")
        a, b = self.data, other.data
        return Tensor.from_op(
            a / b, (self, other), "div",
            lambda g: (_unbroadcast(g / b, a.shape), _unbroadcast(-g * a / (b * b), b.shape))
        )

    def exp(self) -> "Tensor":
        y = np.exp(self.data)
        return Tensor.from_op(y, (self,), "exp", lambda g: (g * y,))

    def log(self) -> "Tensor":
        x = self.data
        with np.errstate(divide="ignore"):
            y = np.log(x)
        return Tensor.from_op(y, (self,), "log", lambda g: (g / x,))

    # ---------------------- Linear algebra ---------------------- #
    def matmul(self, other: "Tensor") -> "Tensor":
        """
        Matrix product over the last two axes; leading axes broadcast.

        Raises:
            DimensionException: If either operand is below rank 2 or the inner dimensions differ
        """
        if self.ndim < 2 or other.ndim < 2 or self.shape[-1] != other.shape[-2]:
            raise DimensionException(
                "Inner dimensions of matmul do not agree", self.shape, other.shape, "matmul"
            )
        a, b = self.data, other.data

        def backward_fn(g: np.ndarray):
            grad_a = _unbroadcast(np.matmul(g, np.swapaxes(b, -1, -2)), a.shape)
            grad_b = _unbroadcast(np.matmul(np.swapaxes(a, -1, -2), g), b.shape)
            return grad_a, grad_b

        return Tensor.from_op(np.matmul(a, b), (self, other), "matmul", backward_fn)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return self.matmul(other)

    # ---------------------- Reductions ---------------------- #
    def _normalize_axis(self, axis: int) -> int:
        if not -self.ndim <= axis < self.ndim:
            raise TensorIndexException(f"Axis {axis} is invalid for a rank-{self.ndim} tensor", axis, self.ndim)
        return axis % self.ndim

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        shape = self.shape
        if axis is None:
            return Tensor.from_op(
                np.asarray(self.data.sum()), (self,), "sum",
                lambda g: (np.broadcast_to(g, shape).copy(),)
            )
        axis = self._normalize_axis(axis)

        def backward_fn(g: np.ndarray):
            expanded = g if keepdims else np.expand_dims(g, axis)
            return (np.broadcast_to(expanded, shape).copy(),)

        return Tensor.from_op(self.data.sum(axis=axis, keepdims=keepdims), (self,), "sum", backward_fn)

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        count = self.size if axis is None else self.shape[self._normalize_axis(axis)]
        if count == 0:
            raise ContractException("Cannot take the mean of an empty axis", "mean")
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    # ---------------------- Structure ---------------------- #
    def reshape(self, *shape: int) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        original = self.shape
        try:
            reshaped = self.data.reshape(shape)
        except ValueError as e:
            raise DimensionException("Cannot reshape tensor", original, shape, "reshape") from e
        return Tensor.from_op(reshaped, (self,), "reshape", lambda g: (g.reshape(original),))

    def transpose(self, *axes: int) -> "Tensor":
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        elif len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        if sorted(axes) != list(range(self.ndim)):
            raise TensorIndexException(f"Axes {axes} are not a permutation of rank {self.ndim}", None, self.ndim)
        inverse = tuple(np.argsort(axes))
        return Tensor.from_op(
            np.transpose(self.data, axes), (self,), "transpose",
            lambda g: (np.transpose(g, inverse),)
        )

    def swapaxes(self, axis_a: int, axis_b: int) -> "Tensor":
        axes = list(range(self.ndim))
        a, b = self._normalize_axis(axis_a), self._normalize_axis(axis_b)
        axes[a], axes[b] = axes[b], axes[a]
        return self.transpose(tuple(axes))

    @property
    def T(self) -> "Tensor":
        return self.swapaxes(-1, -2)

    def __getitem__(self, index) -> "Tensor":
        shape = self.shape
        try:
            selected = self.data[index]
        except IndexError as e:
            raise TensorIndexException(f"Invalid index for tensor of shape {shape}: {e}") from e

        parts = index if isinstance(index, tuple) else (index,)
        is_basic = all(isinstance(p, (int, np.integer, slice)) or p is Ellipsis or p is None for p in parts)

        def backward_fn(g: np.ndarray):
            grad = np.zeros(shape, dtype=np.float64)
            if is_basic:
                # basic indexing selects each entry at most once
                grad[index] = g
            else:
                np.add.at(grad, index, g)
            return (grad,)

        return Tensor.from_op(np.array(selected, dtype=np.float64), (self,), "index", backward_fn)


@dataclass(frozen=True)
class GraphNode:
    """One recorded operation: what ran, which node ids fed it, and its output."""
    node_id: int
    op: str
    input_ids: Tuple[int, ...]
    tensor: Tensor


class ComputeGraph:
    """The part of the graph that can carry gradient to a given output, in topological order."""

    def __init__(self, nodes: List[GraphNode]):
        self.nodes = nodes

    @classmethod
    def trace(cls, output: Tensor) -> "ComputeGraph":
        seen: Dict[int, Tensor] = {}
        stack = [output]
        while stack:
            tensor = stack.pop()
            if tensor.node_id in seen or not tensor.requires_grad:
                continue
            seen[tensor.node_id] = tensor
            stack.extend(tensor.parents)
        nodes = [
            GraphNode(t.node_id, t.op, tuple(p.node_id for p in t.parents), t)
            for _, t in sorted(seen.items())
        ]
        return cls(nodes)

    def leaves(self) -> List[Tensor]:
        return [node.tensor for node in self.nodes if node.tensor.is_leaf]

    def __len__(self) -> int:
        return len(self.nodes)


def backward(loss: Tensor, graph: Optional[ComputeGraph] = None,
             params: Optional[Sequence[Tensor]] = None) -> ComputeGraph:
    """
    Populate .grad on every requires_grad leaf of the graph, plus any extra
    `params`. Leaves the loss does not depend on get a zero gradient.

    Gradients accumulate into existing .grad arrays, so callers zero them first
    (see zero_grad) to get the gradient of this loss alone.

    Raises:
        ContractException: If the loss is not a single element
    """
    if loss.size != 1:
        raise ContractException(f"backward needs a scalar loss, got shape {loss.shape}", "backward")
    graph = graph if graph is not None else ComputeGraph.trace(loss)
    pending: Dict[int, np.ndarray] = {loss.node_id: np.ones_like(loss.data)}

    for node in reversed(graph.nodes):
        grad = pending.pop(node.node_id, None)
        if grad is None:
            continue
        tensor = node.tensor
        if tensor.is_leaf:
            tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad
            continue
        for parent, parent_grad in zip(tensor.parents, tensor._backward_fn(grad)):
            if parent_grad is None or not parent.requires_grad:
                continue
            if parent_grad.shape != parent.shape:
                raise DimensionException("Gradient shape does not match its tensor", parent_grad.shape, parent.shape, tensor.op)
            if parent.node_id in pending:
                pending[parent.node_id] = pending[parent.node_id] + parent_grad
            else:
                pending[parent.node_id] = parent_grad

    for leaf in graph.leaves() + list(params or []):
        if leaf.requires_grad and leaf.grad is None:
            leaf.grad = np.zeros_like(leaf.data)
    return graph


def zero_grad(params: Sequence[Tensor]) -> None:
    """Give every trainable tensor a zero gradient; frozen ones keep no slot."""
    for param in params:
        param.zero_grad()

# Python standard library imports
import logging
from typing import Dict, List, Sequence, Tuple

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.models.reports.allocation_matrix import AllocationMatrix
from app.models.reports.router_report import TokenAllocation
from app.models.tasks.example import Example
from app.service.adapters.adapter_set import AdapterSet, PmoeAdapterSet
from app.service.adapters.pmoe_forward import AdaptedTransformer
from app.service.transformer.base_transformer import BaseTransformer

logger = logging.getLogger(__name__)


def _router_model(base: BaseTransformer, adapters: AdapterSet) -> AdaptedTransformer:
    if not isinstance(adapters, PmoeAdapterSet):
        raise ContractException("Router analysis needs PMoE adapters", "router_analysis")
    return AdaptedTransformer(base, adapters)


def _example_gates(model: AdaptedTransformer, examples: Sequence[Example]) -> List[np.ndarray]:
    return model.gates([e.training_tokens() for e in examples])


def allocation_matrix(
    base: BaseTransformer,
    adapters: AdapterSet,
    test_sets: Dict[int, Sequence[Example]]
) -> AllocationMatrix:
    """P[i][k]: mean of G[·, k] over every token (prompt and target) of task i's test split."""
    model = _router_model(base, adapters)
    task_ids = sorted(test_sets)
    rows = []
    for task_id in task_ids:
        gates = _example_gates(model, test_sets[task_id])
        mean = np.concatenate(gates, axis=0).mean(axis=0)
        rows.append((mean / mean.sum()).tolist())
    return AllocationMatrix(task_ids=task_ids, probabilities=rows)


def usage_entropy(allocation: AllocationMatrix) -> Tuple[List[float], float]:
    """Natural-log entropy of each row and the mean over rows."""
    p = allocation.as_array()
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    rows = terms.sum(axis=1).tolist()
    return rows, float(np.mean(rows)) if rows else 0.0


def token_allocation_dump(base: BaseTransformer, adapters: AdapterSet, tokens: Sequence[int]) -> List[TokenAllocation]:
    """One record per position: token, argmax expert, its probability and the full gate row."""
    gate = _router_model(base, adapters).gate(tokens)
    return [
        TokenAllocation(
            position=position,
            token=int(token),
            expert=int(np.argmax(row)),
            probability=float(row.max()),
            gate=row.tolist(),
        )
        for position, (token, row) in enumerate(zip(tokens, gate))
    ]


def task_identification_accuracy(
    base: BaseTransformer,
    adapters: AdapterSet,
    test_sets: Dict[int, Sequence[Example]],
    expert_of_task: Dict[int, int] = None
) -> float:
    """
    Percentage of test sequences whose mean gate row peaks at the expert
    trained on their task. Tasks map to experts by stream position unless
    expert_of_task says otherwise.
    """
    model = _router_model(base, adapters)
    mapping = expert_of_task or {task_id: index for index, task_id in enumerate(sorted(test_sets))}
    hits, total = 0, 0
    for task_id, examples in test_sets.items():
        for gate in _example_gates(model, examples):
            hits += int(np.argmax(gate.mean(axis=0)) == mapping[task_id])
            total += 1
    return 100.0 * hits / total if total else 0.0

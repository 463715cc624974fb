# Python standard library imports
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.error_handling.exceptions.divergence_exception import DivergenceException
from app.error_handling.exceptions.input_exception import InputException
from app.error_handling.exceptions.non_finite_exception import NonFiniteException
from app.models.config.train_hyper import TrainHyper
from app.models.metrics.training_metrics import TrainingMetrics
from app.models.reports.run_summary import StageSummary
from app.models.reports.score_matrix import ScoreMatrix
from app.models.tasks.example import Example
from app.models.tasks.task_spec import ProbeSet
from app.models.tasks.task_splits import TaskSplits
from app.models.training.training_log import TrainingLog
from app.service.adapters.adapter_set import AdapterSet, PmoeAdapterSet, apply_freezing_policy
from app.service.adapters.pmoe_forward import AdaptedTransformer, pmoe_forward, routing_aux_loss
from app.service.autodiff import functional as F
from app.service.autodiff.tensor import Tensor, backward
from app.service.metrics.continual_metrics import compute_bwt, compute_general_delta, compute_op
from app.service.tasks.scoring import evaluate_examples, evaluate_general_suite
from app.service.training.optimizer import AdamWOptimizer
from app.service.training.replay_buffer import ReplayBuffer, build_replay_batch
from app.service.training.schedule import cosine_lr
from app.service.transformer.base_transformer import BaseTransformer
from app.utils.batch_utils import BatchUtils
from app.utils.constants.stream_constants import StreamConstants
from app.utils.rng_utils import RngUtils


@dataclass
class Seq2SeqBatch:
    """
    A right-padded batch in next-token form: inputs[b, j] predicts targets[b, j].

    loss_mask selects positions whose target lies in the answer span (target
    tokens and the closing EOS); token_mask selects every real input position.
    """
    inputs: np.ndarray
    targets: np.ndarray
    lengths: np.ndarray
    loss_mask: np.ndarray
    token_mask: np.ndarray
    task_ids: np.ndarray


def build_seq2seq_batch(examples: Sequence[Example]) -> Seq2SeqBatch:
    tokens, lengths = BatchUtils.pad_sequences([e.training_tokens() for e in examples])
    inputs, targets = tokens[:, :-1], tokens[:, 1:]
    input_lengths = lengths - 1
    positions = np.arange(inputs.shape[1])[None, :]
    starts = np.array([len(e.prompt) - 1 for e in examples])[:, None]
    loss_mask = ((positions >= starts) & (positions < input_lengths[:, None])).astype(np.float64)
    token_mask = BatchUtils.length_mask(input_lengths, inputs.shape[1])
    return Seq2SeqBatch(inputs, targets, input_lengths, loss_mask, token_mask, np.array([e.task_id for e in examples]))


@dataclass
class StageCallbackArgs:
    """What the caller receives after each stage (used for per-stage checkpoints)."""
    t: int
    adapters: AdapterSet
    stage: StageSummary


@dataclass
class StreamArtifacts:
    scores: ScoreMatrix
    general_scores: List[List[float]]
    stages: List[StageSummary]
    training_log: TrainingLog
    adapters: AdapterSet
    task_metrics: List[TrainingMetrics] = field(default_factory=list)


class ContinualTrainerService:
    """
    Trains adapters over an ordered task stream on top of a frozen base model.

    Task index t is the 0-based position in the stream; in PMoE mode it is
    also the index of the deep expert trained on that task.
    """

    def __init__(self, base: BaseTransformer, hyper: TrainHyper):
        self.logger = logging.getLogger(__name__)
        self.base = base
        self.hyper = hyper
        self.last_metrics: Optional[TrainingMetrics] = None
        if not base.frozen:
            self.logger.warning("Base model is not frozen; freezing it before adapter training")
            base.freeze()

    # ---------------------- Losses ---------------------- #
    def batch_loss(
        self,
        adapters: AdapterSet,
        batch: Seq2SeqBatch,
        expert_of_task: Dict[int, int]
    ) -> Tuple[Tensor, Optional[Tensor]]:
        """Target-span cross-entropy plus λ·routing loss (PMoE with λ > 0)."""
        logits, gate = pmoe_forward(batch.inputs, self.base, adapters, batch.lengths)
        loss = F.cross_entropy(logits, batch.targets, batch.loss_mask)
        if gate is None or self.hyper.aux_loss_weight <= 0:
            return loss, None
        aux = self.batch_routing_loss(gate, batch, expert_of_task)
        return loss + aux * self.hyper.aux_loss_weight, aux

    @staticmethod
    def batch_routing_loss(gate: Tensor, batch: Seq2SeqBatch, expert_of_task: Dict[int, int]) -> Tensor:
        """
        Token-weighted mean of −log G_k over a batch whose rows may belong to
        different tasks (replayed examples target their own expert).
        """
        per_token = gate.shape[1] == batch.inputs.shape[1]
        total, weight = None, 0.0
        for task_id in sorted(set(batch.task_ids.tolist())):
            rows = np.flatnonzero(batch.task_ids == task_id)
            mask = batch.token_mask[rows] if per_token else None
            count = float(mask.sum()) if per_token else float(len(rows))
            term = routing_aux_loss(gate[rows], expert_of_task[task_id], mask) * count
            total = term if total is None else total + term
            weight += count
        return total * (1.0 / weight)

    # ---------------------- Training ---------------------- #
    def train_task(
        self,
        adapters: AdapterSet,
        dataset: Sequence[Example],
        buffer: ReplayBuffer,
        t: int,
        expert_of_task: Optional[Dict[int, int]] = None
    ) -> Tuple[AdapterSet, TrainingLog]:
        """
        Train on D_t mixed with replayed memory, then store ceil(replay_frac·|D_t|)
        examples of D_t in the buffer.

        Raises:
            InputException: If the dataset is empty
            ContractException: If PMoE adapters do not hold exactly t + 1 experts
            DivergenceException: If the loss stops being finite
        """
        if not dataset:
            raise InputException(f"Training set of task {t} is empty", f"task {t}")
        if isinstance(adapters, PmoeAdapterSet) and adapters.num_experts != t + 1:
            raise ContractException(
                f"Task {t} needs {t + 1} experts, adapters hold {adapters.num_experts}; call add_expert first",
                "train_task"
            )
        expert_of_task = expert_of_task or {e.task_id: t for e in dataset}
        hyper = self.hyper
        apply_freezing_policy(adapters, t, hyper.freeze_old_experts)
        optimizer = AdamWOptimizer(adapters.trainable_parameters(), hyper)

        replay_size = len(build_replay_batch(buffer, hyper.replay_mix_frac, hyper.seed, t, 0))
        steps_per_epoch = math.ceil((len(dataset) + replay_size) / hyper.batch_size)
        total_steps = hyper.epochs_per_task * steps_per_epoch

        log = TrainingLog()
        metrics = TrainingMetrics(
            label="Task Training", task_index=t, total_steps=total_steps,
            replay_examples=replay_size, trainable_parameters=optimizer.parameter_count()
        )
        metrics.set_phase("training")
        metrics.start_processing()
        self.logger.info(
            "Training task %d: %d examples + %d replayed per epoch, %d steps, %d trainable parameters",
            t, len(dataset), replay_size, total_steps, metrics.trainable_parameters
        )

        step = 0
        for epoch in range(hyper.epochs_per_task):
            replay = build_replay_batch(buffer, hyper.replay_mix_frac, hyper.seed, t, epoch)
            epoch_data = list(dataset) + replay
            order = RngUtils.stream(hyper.seed, StreamConstants.TRAIN_SHUFFLE, t, epoch).permutation(len(epoch_data))
            for start in range(0, len(order), hyper.batch_size):
                examples = [epoch_data[int(i)] for i in order[start:start + hyper.batch_size]]
                lr_now = cosine_lr(step, total_steps, hyper.lr)
                batch = build_seq2seq_batch(examples)
                try:
                    loss, aux = self.batch_loss(adapters, batch, expert_of_task)
                except NonFiniteException as e:
                    raise DivergenceException("Training produced non-finite values", t, step) from e
                value = loss.item()
                if not math.isfinite(value):
                    raise DivergenceException("Training loss is not finite", t, step, value)
                optimizer.zero_grad()
                backward(loss, params=optimizer.params)
                optimizer.step(lr_now)
                aux_value = aux.item() if aux is not None else 0.0
                log.append(step, t, value, aux_value, lr_now)
                metrics.record_step(value, aux_value, len(examples))
                metrics.log_progress(self.logger)
                step += 1

        buffer.store_task_samples(dataset, hyper.replay_frac, hyper.seed, t)
        metrics.end_processing()
        metrics.set_phase("completed")
        metrics.log_final_metrics(self.logger)
        self.last_metrics = metrics
        return adapters, log

    def run_stream(
        self,
        tasks: Sequence[TaskSplits],
        adapters: AdapterSet,
        probes: Sequence[ProbeSet] = (),
        base_general_scores: Optional[List[float]] = None,
        on_stage: Optional[Callable[[StageCallbackArgs], None]] = None
    ) -> StreamArtifacts:
        """
        For each task in order: grow the expert pool (PMoE, from the second task
        on), train, then score every task seen so far and the general suite.

        Raises:
            InputException: If the task list is empty
        """
        if not tasks:
            raise InputException("The task stream is empty", "tasks")
        if isinstance(adapters, PmoeAdapterSet) and adapters.num_experts != 1:
            raise ContractException("A stream starts from adapters holding one expert", "run_stream")

        names = [split.spec.name for split in tasks]
        expert_of_task = {split.spec.task_id: index for index, split in enumerate(tasks)}
        base_general = list(base_general_scores or [])
        scores = ScoreMatrix(task_names=names)
        buffer = ReplayBuffer()
        full_log = TrainingLog()
        stages: List[StageSummary] = []
        general_history: List[List[float]] = []
        task_metrics: List[TrainingMetrics] = []

        for t, split in enumerate(tasks):
            if isinstance(adapters, PmoeAdapterSet) and t >= 1:
                adapters.add_expert()
            adapters, log = self.train_task(adapters, split.train, buffer, t, expert_of_task)
            full_log.extend(log)
            task_metrics.append(self.last_metrics)

            model = AdaptedTransformer(self.base, adapters)
            scores.append_row([evaluate_examples(model, tasks[i].test) for i in range(t + 1)])
            general = evaluate_general_suite(model, probes) if probes else []
            general_history.append(general)
            stage = StageSummary(
                t=t + 1,
                task=split.spec.name,
                op=compute_op(scores, t + 1),
                bwt=compute_bwt(scores, t + 1),
                general_delta=compute_general_delta(general, base_general) if probes and base_general else 0.0,
                general_scores=general,
                num_experts=adapters.num_experts,
                final_loss=log.rows[-1].loss if len(log) else None,
            )
            stages.append(stage)
            self.logger.info(
                "Stage %d (%s): R=%s OP=%.2f BWT=%.2f dRG=%.2f",
                stage.t, stage.task, [round(s, 1) for s in scores.rows[-1]], stage.op, stage.bwt, stage.general_delta
            )
            if on_stage is not None:
                on_stage(StageCallbackArgs(t=t + 1, adapters=adapters, stage=stage))

        return StreamArtifacts(scores, general_history, stages, full_log, adapters, task_metrics)

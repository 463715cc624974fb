# Python standard library imports
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

# Application imports
from app.error_handling.exceptions.checkpoint_exception import CheckpointConsistencyException
from app.error_handling.exceptions.config_validation_exception import ConfigValidationException
from app.error_handling.exceptions.contract_exception import ContractException
from app.models.config.config_enums import TrainingMode
from app.models.config.run_config import RunConfig
from app.models.reports.router_report import RouterReport, TokenAllocationDump
from app.models.reports.run_summary import RunSummary, SweepRow
from app.models.tasks.task_spec import ProbeSet
from app.repository.checkpoint_repository import CheckpointRepository
from app.repository.run_artifact_repository import RunArtifactRepository, read_corpus
from app.service.adapters.adapter_factory import build_adapter_set
from app.service.adapters.adapter_set import (
    LoraSeqAdapterSet, PmoeAdapterSet, adapter_param_formula, trainable_param_count
)
from app.service.adapters.pmoe_forward import AdaptedTransformer
from app.service.autodiff.tensor import set_checked_mode
from app.service.metrics.router_analysis import (
    allocation_matrix, task_identification_accuracy, token_allocation_dump, usage_entropy
)
from app.service.tasks.general_corpus import FILLER_FAMILIES, generate_general_corpus, generate_probe_set
from app.service.tasks.scoring import evaluate_examples, evaluate_general_suite
from app.service.tasks.task_generator import build_task_stream
from app.service.training.continual_trainer import ContinualTrainerService, StageCallbackArgs
from app.service.transformer.base_transformer import BaseTransformer
from app.service.transformer.forward import BaseLanguageModel
from app.service.transformer.pretrain_service import PretrainService

BASE_CHECKPOINT_FILE = "base.ckpt"
CHECKPOINT_DIR = "checkpoints"


class ExperimentService:
    """
    The command workflows: pretraining, continual runs, evaluation, router
    analysis, the τ sweep, parameter accounting and dataset export. Every
    file goes through the repositories.
    """

    def __init__(self, checkpoint_repository: Optional[CheckpointRepository] = None):
        self.logger = logging.getLogger(__name__)
        self.checkpoints = checkpoint_repository or CheckpointRepository()

    # ---------------------- Shared helpers ---------------------- #
    @staticmethod
    def probe_sets(config: RunConfig) -> List[ProbeSet]:
        return [generate_probe_set(family, config.probe_size, config.seed) for family in range(len(FILLER_FAMILIES))]

    def _prepare(self, config: RunConfig) -> RunArtifactRepository:
        set_checked_mode(config.checked_mode)
        artifacts = RunArtifactRepository(config.output_dir)
        artifacts.ensure_dir()
        artifacts.write_config(config.model_dump(mode="json"))
        return artifacts

    def _check_base_matches(self, config: RunConfig, base: BaseTransformer) -> None:
        if base.config != config.base_config():
            self.logger.warning(
                "Base checkpoint shape %s differs from the run config; the checkpoint's shape is used",
                base.config.model_dump()
            )
        if not 0 < config.tau < base.num_layers:
            raise ContractException(f"tau {config.tau} does not fit a {base.num_layers}-layer base model", "tau")

    def load_or_pretrain_base(self, config: RunConfig) -> tuple:
        """(frozen base, its general-suite scores R^G_0 on this run's probe sets)."""
        if config.base_checkpoint:
            loaded = self.checkpoints.load_checkpoint(config.base_checkpoint)
            if loaded.base is None:
                raise CheckpointConsistencyException("Base checkpoint holds no base model", "contents")
            self._check_base_matches(config, loaded.base)
            metadata = loaded.metadata
            scores = metadata.get("general_scores")
            same_probes = (metadata.get("probe_seed"), metadata.get("probe_size")) == (config.seed, config.probe_size)
            if scores is None or not same_probes:
                self.logger.info(
                    "Scoring the base model on this run's probe sets (seed %d, size %d)", config.seed, config.probe_size
                )
                scores = evaluate_general_suite(BaseLanguageModel(loaded.base), self.probe_sets(config))
            return loaded.base, list(scores)
        self.logger.warning("No base checkpoint given; pretraining a base model for this run")
        result = self.pretrain(config, write_files=False)
        return result["base"], result["general_scores"]

    # ---------------------- pretrain ---------------------- #
    def pretrain(self, config: RunConfig, corpus_path: Optional[str] = None, write_files: bool = True) -> Dict[str, Any]:
        if corpus_path:
            sequences = read_corpus(corpus_path)
            probes = self.probe_sets(config)
        else:
            corpus = generate_general_corpus(config.corpus_size, config.seed, config.probe_size)
            sequences = [list(s) for s in corpus.sequences]
            probes = list(corpus.probes)
        service = PretrainService()
        base = service.pretrain_base(sequences, config.base_config(), config.pretrain_hyper(), config.seed)
        general_scores = evaluate_general_suite(BaseLanguageModel(base), probes)
        result: Dict[str, Any] = {"base": base, "general_scores": general_scores}
        if write_files:
            artifacts = self._prepare(config)
            path = artifacts.path(BASE_CHECKPOINT_FILE)
            self.checkpoints.save_checkpoint(
                path,
                {"kind": "base", "seed": config.seed, "general_scores": general_scores,
                 "probe_seed": config.seed, "probe_size": config.probe_size,
                 "probe_names": list(FILLER_FAMILIES), "run_config": config.model_dump(mode="json")},
                base=base
            )
            if not corpus_path:
                artifacts.write_corpus("corpus.txt", sequences)
            artifacts.write_train_log(service.training_log)
            result["checkpoint"] = path
        self.logger.info("Base general-suite scores: %s", general_scores)
        return result

    # ---------------------- continual ---------------------- #
    def continual(self, config: RunConfig, base: Optional[BaseTransformer] = None,
                  base_general_scores: Optional[List[float]] = None) -> RunSummary:
        artifacts = self._prepare(config)
        if base is None:
            base, base_general_scores = self.load_or_pretrain_base(config)
        tasks = build_task_stream(config.num_tasks, config.train_size, config.test_size, config.seed)
        adapters = build_adapter_set(
            config.mode, base.num_layers, base.config.d_model, config.rank, config.tau, config.seed, config.routing
        )
        artifacts.ensure_dir(CHECKPOINT_DIR)

        def save_stage(args: StageCallbackArgs) -> None:
            self.checkpoints.save_checkpoint(
                artifacts.path(CHECKPOINT_DIR, f"stage_{args.t}.ckpt"),
                {"kind": "adapters", "stage": args.t, "seed": config.seed, "num_experts": args.adapters.num_experts,
                 "run_config": config.model_dump(mode="json")},
                adapters=args.adapters
            )

        trainer = ContinualTrainerService(base, config.train_hyper())
        result = trainer.run_stream(tasks, adapters, self.probe_sets(config), base_general_scores, save_stage)

        count, fraction = trainable_param_count(result.adapters, config.mode, base.parameter_count())
        summary = RunSummary(
            mode=config.mode.value,
            tau=config.tau if config.mode == TrainingMode.PMOE else None,
            rank=config.rank,
            seed=config.seed,
            task_names=result.scores.task_names,
            base_general_scores=list(base_general_scores or []),
            trainable_parameters=count,
            trainable_fraction=fraction,
            stages=result.stages,
        )
        artifacts.write_metrics(result.scores)
        artifacts.write_summary(summary)
        artifacts.write_train_log(result.training_log)
        self.logger.info(
            "Run finished: OP=%.2f BWT=%.2f dRG=%.2f (%s)",
            summary.final.op, summary.final.bwt, summary.final.general_delta, config.output_dir
        )
        return summary

    # ---------------------- eval ---------------------- #
    def load_adapted(self, config: RunConfig, checkpoint_path: str) -> tuple:
        """(base, adapters or None, metadata); stage checkpoints take their base from --base-checkpoint."""
        loaded = self.checkpoints.load_checkpoint(checkpoint_path)
        base = loaded.base
        if base is None:
            if not config.base_checkpoint:
                raise CheckpointConsistencyException("No base model: pass --base-checkpoint", "base")
            base = self.checkpoints.load_base(config.base_checkpoint)
        return base, loaded.adapters, loaded.metadata

    def evaluate(self, config: RunConfig, checkpoint_path: str, suite: str = "all") -> Dict[str, Any]:
        base, adapters, metadata = self.load_adapted(config, checkpoint_path)
        model = AdaptedTransformer(base, adapters) if adapters is not None else BaseLanguageModel(base)
        result: Dict[str, Any] = {"checkpoint": checkpoint_path}
        if suite in ("tasks", "all"):
            num_tasks = metadata.get("stage", config.num_tasks)
            tasks = build_task_stream(num_tasks, config.train_size, config.test_size, config.seed)
            result["task_scores"] = {split.spec.name: evaluate_examples(model, split.test) for split in tasks}
        if suite in ("general", "all"):
            scores = evaluate_general_suite(model, self.probe_sets(config))
            result["general_scores"] = dict(zip(FILLER_FAMILIES, scores))
            result["general_mean"] = sum(scores) / len(scores)
        artifacts = self._prepare(config)
        artifacts.write_json("eval.json", result)
        return result

    # ---------------------- router-report ---------------------- #
    def router_report(self, config: RunConfig, checkpoint_path: str, dump_count: int = 1) -> RouterReport:
        base, adapters, _ = self.load_adapted(config, checkpoint_path)
        if not isinstance(adapters, PmoeAdapterSet):
            raise ContractException("router-report needs a PMoE adapter checkpoint", "router-report")
        report = self.build_router_report(config, base, adapters, dump_count)
        self._prepare(config).write_router_report(report)
        return report

    def build_router_report(self, config: RunConfig, base: BaseTransformer, adapters: PmoeAdapterSet,
                            dump_count: int = 1) -> RouterReport:
        tasks = build_task_stream(adapters.num_experts, config.train_size, config.test_size, config.seed)
        test_sets = {split.spec.task_id: split.test for split in tasks}
        allocation = allocation_matrix(base, adapters, test_sets)
        rows, mean = usage_entropy(allocation)
        dumps = [
            TokenAllocationDump(task_id=split.spec.task_id,
                                records=token_allocation_dump(base, adapters, example.training_tokens()))
            for split in tasks for example in split.test[:dump_count]
        ]
        return RouterReport(
            tau=adapters.tau,
            num_experts=adapters.num_experts,
            allocation=allocation,
            row_entropies=rows,
            mean_entropy=mean,
            identification_accuracy=task_identification_accuracy(base, adapters, test_sets),
            diagonally_dominant=allocation.is_diagonally_dominant(),
            token_dumps=dumps,
        )

    # ---------------------- tau-sweep ---------------------- #
    def tau_sweep(self, config: RunConfig) -> List[SweepRow]:
        """One PMoE run per τ on a shared base, each in its own directory, then sweep.csv."""
        set_checked_mode(config.checked_mode)
        base, base_scores = self.load_or_pretrain_base(config)
        rows: List[SweepRow] = []
        for tau in config.sweep_taus():
            run_config = config.model_copy(update={
                "tau": tau, "mode": TrainingMode.PMOE, "output_dir": os.path.join(config.output_dir, f"tau_{tau}")
            })
            summary = self.continual(run_config, base, base_scores)
            last = os.path.join(run_config.output_dir, CHECKPOINT_DIR, f"stage_{summary.final.t}.ckpt")
            adapters = self.checkpoints.load_checkpoint(last).adapters
            report = self.build_router_report(run_config, base, adapters)
            RunArtifactRepository(run_config.output_dir).write_router_report(report)
            rows.append(SweepRow(
                tau=tau,
                op=summary.final.op,
                bwt=summary.final.bwt,
                general_delta=summary.final.general_delta,
                mean_entropy=report.mean_entropy,
                trainable_parameters=summary.trainable_parameters,
                compute_proxy=lora_macs_per_token(base.num_layers, tau, config.rank, base.config.d_model,
                                                  adapters.num_experts),
                run_dir=run_config.output_dir,
            ))
        RunArtifactRepository(config.output_dir).write_sweep(rows)
        return rows

    # ---------------------- param-count ---------------------- #
    @staticmethod
    def param_count(config: RunConfig, ranks: Sequence[int]) -> List[Dict[str, Any]]:
        """pmoe and lora-seq adapter sizes for each rank, with T = num_tasks experts."""
        bad_ranks = [rank for rank in ranks if rank < 1 or 4 * rank > config.d_model]
        if bad_ranks:
            raise ConfigValidationException(
                f"ranks: every rank must lie in [1, d_model/4] ({config.d_model // 4}), got {bad_ranks}", "ranks"
            )
        base_total = BaseTransformer.count_parameters(config.base_config())
        rows = []
        for rank in ranks:
            pmoe = PmoeAdapterSet.create(config.num_layers, config.d_model, rank, config.tau, config.seed)
            for _ in range(config.num_tasks - 1):
                pmoe.add_expert()
            lora = LoraSeqAdapterSet.create(config.num_layers, config.d_model, rank, config.seed)
            for mode, adapters in ((TrainingMode.PMOE, pmoe), (TrainingMode.LORA_SEQ, lora)):
                count, fraction = trainable_param_count(adapters, mode, base_total)
                rows.append({
                    "mode": mode.value, "rank": rank, "tau": config.tau if mode == TrainingMode.PMOE else None,
                    "num_experts": adapters.num_experts, "parameters": count,
                    "percent_of_base": round(100.0 * fraction, 4), "base_parameters": base_total,
                })
        return rows

    # ---------------------- export-tasks ---------------------- #
    def export_tasks(self, config: RunConfig) -> List[str]:
        artifacts = self._prepare(config)
        written = []
        for split in build_task_stream(config.num_tasks, config.train_size, config.test_size, config.seed):
            stem = f"tasks/{split.spec.task_id}_{split.spec.name}"
            written.append(artifacts.write_examples(f"{stem}_train.txt", split.train))
            written.append(artifacts.write_examples(f"{stem}_test.txt", split.test))
        return written


def lora_macs_per_token(num_layers: int, tau: int, rank: int, d_model: int, num_experts: int) -> int:
    """Multiply-adds the adapters add per token: every LoRA factor entry and router weight is used once."""
    return adapter_param_formula(TrainingMode.PMOE, num_layers, tau, rank, d_model, num_experts)

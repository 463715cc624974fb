# Python standard library imports
import csv
import json
import logging
import os
from typing import Any, Dict, Iterable, List, Sequence

# Third party imports
from pydantic import BaseModel

# Application imports
from app.error_handling.exceptions.input_exception import InputException
from app.error_handling.exceptions.persistence_exception import PersistenceException
from app.models.reports.router_report import RouterReport
from app.models.reports.run_summary import RunSummary, SweepRow
from app.models.reports.score_matrix import ScoreMatrix
from app.models.tasks.example import Example
from app.models.training.training_log import TrainingLog


class RunArtifactRepository:
    """
    Writes the files of one run directory: config echo, metrics.csv,
    summary.json, train_log.csv, router_report.json, sweep.csv and
    token-id text files.
    """

    CONFIG_FILE = "config.json"
    METRICS_FILE = "metrics.csv"
    SUMMARY_FILE = "summary.json"
    TRAIN_LOG_FILE = "train_log.csv"
    ROUTER_REPORT_FILE = "router_report.json"
    SWEEP_FILE = "sweep.csv"

    def __init__(self, run_dir: str):
        self.logger = logging.getLogger(__name__)
        self.run_dir = run_dir

    def path(self, *parts: str) -> str:
        return os.path.join(self.run_dir, *parts)

    def ensure_dir(self, *parts: str) -> str:
        directory = self.path(*parts)
        try:
            os.makedirs(directory, exist_ok=True)
        except OSError as e:
            raise PersistenceException("Could not create directory", directory, e) from e
        return directory

    def _write_text(self, filename: str, text: str) -> str:
        path = self.path(filename)
        try:
            os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        except OSError as e:
            self.logger.error("Failed to write %s: %s", path, e)
            raise PersistenceException("Could not write run artifact", path, e) from e
        return path

    def _write_rows(self, filename: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        path = self.path(filename)
        try:
            os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(header)
                writer.writerows(rows)
        except OSError as e:
            self.logger.error("Failed to write %s: %s", path, e)
            raise PersistenceException("Could not write run artifact", path, e) from e
        return path

    def _write_model(self, filename: str, model: BaseModel) -> str:
        return self._write_text(filename, model.model_dump_json(indent=2) + "\n")

    # ---------------------- Run files ---------------------- #
    def write_config(self, config: Dict[str, Any]) -> str:
        return self._write_text(self.CONFIG_FILE, json.dumps(config, indent=2, sort_keys=True) + "\n")

    def write_metrics(self, scores: ScoreMatrix) -> str:
        return self._write_rows(self.METRICS_FILE, ("t", "i", "score"), scores.entries())

    def write_summary(self, summary: RunSummary) -> str:
        return self._write_model(self.SUMMARY_FILE, summary)

    def write_train_log(self, log: TrainingLog) -> str:
        rows = ((r.step, r.task, repr(r.loss), repr(r.aux_loss), repr(r.lr)) for r in log.rows)
        return self._write_rows(self.TRAIN_LOG_FILE, ("step", "task", "loss", "aux_loss", "lr"), rows)

    def write_router_report(self, report: RouterReport) -> str:
        return self._write_model(self.ROUTER_REPORT_FILE, report)

    def write_sweep(self, rows: List[SweepRow]) -> str:
        header = tuple(SweepRow.model_fields)
        return self._write_rows(self.SWEEP_FILE, header, ([getattr(r, h) for h in header] for r in rows))

    def write_json(self, filename: str, payload: Any) -> str:
        return self._write_text(filename, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def read_summary(self) -> RunSummary:
        path = self.path(self.SUMMARY_FILE)
        try:
            with open(path, "r", encoding="utf-8") as f:
                return RunSummary.model_validate_json(f.read())
        except OSError as e:
            raise PersistenceException("Could not read run summary", path, e) from e

    # ---------------------- Token files ---------------------- #
    def write_examples(self, filename: str, examples: Sequence[Example]) -> str:
        """One example per line: prompt ids, a tab, target ids."""
        return self._write_text(filename, "".join(e.to_line() + "\n" for e in examples))

    def write_corpus(self, filename: str, sequences: Sequence[Sequence[int]]) -> str:
        return self._write_text(filename, "".join(" ".join(map(str, s)) + "\n" for s in sequences))


def read_corpus(path: str) -> List[List[int]]:
    """
    Plain-text token-id file: one space-separated sequence per line, blank lines skipped.

    Raises:
        PersistenceException: If the file cannot be read
        InputException: If a line holds something other than integers
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise PersistenceException("Could not read corpus", path, e) from e
    sequences = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            sequences.append([int(token) for token in line.split()])
        except ValueError as e:
            raise InputException(f"Line {number} is not a list of token ids", path) from e
    return sequences


def read_examples(path: str, task_id: int) -> List[Example]:
    """Inverse of write_examples."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise PersistenceException("Could not read dataset", path, e) from e
    examples = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        prompt, _, target = line.partition("\t")
        try:
            examples.append(Example(
                prompt=tuple(int(t) for t in prompt.split()),
                target=tuple(int(t) for t in target.split()),
                task_id=task_id,
            ))
        except ValueError as e:
            raise InputException(f"Line {number} is not a prompt/target pair", path) from e
    return examples

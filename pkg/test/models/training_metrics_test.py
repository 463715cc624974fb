# Python standard library imports
import logging

# Third party imports
import pytest

# Application imports
from app.models.metrics.training_metrics import TrainingMetrics

logger = logging.getLogger("training_metrics_test")


def test_progress_info_counts_steps():
    metrics = TrainingMetrics(total_steps=4)
    metrics.set_phase("training")
    metrics.record_step(2.0, 0.0, 8)
    assert metrics.get_progress_info() == {
        "phase": "training", "progress": 25.0, "steps_completed": 1, "total_steps": 4
    }
    assert metrics.first_loss == 2.0
    assert metrics.examples_seen == 8


def test_progress_info_without_total():
    assert TrainingMetrics().get_progress_info()["progress"] == 0.0


@pytest.mark.parametrize("total_steps, expected_lines", [(20, 10), (5, 5), (1, 1)])
def test_log_progress_is_rate_limited(caplog, total_steps, expected_lines):
    metrics = TrainingMetrics(total_steps=total_steps)
    metrics.start_processing()
    with caplog.at_level(logging.DEBUG, logger="training_metrics_test"):
        for _ in range(total_steps):
            metrics.record_step(1.0, 0.0, 1)
            metrics.log_progress(logger)
    assert len(caplog.records) == expected_lines
    assert "100%" in caplog.records[-1].getMessage()

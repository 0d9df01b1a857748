"""
Prometheus metrics integration for sweep runs.
"""
import time
import logging
from typing import Dict, Any, Optional

from prometheus_client import Counter, Histogram, Gauge
from trigperturb.sweep.runner import SweepRunner, SweepOutcome, Task

SWEEP_TASK_TIME = Histogram(
    'trigperturb_task_duration_seconds',
    'Time taken by one (alpha, N, trial) task',
    ['command']
)

SWEEP_TASK_COUNT = Counter(
    'trigperturb_tasks_total',
    'Total number of sweep tasks',
    ['command', 'status']
)

SWEEP_BUSY_WORKERS = Gauge(
    'trigperturb_busy_workers',
    'Number of workers currently running a task',
    ['command']
)

SWEEP_QUEUED_TASKS = Gauge(
    'trigperturb_queued_tasks',
    'Number of tasks waiting in the work queue',
    ['command']
)


class MetricsCollector:
    """Records sweep task metrics under one command label."""

    def __init__(self, command: str = "lebesgue-sweep"):
        self.command = command

    def record_task_time(self, duration: float):
        SWEEP_TASK_TIME.labels(command=self.command).observe(duration)

    def increment_task_count(self, status: str = "success"):
        SWEEP_TASK_COUNT.labels(command=self.command, status=status).inc()

    def worker_started(self):
        SWEEP_BUSY_WORKERS.labels(command=self.command).inc()

    def worker_finished(self):
        SWEEP_BUSY_WORKERS.labels(command=self.command).dec()

    def set_queued(self, count: int):
        SWEEP_QUEUED_TASKS.labels(command=self.command).set(count)

    def export_metrics(self) -> Dict[str, Any]:
        """Export metrics in a dictionary format."""
        return {
            "command": self.command,
            "metrics": {
                "task_time_sum": SWEEP_TASK_TIME.labels(command=self.command)._sum.get(),
                "tasks": {
                    "success": SWEEP_TASK_COUNT.labels(command=self.command, status="success")._value.get(),
                    "error": SWEEP_TASK_COUNT.labels(command=self.command, status="error")._value.get(),
                },
                "busy_workers": SWEEP_BUSY_WORKERS.labels(command=self.command)._value.get(),
                "queued_tasks": SWEEP_QUEUED_TASKS.labels(command=self.command)._value.get(),
            }
        }


class PrometheusSweepRunnerMixin:
    """
    Mixin to add Prometheus metrics to SweepRunner.
    Put it before SweepRunner in the bases to enable metrics collection.
    """

    def __init__(self, cfg, *args, **kwargs):
        self.metrics_collector = MetricsCollector(cfg.command)
        super().__init__(cfg, *args, **kwargs)

    def run(self) -> SweepOutcome:
        self.metrics_collector.set_queued(len(self.tasks()))
        try:
            return super().run()
        finally:
            self.metrics_collector.set_queued(0)

    def _run_task(self, task: Task) -> dict:
        start = time.time()
        self.metrics_collector.worker_started()
        try:
            row = super()._run_task(task)
            self.metrics_collector.increment_task_count("success")
            return row
        except Exception:
            self.metrics_collector.increment_task_count("error")
            raise
        finally:
            self.metrics_collector.record_task_time(time.time() - start)
            self.metrics_collector.worker_finished()
            self.metrics_collector.set_queued(self._queue.qsize())


class PrometheusSweepRunner(PrometheusSweepRunnerMixin, SweepRunner):
    """SweepRunner with Prometheus metrics."""
    pass


def serve_metrics(port: Optional[int]) -> bool:
    """Expose the default registry on ``port``; returns whether a server was started."""
    if not port:
        return False
    from prometheus_client import start_http_server

    start_http_server(port)
    logging.info(f"Prometheus metrics server started at http://localhost:{port}")
    return True

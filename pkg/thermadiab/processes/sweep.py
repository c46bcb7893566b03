from multiprocessing import Queue
from queue import Empty
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

from thermadiab.events import LoggedEvent, SweepEvents, SweepQueues
from thermadiab.processes.logging import ConcurrenceLogger, LoggingProcess
from thermadiab.scenario import ScenarioConfig, SweepOutcome, execute_sweep_task
from thermadiab.utilities import drain_queue, n_workers

POLL_TIMEOUT_S = 0.01
SUMMARY_FILENAME = "sweep_summary.csv"
SUMMARY_COLUMNS = ["index", "value", "final_lhs", "final_rhs", "status"]


def scenario_dir(out_dir, index) -> Path:
    return Path(out_dir) / f"scenario_{index}"


class ScenarioWorker(LoggingProcess):
    """Runs sweep scenarios taken from the task queue until it receives
    a None sentinel or the stop event is set.

    Parameters
    ----------
    worker_index : int
    task_queue : Queue
        Items are (index, value, ScenarioConfig, output directory).
    result_queue : Queue
        Receives one SweepOutcome per task.
    stop_event : LoggedEvent
    conf : dict
        Configuration passed on to the scenario runs.

    """

    def __init__(
        self,
        worker_index: int,
        task_queue: Queue,
        result_queue: Queue,
        stop_event: LoggedEvent,
        conf: Optional[dict] = None,
        log_root=None,
        log_enabled=True,
        poll_timeout=POLL_TIMEOUT_S,
    ):
        super().__init__(
            name=f"worker_{worker_index}", log_root=log_root, log_enabled=log_enabled
        )
        self.task_queue = task_queue
        self.result_queue = result_queue
        self.stop_event = stop_event.new_reference(self.logger)
        self.conf = conf
        self.poll_timeout = poll_timeout

    def run(self):
        self.logger.log_message("started")
        while not self.stop_event.is_set():
            try:
                task = self.task_queue.get(timeout=self.poll_timeout)
            except Empty:
                continue
            self.logger.log_queue(SweepQueues.TASKS, False)
            if task is None:
                break
            index, value, config, out_dir = task
            self.logger.log_message(f"scenario {index} started")
            outcome = execute_sweep_task(index, value, config, out_dir, self.conf)
            self.logger.log_message(f"scenario {index} finished: {outcome.status}")
            self.result_queue.put(outcome)
            self.logger.log_queue(SweepQueues.RESULTS, True)
        self.logger.log_message("stopped")
        self.close_log()


def _summary_frame(outcomes: List[SweepOutcome]) -> pd.DataFrame:
    rows = [
        dict(
            index=o.index,
            value=o.value,
            final_lhs=o.final_lhs,
            final_rhs=o.final_rhs,
            status=o.status,
        )
        for o in sorted(outcomes, key=lambda o: o.index)
    ]
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def run_sweep(
    base: ScenarioConfig,
    axis: str,
    values: Sequence[float],
    out_dir,
    conf: Optional[dict] = None,
    workers: Optional[int] = None,
    log_enabled: bool = True,
) -> pd.DataFrame:
    """Run one scenario per value of ``axis`` concurrently.

    Every scenario writes into ``out_dir/scenario_<index>``; the summary,
    written by the orchestrator once every task is accounted for, lists
    the scenarios in input order whatever their completion order.
    """
    conf = conf or {}
    configs = [base.with_axis(axis, value) for value in values]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_root = conf.get("default_paths", {}).get("log")
    poll_timeout = conf.get("sweep", {}).get("poll_timeout", POLL_TIMEOUT_S)
    float_format = conf.get("output", {}).get("float_format", "%.17g")

    logger = ConcurrenceLogger(
        "sweep", root=log_root, enabled=log_enabled and log_root is not None
    )
    logger.log_message(f"sweep over {axis} with {len(configs)} values")
    n_processes = min(workers or n_workers(conf), len(configs))

    if n_processes <= 1:
        outcomes = [
            execute_sweep_task(i, float(v), c, scenario_dir(out_dir, i), conf)
            for i, (v, c) in enumerate(zip(values, configs))
        ]
    else:
        outcomes = _run_in_processes(
            configs,
            values,
            out_dir,
            conf,
            n_processes,
            logger,
            log_root,
            log_enabled,
            poll_timeout,
        )

    summary = _summary_frame(outcomes)
    summary.to_csv(out_dir / SUMMARY_FILENAME, index=False, float_format=float_format)
    logger.log_message("summary written")
    logger.close()
    return summary


def _run_in_processes(
    configs,
    values,
    out_dir,
    conf,
    n_processes,
    logger,
    log_root,
    log_enabled,
    poll_timeout,
):
    task_queue = Queue()
    result_queue = Queue()
    stop_event = LoggedEvent(logger, SweepEvents.STOP_WORKERS)
    workers = [
        ScenarioWorker(
            i,
            task_queue,
            result_queue,
            stop_event,
            conf,
            log_root=log_root,
            log_enabled=log_enabled and log_root is not None,
            poll_timeout=poll_timeout,
        )
        for i in range(n_processes)
    ]
    for worker in workers:
        worker.start()

    for i, (value, config) in enumerate(zip(values, configs)):
        task_queue.put((i, float(value), config, scenario_dir(out_dir, i)))
        logger.log_queue(SweepQueues.TASKS, True)
    for _ in workers:
        task_queue.put(None)

    outcomes = {}
    while len(outcomes) < len(configs):
        try:
            outcome = result_queue.get(timeout=poll_timeout)
        except Empty:
            if not any(worker.is_alive() for worker in workers):
                # workers that died without reporting leave their results missing
                for outcome in drain_queue(result_queue):
                    outcomes[outcome.index] = outcome
                break
            continue
        logger.log_queue(SweepQueues.RESULTS, False)
        outcomes[outcome.index] = outcome

    stop_event.set()
    for worker in workers:
        worker.join()

    for i, value in enumerate(values):
        if i not in outcomes:
            outcomes[i] = SweepOutcome(i, float(value), status="WorkerDied: no result")
    return list(outcomes.values())

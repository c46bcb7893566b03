from multiprocessing import Process
import time
from pathlib import Path
from typing import Optional, TextIO, Union
from enum import Enum

from thermadiab import config


class ConcurrenceLogger:
    """A utility class for logging events, queue traffic and messages
    of concurrently running processes, one text file per process.

    Lines have the form ``time_ns,TYPE,id,sender,value``.

    Parameters
    ----------
    process_name : str
        Name of the log file (without extension).
    root : Path, optional
        Directory of the log files. Defaults to the ``default_paths.log``
        configuration entry.
    enabled : bool
        If False nothing is ever written.

    """

    def __init__(
        self,
        process_name,
        root: Optional[Union[str, Path]] = None,
        enabled: bool = True,
    ):
        self.file: Optional[TextIO] = None
        self.process_name = process_name
        self.enabled = enabled
        if root is None and enabled:
            configuration = config.read_config()
            root = configuration["default_paths"]["log"]
        self.root = None if root is None else Path(root)

    @property
    def log_path(self):
        if self.root is None:
            return None
        return self.root / (self.process_name + ".txt")

    def _write_entry(self, event_type, event_id, is_sender, event_value):
        if not self.enabled:
            return
        if self.file is None:
            self.root.mkdir(parents=True, exist_ok=True)
            self.file = open(self.log_path, "w")
        self.file.write(
            f"{time.time_ns()},{event_type},{event_id},"
            f"{'1' if is_sender else '0'},{event_value}\n"
        )

    def log_message(self, message):
        """Logs any kind of message"""
        self._write_entry("LOG", message, False, 0)

    def log_event(self, event_name: Enum, is_sender: bool, event_value: bool):
        """Logs multiprocessing synchronization events (multiprocessing.Event)"""
        self._write_entry(
            "EVENT", event_name.name, is_sender, "1" if event_value else "0"
        )

    def log_queue(self, queue_name: Enum, is_sender: bool):
        """Logs queue traffic"""
        self._write_entry("QUEUE", queue_name.name, is_sender, "1")

    def close(self):
        if self.file is not None:
            self.file.flush()
            self.file.close()
            self.file = None


class LoggingProcess(Process):
    """A process with an integrated concurrence logger"""

    def __init__(self, *args, name, log_root=None, log_enabled=True, **kwargs):
        super().__init__(*args, **kwargs)
        self.logger = ConcurrenceLogger(name, root=log_root, enabled=log_enabled)

    def close_log(self):
        self.logger.close()

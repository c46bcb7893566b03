from enum import Enum, auto
from multiprocessing import Event
from typing import Optional


class AutoName(Enum):
    def _generate_next_value_(name, start, count, last_values):
        return name


class SweepEvents(AutoName):
    STOP_WORKERS = auto()


class SweepQueues(AutoName):
    TASKS = auto()
    RESULTS = auto()


class LoggedEvent:
    """A multiprocessing Event whose transitions end up in the
    concurrence log of whichever process holds the reference.
    """

    def __init__(self, logger, name: SweepEvents, event: Optional[Event] = None):
        self.event = Event() if event is None else event
        self.logger = logger
        self.name = name
        self.was_set = False

    def new_reference(self, logger):
        """Same underlying event, logged by another process."""
        return LoggedEvent(logger, self.name, self.event)

    def _log_transition(self, value, is_sender):
        if value != self.was_set:
            self.logger.log_event(self.name, is_sender, value)
        self.was_set = value

    def set(self):
        self.event.set()
        self._log_transition(True, is_sender=True)

    def clear(self):
        self.event.clear()
        self._log_transition(False, is_sender=True)

    def is_set(self):
        res = self.event.is_set()
        self._log_transition(res, is_sender=False)
        return res

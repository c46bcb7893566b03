import os
from queue import Empty
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path

import numpy as np


class ThermadiabError(Exception):
    """Root of every error raised by the package. The class name of the
    concrete error is the diagnostic tag printed by the command line.
    """

    pass


class AccuracyWarning(Warning):
    pass


THREADS_ENV_VAR = "THERMADIAB_THREADS"


def drain_queue(queue, timeout=0.0001):
    """Collect everything currently waiting in a multiprocessing queue."""
    items = []
    while True:
        try:
            items.append(queue.get(timeout=timeout, block=False))
        except Empty:
            break
    return items


def n_workers(conf=None):
    """Number of concurrent scenario workers.

    The ``THERMADIAB_THREADS`` environment variable wins over the
    ``sweep.threads`` configuration entry; 0 means one worker per CPU.
    """
    requested = os.environ.get(THREADS_ENV_VAR)
    if requested is None and conf is not None:
        requested = conf.get("sweep", {}).get("threads", 0)
    try:
        requested = int(requested or 0)
    except ValueError:
        requested = 0
    if requested <= 0:
        requested = os.cpu_count() or 1
    return requested


def clean_json(d):
    if isinstance(d, dict):
        cleaned = dict()
        for key, value in d.items():
            cleaned[str(key)] = clean_json(value)
        return cleaned
    elif isinstance(d, Enum):
        return d.name
    elif is_dataclass(d):
        return clean_json(asdict(d))
    elif isinstance(d, np.ndarray):
        return clean_json(d.tolist())
    elif isinstance(d, (np.floating, float)):
        return float(d)
    elif isinstance(d, (np.integer, np.bool_)):
        # json does not serialize numpy scalars:
        return d.item()
    elif isinstance(d, Path):
        return str(d)
    elif isinstance(d, complex):
        return [d.real, d.imag]
    elif type(d) in [tuple, list]:
        return [clean_json(v) for v in d]
    else:
        return d

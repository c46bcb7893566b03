import pytest
from pathlib import Path
import tempfile
import shutil

import numpy as np

from thermadiab import config


@pytest.fixture()
def temp_path():
    """Temporary path cleaned after the tests run."""
    path = Path(tempfile.mkdtemp())
    yield path
    shutil.rmtree(path)


@pytest.fixture(autouse=True)
def isolated_config(monkeypatch):
    """Every test reads and writes its own configuration, logs and results."""
    temp_dir = Path(tempfile.mkdtemp())
    template = {
        section: dict(values) for section, values in config.TEMPLATE_CONF_DICT.items()
    }
    template["default_paths"] = {
        "output": str(temp_dir / "results"),
        "log": str(temp_dir / "logs"),
    }
    conf_path = temp_dir / config.CONFIG_FILENAME
    config.write_default_config(conf_path, template=template)
    monkeypatch.setattr(config, "CONFIG_PATH", conf_path)
    monkeypatch.delenv("THERMADIAB_THREADS", raising=False)
    yield conf_path
    shutil.rmtree(temp_dir)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240917)


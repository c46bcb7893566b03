from pathlib import Path

import click
import toml
from lightparam import set_nested, get_nested

CONFIG_FILENAME = "thermadiab_config.toml"
CONFIG_DIR_PATH = Path.home() / ".thermadiab"
LOGS_DIR_PATH = CONFIG_DIR_PATH / "logs"
RESULTS_DIR_PATH = Path.home() / "thermadiab_results"

CONFIG_PATH = CONFIG_DIR_PATH / CONFIG_FILENAME

# sections -> entries; scenario files override the simulation section
TEMPLATE_CONF_DICT = {
    "simulation": {
        # relative to the spectral range of H at s = 0
        "degeneracy_threshold_rel": 1e-8,
        # 0 means differencing on the path grid
        "fd_step": 0.0,
        "bound_tolerance": 1e-8,
        "step_guard": 1.0,
        "step_warn": 0.5,
    },
    "sweep": {
        "threads": 0,
        "poll_timeout": 0.01,
    },
    "output": {
        "float_format": "%.17g",
        "dump_states": False,
    },
    "default_paths": {
        "output": str(RESULTS_DIR_PATH),
        "log": str(LOGS_DIR_PATH),
    },
}

_TRUE_STRINGS = ("1", "true", "yes", "on")


def _resolve(file_path):
    # CONFIG_PATH is looked up at call time so it can be redirected
    return CONFIG_PATH if file_path is None else Path(file_path)


def write_default_config(file_path=None, template=TEMPLATE_CONF_DICT):
    """Write the template configuration, creating the folder if needed.
    Called on first use, so nothing is written at import.
    """
    file_path = _resolve(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, "w") as f:
        toml.dump(template, f)


def read_config(file_path=None) -> dict:
    """Configuration dictionary of thermadiab.

    Parameters
    ----------
    file_path : Path, optional
        Defaults to ``~/.thermadiab/thermadiab_config.toml``, which is
        created from TEMPLATE_CONF_DICT if it does not exist yet.

    """
    file_path = _resolve(file_path)
    if not file_path.exists():
        write_default_config(file_path)
    return toml.load(file_path)


def write_config_value(dict_path, val, file_path=None):
    """Set one entry, e.g. ``write_config_value(["sweep", "threads"], 4)``."""
    file_path = _resolve(file_path)
    if isinstance(dict_path, str):
        dict_path = dict_path.split(".")

    conf = read_config(file_path=file_path)
    set_nested(conf, dict_path, val)
    with open(file_path, "w") as f:
        toml.dump(conf, f)


def cast_like(old_val, val):
    """Parse the command line string val into the type of old_val."""
    if isinstance(old_val, bool):
        return str(val).strip().lower() in _TRUE_STRINGS
    if old_val is None:
        return val
    return type(old_val)(val)


@click.command()
@click.argument("command", type=click.Choice(["show", "edit"]))
@click.option("-n", "--name", help="Entry as section.name")
@click.option("-v", "--val", help="New value of the entry")
@click.option(
    "-p",
    "--file_path",
    default=None,
    help="Path to the config file (optional)",
)
def cli_modify_config(command, name=None, val=None, file_path=None):
    """Show or edit the thermadiab configuration."""
    file_path = _resolve(file_path)
    if command == "edit":
        if name is None or val is None:
            raise click.UsageError("edit needs both --name and --val")
        cli_edit_config(name, val, file_path)
    elif name is not None:
        click.echo(get_nested(read_config(file_path), name.split(".")))
    else:
        click.echo(_print_config(file_path=file_path))


def cli_edit_config(name, val, file_path=None):
    dict_path = name.split(".")
    conf = read_config(file_path=file_path)
    try:
        old_val = get_nested(conf, dict_path)
    except (KeyError, TypeError):
        raise click.BadParameter(f"no configuration entry {name}")
    write_config_value(dict_path, cast_like(old_val, val), file_path)


def _print_config(file_path=None):
    return toml.dumps(read_config(file_path=file_path))

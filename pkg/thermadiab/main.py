from functools import wraps
import json
from pathlib import Path
import sys

import click
import numpy as np

from thermadiab import __version__
from thermadiab.config import read_config
from thermadiab.hamiltonian import lemma_discrepancy
from thermadiab.processes.logging import ConcurrenceLogger
from thermadiab.processes.sweep import run_sweep
from thermadiab.scenario import (
    ConfigParse,
    FileIO,
    SWEEP_AXES,
    load_scenario,
    load_wire_experiment,
    run_scenario,
    write_outputs,
)
from thermadiab.utilities import ThermadiabError, clean_json
from thermadiab.wire_model import fidelity_table, rates_table, scaling_experiment

LEMMA_TOLERANCE = 1e-12


class LemmaMismatch(ThermadiabError):
    pass


def report_errors(command):
    """Print package errors as a single tagged line and exit with code 1."""

    @wraps(command)
    def wrapped(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ThermadiabError as e:
            click.echo(f"{type(e).__name__}: {e}", err=True)
            sys.exit(1)

    return wrapped


def _output_dir(out, conf):
    return Path(out) if out is not None else Path(conf["default_paths"]["output"])


def _parse_values(text, axis):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigParse(f"--values: {e}") from e
    if not values:
        raise ConfigParse("--values needs at least one value")
    if axis == "n_steps":
        if any(v != int(v) for v in values):
            raise ConfigParse("n_steps values must be integers")
        values = [int(v) for v in values]
    return values


def _parse_dims(text):
    """'3-10' or '2,4,8'"""
    try:
        if "-" in text:
            low, high = (int(v) for v in text.split("-"))
            dims = list(range(low, high + 1))
        else:
            dims = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigParse(f"--dims: {e}") from e
    if not dims or min(dims) < 2:
        raise ConfigParse("--dims needs dimensions >= 2")
    return dims


def _write_csv(frame, path, conf):
    try:
        frame.to_csv(path, index=False, float_format=conf["output"]["float_format"])
    except OSError as e:
        raise FileIO(f"cannot write {path}: {e.strerror}") from e


@click.group()
@click.version_option(__version__)
def cli():
    """Numerical checks of finite-temperature adiabaticity."""
    pass


@cli.command()
@click.option("--config", "config_path", required=True, help="Scenario JSON file")
@click.option("--out", default=None, help="Output directory")
@click.option("--seed", default=None, type=int, help="Overrides the scenario seed")
@click.option("--dump-states", is_flag=True, help="Also save all states to hdf5")
@report_errors
def simulate(config_path, out, seed, dump_states):
    """Propagate one scenario and audit the adiabatic bound."""
    conf = read_config()
    logger = ConcurrenceLogger("simulate", root=conf["default_paths"]["log"])
    scenario = load_scenario(config_path, conf)
    if seed is not None:
        scenario.seed = seed
    out_dir = _output_dir(out if out is not None else scenario.output, conf)
    logger.log_message(f"scenario {config_path} loaded")
    try:
        result = run_scenario(scenario, conf)
        summary = write_outputs(scenario, result, out_dir, conf, dump=dump_states)
    finally:
        logger.close()
    click.echo(
        f"final distance {summary['final_lhs']:.6e}"
        f" <= bound {summary['final_rhs']:.6e}"
    )


@cli.command()
@click.option("--config", "config_path", required=True, help="Base scenario JSON file")
@click.option("--axis", required=True, type=click.Choice(SWEEP_AXES))
@click.option("--values", required=True, help="Comma separated values of the axis")
@click.option("--out", default=None, help="Output directory")
@click.option("--seed", default=None, type=int, help="Overrides the scenario seed")
@report_errors
def sweep(config_path, axis, values, out, seed):
    """Run the scenario for every value of one parameter."""
    conf = read_config()
    base = load_scenario(config_path, conf)
    if seed is not None:
        base.seed = seed
    values = _parse_values(values, axis)
    summary = run_sweep(base, axis, values, _output_dir(out, conf), conf)
    failed = int((summary["status"] != "ok").sum())
    click.echo(f"{len(summary)} scenarios, {failed} failed")


@cli.command()
@click.option(
    "--experiment",
    required=True,
    type=click.Choice(["fidelity", "rates", "scaling"]),
)
@click.option("--config", "config_path", default=None, help="Wire parameters JSON file")
@click.option("--out", default=None, help="Output directory")
@click.option("--seed", default=None, type=int, help="Seed of the momentum sampling")
@report_errors
def wire(experiment, config_path, out, seed):
    """Experiments on the spin driven around a wire."""
    conf = read_config()
    params = load_wire_experiment(config_path)
    if seed is not None:
        params.seed = seed
    out_dir = _output_dir(out, conf)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise FileIO(f"cannot create {out_dir}: {e.strerror}") from e

    if experiment == "fidelity":
        table = fidelity_table(params)
        _write_csv(table, out_dir / "fidelity.csv", conf)
        click.echo(f"max |analytic - simulated| = {table['abs_error'].max():.3e}")
    elif experiment == "rates":
        _write_csv(rates_table(params), out_dir / "rates.csv", conf)
    elif experiment == "scaling":
        result = scaling_experiment(
            params.N_list, params.p_F, params.epsilons[0], params.samples, params.seed
        )
        _write_csv(result.table, out_dir / "scaling.csv", conf)
        try:
            with open(out_dir / "scaling_fit.json", "w") as f:
                json.dump(clean_json(result.fit), f, indent=2)
        except OSError as e:
            raise FileIO(f"cannot write fit: {e.strerror}") from e
        click.echo(f"slope {result.slope:.4f} +- {result.stderr:.4f}")


def random_ordered_spectra(rng, dim, near_degenerate=False):
    """Strictly increasing energies at s, arbitrary ones at 0 and derivatives."""
    e0 = np.sort(rng.normal(size=dim))
    if near_degenerate:
        gaps = 10.0 ** rng.uniform(-9, 0, size=dim - 1)
        es = rng.normal() + np.concatenate([[0.0], np.cumsum(gaps)])
    else:
        es = np.sort(rng.normal(size=dim))
    des = rng.normal(size=dim)
    return e0, es, des


@cli.command("lemma-check")
@click.option("--trials", default=1000, type=click.IntRange(min=1))
@click.option("--dims", default="3-10", help="Range '3-10' or list '2,4,8'")
@click.option("--seed", default=0, type=int)
@click.option("--near-degenerate", is_flag=True, help="Draw gaps down to 1e-9")
@report_errors
def lemma_check(trials, dims, seed, near_degenerate):
    """Compare the all-pairs and adjacent-pair spectral functionals."""
    rng = np.random.default_rng(seed)
    dims = _parse_dims(dims)
    worst = 0.0
    for trial in range(trials):
        e0, es, des = random_ordered_spectra(
            rng, dims[trial % len(dims)], near_degenerate
        )
        if np.any(np.diff(es) <= 0):
            continue
        worst = max(worst, lemma_discrepancy(e0, es, des))
    click.echo(f"{trials} trials, max relative discrepancy {worst:.3e}")
    if worst > LEMMA_TOLERANCE:
        raise LemmaMismatch(f"discrepancy {worst:.3e} exceeds {LEMMA_TOLERANCE:g}")


if __name__ == "__main__":
    cli()

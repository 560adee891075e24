"""__main__.py
The neuralign command line: simulate, train, eval, gradcheck, export-tq and sweep.
"""
# Package Header #
from .header import *

# Header #
__author__ = __author__
__credits__ = __credits__
__maintainer__ = __maintainer__
__email__ = __email__


# Imports #
# Standard Libraries #
from collections.abc import Callable
import functools
import json
import logging
import pathlib
import sys
from typing import Any

# Third-Party Packages #
import click

# Local Packages #
from .exceptions import DivergenceError
from .model import Dims
from .losses import LossCoefficients, finite_diff_check, gradcheck_instance
from .numerics import RngState
from .simdata import SyntheticWorldSpec, simulate_dataset, save_dataset, save_session_hdf5, load_sessions
from .metrics import TQ_CONVENTION, tq, write_tq_csv
from .train import (
    EvalSplit,
    TrainConfig,
    apply_seed_override,
    load_checkpoint,
    save_checkpoint,
    rank_sweep,
    report_checkpoint,
    seed_override,
    train,
    write_history_csv,
    write_sweep_csv,
)


# Definitions #
logger = logging.getLogger(__name__)

EXIT_OK: int = 0
EXIT_CHECK_FAILED: int = 1
EXIT_USAGE: int = 2
EXIT_IO: int = 3
EXIT_DIVERGED: int = 4
GRADCHECK_THRESHOLD: float = 1e-5


# Functions #
def configure_logging(verbosity: int) -> None:
    """Sends the package's log records to standard error at a level set by the verbosity count."""
    package_logger = logging.getLogger(__package__ or __package_name__)
    for handler in list(package_logger.handlers):
        package_logger.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    package_logger.addHandler(handler)
    package_logger.setLevel(logging.WARNING - 10 * min(verbosity, 2))
    package_logger.propagate = False


def exit_codes(func: Callable[..., Any]) -> Callable[..., Any]:
    """Maps the package's exceptions onto the command line's exit codes."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except DivergenceError as error:
            logger.error("%s", error)
            sys.exit(EXIT_DIVERGED)
        except ValueError as error:
            logger.error("%s", error)
            sys.exit(EXIT_USAGE)
        except OSError as error:
            logger.error("%s", error)
            sys.exit(EXIT_IO)
        except ArithmeticError as error:
            logger.error("numerical failure: %s", error)
            sys.exit(EXIT_DIVERGED)

    return wrapper


def emit(payload: Any) -> None:
    """Writes a machine-readable payload to standard output."""
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


def load_train_config(path: pathlib.Path | None, epochs: int | None = None) -> TrainConfig:
    config = TrainConfig() if path is None else TrainConfig.from_json(path)
    if epochs is not None:
        config = config.replace(epochs=epochs)
    return apply_seed_override(config)


def parse_int_list(value: str, name: str) -> list[int]:
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}", param_hint=name) from None


# Main #
@click.group()
@click.version_option(__version__, prog_name=__package_name__)
@click.option("-v", "--verbose", count=True, help="Log INFO with -v and DEBUG with -vv to standard error.")
def main(verbose: int) -> None:
    """Aligns the fMRI signals of a novel subject to a known subject with a low-rank transfer matrix."""
    configure_logging(verbose)


@main.command("simulate")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=pathlib.Path))
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=pathlib.Path))
@click.option("--hdf5", "hdf5_path", type=click.Path(dir_okay=False, path_type=pathlib.Path), help="Also write a session file.")
@exit_codes
def cmd_simulate(config_path: pathlib.Path | None, out: pathlib.Path, hdf5_path: pathlib.Path | None) -> None:
    """Simulates a multi-subject world and writes its dataset."""
    spec = SyntheticWorldSpec() if config_path is None else SyntheticWorldSpec.from_json(config_path)
    spec = apply_seed_override(spec)
    dataset = simulate_dataset(spec)
    save_dataset(dataset, out)
    if hdf5_path is not None:
        save_session_hdf5(dataset, hdf5_path)

    emit(
        {
            "dataset": str(out),
            "hdf5": None if hdf5_path is None else str(hdf5_path),
            "seed": spec.seed,
            "conserved_voxels": spec.conserved_count,
            "subjects": {
                subject_id: {
                    "voxels": recording.train.voxels,
                    "train_samples": recording.train.samples,
                    "eval_samples": recording.eval.samples,
                }
                for subject_id, recording in dataset.recordings.items()
            },
        }
    )


@main.command("train")
@click.option("--data", required=True, type=click.Path(exists=True, path_type=pathlib.Path))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=pathlib.Path))
@click.option("--novel", required=True, help="The subject transferred from.")
@click.option("--known", required=True, help="The subject transferred to.")
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=pathlib.Path))
@click.option("--epochs", type=click.IntRange(min=0), help="Overrides the configured epoch count.")
@click.option("--history", "history_path", type=click.Path(dir_okay=False, path_type=pathlib.Path))
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=pathlib.Path))
@click.option("--resume", "resume_path", type=click.Path(exists=True, dir_okay=False, path_type=pathlib.Path))
@exit_codes
def cmd_train(
    data: pathlib.Path,
    config_path: pathlib.Path | None,
    novel: str,
    known: str,
    out: pathlib.Path,
    epochs: int | None,
    history_path: pathlib.Path | None,
    report_path: pathlib.Path | None,
    resume_path: pathlib.Path | None,
) -> None:
    """Trains a transfer from one subject to another and writes the checkpoint and history."""
    config = load_train_config(config_path, epochs)
    dataset = load_sessions(path=data)
    novel_train = dataset.recording(novel).train
    known_train = dataset.recording(known).train
    split = EvalSplit.from_dataset(dataset, novel, known, dataset.world())
    resume = None if resume_path is None else load_checkpoint(resume_path)
    history_path = history_path or out.with_name(out.name + ".history.csv")

    try:
        result = train(config, novel_train, known_train, split, resume=resume)
    except DivergenceError as error:
        if error.checkpoint is not None:
            save_checkpoint(out, error.checkpoint)
            write_history_csv(error.checkpoint.history, history_path)
        out.with_name(out.name + ".diverged").write_text(f"{error}\n", encoding="utf-8")
        raise

    save_checkpoint(out, result.checkpoint)
    write_history_csv(result.checkpoint.history, history_path)
    if report_path is not None:
        result.report.write(report_path)
    click.echo(result.report.to_json())


@main.command("eval")
@click.option("--data", required=True, type=click.Path(exists=True, path_type=pathlib.Path))
@click.option("--ckpt", required=True, type=click.Path(exists=True, dir_okay=False, path_type=pathlib.Path))
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=pathlib.Path))
@exit_codes
def cmd_eval(data: pathlib.Path, ckpt: pathlib.Path, report_path: pathlib.Path | None) -> None:
    """Evaluates a checkpoint on the shared stimuli using only its transfer matrix."""
    checkpoint = load_checkpoint(ckpt)
    dataset = load_sessions(path=data)
    report = report_checkpoint(checkpoint, dataset)
    if report_path is not None:
        report.write(report_path)
    click.echo(report.to_json())


@main.command("gradcheck")
@click.option("--seed", default=0, show_default=True, type=click.IntRange(min=0))
@click.option("--eps", default=1e-5, show_default=True, type=float)
@click.option("--dims", "dims_text", default="6,5,3,4", show_default=True, help="n,k,h,a")
@click.option("--batch", default=3, show_default=True, type=int)
@click.option("--coordinates", default=200, show_default=True, type=click.IntRange(min=1))
@exit_codes
def cmd_gradcheck(seed: int, eps: float, dims_text: str, batch: int, coordinates: int) -> None:
    """Checks the analytic gradients against central finite differences."""
    values = parse_int_list(dims_text, "--dims")
    if len(values) != 4:
        raise click.BadParameter(f"expected four integers n,k,h,a, got {dims_text!r}", param_hint="--dims")
    override = seed_override()
    seed = seed if override is None else override

    dims = Dims(*values)
    model, paired = gradcheck_instance(dims, batch_size=batch, seed=seed)
    check = finite_diff_check(model, paired, LossCoefficients(), eps=eps, coordinates=coordinates, rng=RngState(seed, 3))
    passed = check.passed(GRADCHECK_THRESHOLD)
    emit(check.to_dict() | {"threshold": GRADCHECK_THRESHOLD, "passed": passed, "seed": seed, "dims": dims.to_dict()})
    if not passed:
        logger.error("worst relative error %.3e exceeds %.0e", check.worst, GRADCHECK_THRESHOLD)
        sys.exit(EXIT_CHECK_FAILED)


@main.command("export-tq")
@click.option("--ckpt", required=True, type=click.Path(exists=True, dir_okay=False, path_type=pathlib.Path))
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=pathlib.Path))
@exit_codes
def cmd_export_tq(ckpt: pathlib.Path, out: pathlib.Path) -> None:
    """Writes the transfer quantity of every novel-subject voxel."""
    model = load_checkpoint(ckpt).inference_model
    values = tq(model.compose_btm())
    write_tq_csv(values, out)
    emit({"tq_csv": str(out), "voxels": int(values.size), "convention": TQ_CONVENTION})


@main.command("sweep")
@click.option("--data", required=True, type=click.Path(exists=True, path_type=pathlib.Path))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=pathlib.Path))
@click.option("--hidden", required=True, help="Comma-separated hidden sizes.")
@click.option("--novel", help="The subject transferred from, the dataset's first subject by default.")
@click.option("--known", help="The subject transferred to, the dataset's second subject by default.")
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=pathlib.Path))
@click.option("--epochs", type=click.IntRange(min=0), help="Overrides the configured epoch count.")
@exit_codes
def cmd_sweep(
    data: pathlib.Path,
    config_path: pathlib.Path | None,
    hidden: str,
    novel: str | None,
    known: str | None,
    out: pathlib.Path,
    epochs: int | None,
) -> None:
    """Trains one model per hidden size and tabulates the results."""
    hidden_sizes = parse_int_list(hidden, "--hidden")
    if not hidden_sizes:
        raise click.BadParameter("expected at least one hidden size", param_hint="--hidden")
    config = load_train_config(config_path, epochs)
    dataset = load_sessions(path=data)
    if len(dataset.subject_ids) < 2 and (novel is None or known is None):
        raise click.UsageError("the dataset has fewer than two subjects, name them with --novel and --known")
    novel = novel or dataset.subject_ids[0]
    known = known or dataset.subject_ids[1]

    rows = rank_sweep(config, hidden_sizes, dataset, novel, known)
    write_sweep_csv(rows, out)
    failed = [row.hidden_size for row in rows if not row.succeeded]
    emit({"sweep_csv": str(out), "rows": len(rows), "failed": failed})
    if len(failed) == len(rows):
        sys.exit(EXIT_CHECK_FAILED)


# Main #
if __name__ == "__main__":
    main()

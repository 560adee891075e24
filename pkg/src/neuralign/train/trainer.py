"""trainer.py
Trains an alignment model on paired sessions of two subjects and evaluates it on their shared stimuli.
"""
# Package Header #
from ..header import *

# Header #
__author__ = __author__
__credits__ = __credits__
__maintainer__ = __maintainer__
__email__ = __email__


# Imports #
# Standard Libraries #
import csv
from dataclasses import dataclass
import logging
import math
import pathlib
from typing import Any

# Third-Party Packages #
import numpy as np

# Local Packages #
from ..exceptions import ConfigError, DivergenceError, NonFiniteError
from ..numerics import Matrix, RngState, matmul
from ..model import AlignmentModel, Dims, fit_proxy_decoder, init_model, param_count
from ..losses import LossBreakdown, backward
from ..optim import AdamState, adam_step
from ..simdata import SubjectSession, SyntheticDataset, SyntheticWorld, oracle_transfer, pair_by_similarity, paired_batch
from ..metrics import MetricsReport, block_summary, fsc, retrieval_top1, tq, transfer_error
from .config import TrainConfig
from .checkpoint import Checkpoint


# Definitions #
logger = logging.getLogger(__name__)

HISTORY_COLUMNS: tuple[str, ...] = (
    "epoch",
    "l_total",
    "l_rec",
    "l_kl",
    "l_latent",
    "l_dec",
    "fsc_mean",
    "transfer_error",
)
IMAGE_RETRIEVAL_STREAM: int = 1 << 32
BRAIN_RETRIEVAL_STREAM: int = (1 << 32) + 1


# Classes #
@dataclass(frozen=True, eq=False)
class EvalSplit:
    """The shared-stimulus samples both subjects were recorded on.

    Attributes:
        novel_id: The subject transferred from.
        known_id: The subject transferred to.
        f_novel: The novel subject's signals, S × n.
        f_known: The known subject's signals, S × k.
        embeddings: The embeddings of the shared stimuli, S × a.
        m_star: The ground-truth transfer when the world is known.
        conserved_count: The number of conserved voxels when the world is known.
    """

    novel_id: str
    known_id: str
    f_novel: Matrix
    f_known: Matrix
    embeddings: Matrix
    m_star: Matrix | None = None
    conserved_count: int | None = None

    @property
    def samples(self) -> int:
        return self.f_novel.shape[0]

    @classmethod
    def from_dataset(
        cls,
        dataset: SyntheticDataset,
        novel_id: str,
        known_id: str,
        world: SyntheticWorld | None = None,
    ) -> "EvalSplit":
        """Builds the split from the evaluation sessions of two subjects.

        Args:
            dataset: The dataset holding both subjects.
            novel_id: The subject transferred from.
            known_id: The subject transferred to.
            world: The ground-truth world, which adds the oracle transfer and the block layout.

        Returns:
            The split.
        """
        novel = dataset.recording(novel_id).eval
        known = dataset.recording(known_id).eval
        if novel.samples == 0:
            raise ConfigError(f"subject {novel_id} has an empty evaluation session")
        if not np.array_equal(novel.stimulus_ids, known.stimulus_ids):
            raise ConfigError(f"the evaluation sessions of {novel_id} and {known_id} do not share their stimuli")
        m_star = None if world is None else oracle_transfer(world, novel_id, known_id)
        conserved = None if world is None else world.spec.conserved_count
        return cls(novel_id, known_id, novel.signals, known.signals, novel.embeddings, m_star, conserved)


@dataclass(frozen=True, eq=False)
class TrainResult:
    """The outcome of a training run.

    Attributes:
        checkpoint: The final state of the run.
        report: The evaluation of the inference model, None without an evaluation split.
    """

    checkpoint: Checkpoint
    report: MetricsReport | None

    @property
    def model(self) -> AlignmentModel:
        return self.checkpoint.inference_model

    @property
    def history(self) -> list[dict[str, Any]]:
        return self.checkpoint.history


# Functions #
def initial_model(config: TrainConfig, dims: Dims, known: SubjectSession) -> AlignmentModel:
    """Creates the untrained model of a run, with the frozen decoder fit to the known subject when configured.

    Args:
        config: The run configuration.
        dims: The model sizes.
        known: The known subject's training session.

    Returns:
        The untrained model.
    """
    model = init_model(dims, RngState(seed=config.seed_init, stream=0))
    if config.pretrain_decoder:
        model = fit_proxy_decoder(model, known.signals, known.embeddings, config.decoder_ridge)
    return model


def training_rows(config: TrainConfig, novel: SubjectSession) -> int:
    """The number of leading novel-subject rows the run trains on."""
    rows = int(math.floor(config.train_fraction * novel.samples))
    if rows < 2:
        raise ConfigError(f"train_fraction {config.train_fraction} leaves {rows} training samples, at least 2 needed")
    return rows


def epoch_batches(config: TrainConfig, samples: int, epoch: int) -> list[np.ndarray]:
    """The batches of one epoch, a permutation drawn from the data seed and the epoch number.

    A trailing batch smaller than 2 is dropped.

    Args:
        config: The run configuration.
        samples: The number of training pairs.
        epoch: The epoch number, starting at 1.

    Returns:
        The rows of each batch.
    """
    order = RngState(seed=config.seed_data, stream=epoch).permutation(samples)
    batches = [order[start : start + config.batch_size] for start in range(0, samples, config.batch_size)]
    return [batch for batch in batches if batch.size >= 2]


def quick_evaluation(model: AlignmentModel, split: EvalSplit) -> tuple[float, float]:
    """The fsc mean and relative transfer error of a model on a split."""
    pred = model.btm_apply(split.f_novel)
    correlation = fsc(pred, split.f_known)
    error = float(np.linalg.norm(pred - split.f_known)) / float(np.linalg.norm(split.f_known))
    return correlation.mean, error


def evaluate(
    model: AlignmentModel,
    split: EvalSplit,
    config: TrainConfig | None = None,
    init: AlignmentModel | None = None,
    loss_curve: list[dict[str, Any]] | None = None,
) -> MetricsReport:
    """Evaluates a model on shared stimuli using only the transfer matrix for inference.

    Retrieval decodes the transferred signals through the frozen decoder and matches them against the stimulus
    embeddings in both directions.

    Args:
        model: The model to evaluate.
        split: The shared-stimulus samples.
        config: The run configuration, which sets the retrieval protocol.
        init: The untrained model, evaluated as a baseline when given.
        loss_curve: The training history to attach to the report.

    Returns:
        The report.
    """
    config = config or TrainConfig()
    if split.samples < 2:
        raise ConfigError(f"evaluation needs at least 2 shared-stimulus samples, got {split.samples}")

    pred = model.btm_apply(split.f_novel)
    correlation = fsc(pred, split.f_known)
    m = model.compose_btm()
    tq_values = tq(m)
    errors = transfer_error(m, split.m_star, split.f_novel, split.f_known)

    decoded = model.proxy_decode(pred)
    candidates = min(config.retrieval_candidates, split.samples)
    top1_image = retrieval_top1(
        decoded, split.embeddings, candidates, config.retrieval_repeats, RngState(config.seed_data, IMAGE_RETRIEVAL_STREAM)
    )
    top1_brain = retrieval_top1(
        split.embeddings, decoded, candidates, config.retrieval_repeats, RngState(config.seed_data, BRAIN_RETRIEVAL_STREAM)
    )

    dims = model.dims
    identity = fsc(matmul(split.f_novel, np.eye(dims.n, dims.k)), split.f_known).mean
    init_fsc = None if init is None else fsc(init.btm_apply(split.f_novel), split.f_known).mean
    blocks = None if split.conserved_count is None else block_summary(tq_values, correlation, split.conserved_count)

    return MetricsReport(
        novel_id=split.novel_id,
        known_id=split.known_id,
        eval_samples=split.samples,
        fsc_mean=correlation.mean,
        fsc_per_voxel=[float(r) for r in correlation.per_voxel],
        fsc_excluded=correlation.excluded,
        tq=[float(value) for value in tq_values],
        block_summary=blocks,
        retrieval_top1_image=top1_image,
        retrieval_top1_brain=top1_brain,
        retrieval_candidates=candidates,
        retrieval_repeats=config.retrieval_repeats,
        transfer_relative_error=errors.error,
        oracle_relative_error=errors.oracle_error,
        baseline_identity_fsc=identity,
        baseline_init_fsc=init_fsc,
        param_count=param_count(dims).to_dict(),
        loss_curve=list(loss_curve or []),
    )


def _history_row(epoch: int, breakdowns: list[LossBreakdown]) -> dict[str, Any]:
    row: dict[str, Any] = {"epoch": epoch}
    for name in ("l_total", "l_rec", "l_kl", "l_latent", "l_dec"):
        row[name] = float(np.mean([getattr(b, name) for b in breakdowns]))
    row["fsc_mean"] = None
    row["transfer_error"] = None
    return row


def _evaluated(history: list[dict[str, Any]]) -> list[dict[str, Any]]:
    return [row for row in history if row.get("fsc_mean") is not None]


def _improves_best(
    fsc_mean: float,
    error: float,
    best_epoch: int | None,
    best_fsc: float | None,
    history: list[dict[str, Any]],
) -> bool:
    """Checks if an evaluation replaces the best model: a higher fsc, or an equal fsc with a lower transfer error."""
    if best_fsc is None or fsc_mean > best_fsc:
        return True
    if fsc_mean < best_fsc:
        return False
    best_errors = [row["transfer_error"] for row in _evaluated(history) if row["epoch"] == best_epoch]
    return bool(best_errors) and error < best_errors[0]


def _last_improvement(history: list[dict[str, Any]]) -> int:
    """The last evaluated epoch that raised the best fsc or lowered the best transfer error."""
    last, best_fsc, best_error = 0, -math.inf, math.inf
    for row in _evaluated(history):
        if row["fsc_mean"] > best_fsc or row["transfer_error"] < best_error:
            last = row["epoch"]
        best_fsc = max(best_fsc, row["fsc_mean"])
        best_error = min(best_error, row["transfer_error"])
    return last


def train(
    config: TrainConfig,
    novel: SubjectSession,
    known: SubjectSession,
    split: EvalSplit | None = None,
    resume: Checkpoint | None = None,
    stop_after: int | None = None,
) -> TrainResult:
    """Trains a model that transfers the novel subject's signals into the known subject's voxel space.

    Pairs are formed once by stimulus similarity; each epoch visits them in an order drawn from the data seed and
    the epoch number, so a resumed run continues exactly like an uninterrupted one.

    Args:
        config: The run configuration.
        novel: The novel subject's training session.
        known: The known subject's training session.
        split: The shared-stimulus samples evaluated every eval_interval epochs.
        resume: A checkpoint of the same run to continue from.
        stop_after: The last epoch to run before returning, the configured epochs when None.

    Returns:
        The final checkpoint and the report of its inference model.
    """
    novel = novel.head(training_rows(config, novel))
    pairing = pair_by_similarity(novel, known)
    dims = Dims(n=novel.voxels, k=known.voxels, h=config.hidden_size, a=novel.embeddings.shape[1])
    init = initial_model(config, dims, known)
    coeffs = config.coefficients

    if resume is not None:
        if resume.model.dims != dims:
            raise ConfigError(f"checkpoint dims {resume.model.dims} do not match the sessions {dims}")
        checkpoint = Checkpoint(
            model=resume.model,
            optimizer=resume.optimizer.copy(),
            config=config,
            epoch=resume.epoch,
            history=[dict(row) for row in resume.history],
            novel_id=novel.subject_id,
            known_id=known.subject_id,
            best_model=resume.best_model,
            best_epoch=resume.best_epoch,
            best_fsc=resume.best_fsc,
            initial_fsc=resume.initial_fsc,
            stopped_early=resume.stopped_early,
        )
    else:
        checkpoint = Checkpoint(
            model=init,
            optimizer=AdamState(
                dims=dims,
                learning_rates=config.learning_rates,
                beta1=config.beta1,
                beta2=config.beta2,
                eps=config.adam_eps,
            ),
            config=config,
            novel_id=novel.subject_id,
            known_id=known.subject_id,
            initial_fsc=None if split is None else quick_evaluation(init, split)[0],
        )

    last_epoch = config.epochs if stop_after is None else min(stop_after, config.epochs)
    model, state = checkpoint.model, checkpoint.optimizer
    epoch = checkpoint.epoch
    while epoch < last_epoch and not checkpoint.stopped_early:
        epoch += 1
        breakdowns = []
        try:
            for rows in epoch_batches(config, novel.samples, epoch):
                batch = paired_batch(novel, known, pairing, rows)
                breakdown, gradients = backward(model, batch, coeffs)
                if not breakdown.is_finite():
                    raise NonFiniteError(f"loss is not finite: {breakdown.to_dict()}")
                if not config.train_mapper_bias:
                    gradients = gradients.masked(("b_diff",))
                model, state = adam_step(model, gradients, state)
                breakdowns.append(breakdown)
        except NonFiniteError as error:
            raise DivergenceError(f"training diverged in epoch {epoch}: {error}", checkpoint, epoch) from error

        row = _history_row(epoch, breakdowns)
        best = (checkpoint.best_model, checkpoint.best_epoch, checkpoint.best_fsc)
        stopped = False
        if split is not None and epoch % config.eval_interval == 0:
            fsc_mean, error = quick_evaluation(model, split)
            row["fsc_mean"], row["transfer_error"] = fsc_mean, error
            logger.info("epoch %d: loss %.6g, eval fsc %.4f, transfer error %.4f", epoch, row["l_total"], fsc_mean, error)
            if _improves_best(fsc_mean, error, best[1], best[2], checkpoint.history):
                best = (model, epoch, fsc_mean)
            last = _last_improvement(checkpoint.history + [row])
            if config.patience and epoch - last >= config.patience:
                logger.warning("stopping at epoch %d, no improvement since epoch %d", epoch, last)
                stopped = True
        else:
            logger.debug("epoch %d: %s", epoch, row)

        checkpoint = Checkpoint(
            model=model,
            optimizer=state,
            config=config,
            epoch=epoch,
            history=checkpoint.history + [row],
            novel_id=novel.subject_id,
            known_id=known.subject_id,
            best_model=best[0],
            best_epoch=best[1],
            best_fsc=best[2],
            initial_fsc=checkpoint.initial_fsc,
            stopped_early=stopped,
        )

    report = None
    if split is not None:
        report = evaluate(checkpoint.inference_model, split, config, init, checkpoint.history)
    return TrainResult(checkpoint, report)


def report_checkpoint(checkpoint: Checkpoint, dataset: SyntheticDataset, world: SyntheticWorld | None = None) -> MetricsReport:
    """Evaluates the inference model of a checkpoint on the shared stimuli of its two subjects.

    Args:
        checkpoint: The checkpoint to evaluate.
        dataset: The dataset the checkpoint was trained on.
        world: The ground-truth world, regenerated from the dataset when None.

    Returns:
        The report, equal to the one training produced for the same checkpoint.
    """
    world = world or dataset.world()
    split = EvalSplit.from_dataset(dataset, checkpoint.novel_id, checkpoint.known_id, world)
    known = dataset.recording(checkpoint.known_id).train
    init = initial_model(checkpoint.config, checkpoint.model.dims, known)
    return evaluate(checkpoint.inference_model, split, checkpoint.config, init, checkpoint.history)


def write_history_csv(history: list[dict[str, Any]], path: pathlib.Path | str) -> pathlib.Path:
    """Writes one row per epoch, leaving evaluation columns blank for epochs without an evaluation.

    Args:
        history: The per-epoch rows of a checkpoint.
        path: The CSV file to write.

    Returns:
        The path written.
    """
    path = pathlib.Path(path)
    with path.open("w", newline="", encoding="utf-8") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(HISTORY_COLUMNS)
        for row in history:
            writer.writerow(
                [
                    "" if row.get(column) is None else (row[column] if column == "epoch" else repr(float(row[column])))
                    for column in HISTORY_COLUMNS
                ]
            )
    return path

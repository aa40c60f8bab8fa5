"""
The optimization loop and multi-seed training runs.

Only rho, P_v and (when configured) the FRG projection are handed to the
optimizer; the encoders stay frozen. Every random choice derives from
the run seed, so equal configs give equal metric logs and a resumed run
continues the uninterrupted trajectory.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import torch
from torch import nn
from torch.optim import SGD, Optimizer
from torch.optim.lr_scheduler import LambdaLR
from torch.utils.data import DataLoader
from tqdm import tqdm

from promptssl import __version__
from promptssl.common import OutputExistsError
from promptssl.config import (
    RunConfig,
    Settings,
    TrainConfig,
    config_hash,
    config_to_dict,
    dump_config_yaml,
)
from promptssl.dataio import (
    DatasetManifest,
    load_manifest,
    make_split,
    manifest_fingerprint,
)
from promptssl.dataio.common import ProtocolSplit
from promptssl.evaluation import (
    EvalResult,
    average_results,
    run_protocol,
    write_results,
)
from promptssl.losses import NonFiniteLossError
from promptssl.model import PromptSSLModel, build_model
from promptssl.trainer.checkpoint import load_checkpoint, save_checkpoint
from promptssl.trainer.common import (
    RUN_MANIFEST_FORMAT,
    RUN_MANIFEST_VERSION,
    Checkpoint,
    EpochMetrics,
    TrainingError,
)
from promptssl.trainer.episodes import Episode, TripletDataset, build_episode
from promptssl.utils.seeding import (
    derive_seed,
    module_checksum,
    set_deterministic,
)

logger = logging.getLogger(__name__)

RUN_MANIFEST_NAME = "run.json"
LAST_CHECKPOINT = "last.pt"
MIN_BATCH = 2


def build_optimizer(model: PromptSSLModel, config: TrainConfig) -> SGD:
    return SGD(model.trainable_parameters(), lr=config.lr,
               momentum=config.momentum, weight_decay=config.weight_decay)


def build_scheduler(optimizer: Optimizer, config: TrainConfig,
                    steps_per_epoch: int) -> LambdaLR:
    """Linear warmup over ``warmup_epochs``, then cosine decay to 0."""
    total = max(1, config.epochs * steps_per_epoch)
    warmup = min(total, config.warmup_epochs * steps_per_epoch)

    def factor(step: int) -> float:
        if step < warmup:
            return (step + 1) / warmup
        progress = (step - warmup) / max(1, total - warmup)
        return 0.5 * (1.0 + math.cos(math.pi * min(1.0, progress)))

    return LambdaLR(optimizer, factor)


def steps_per_epoch(samples: int, batch_size: int) -> int:
    """Batches per epoch; a trailing batch of one sample is dropped."""
    full, rest = divmod(samples, batch_size)
    return full + (1 if rest >= MIN_BATCH else 0)


def train_step(
    model: PromptSSLModel,
    batch: Sequence[torch.Tensor],
    class_tokens: Sequence[torch.Tensor],
    optimizer: Optimizer,
    scheduler: Optional[LambdaLR] = None,
    grad_clip: Optional[float] = None,
) -> tuple:
    """
    One SGD step on the trainable parameter groups.

    Args:
        model: The model, switched to train mode
        batch: (x, x1, x2, labels, ...) as served by TripletDataset
        class_tokens: Seen-class embeddings in label order
        optimizer: Optimizer over the trainable parameters
        scheduler: Stepped after the optimizer when given
        grad_clip: Global gradient-norm bound

    Returns:
        Tuple of the LossReport and the detached batch logits

    Raises:
        TrainingError: On a non-finite loss, with the per-term values
    """
    x, x1, x2, labels = (t.to(next(model.pv.parameters()).device)
                         for t in batch[:4])
    model.train()
    optimizer.zero_grad(set_to_none=True)
    try:
        report, logits = model.forward_losses(x, x1, x2, class_tokens,
                                              labels)
    except NonFiniteLossError as e:
        dump = ", ".join(f"{k}={v}" for k, v in e.terms.items())
        raise TrainingError(f"Aborting step, non-finite loss ({dump})") \
            from e
    report.total.backward()
    if grad_clip:
        nn.utils.clip_grad_norm_(model.trainable_parameters(), grad_clip)
    optimizer.step()
    if scheduler is not None:
        scheduler.step()
    logger.debug("step l_con=%.4f l_ce=%.4f l_sem=%.4f l_total=%.4f",
                 report.l_con, report.l_ce, report.l_sem, report.l_total)
    return report, logits


@dataclass
class FitResult:
    metrics: List[EpochMetrics] = field(default_factory=list)
    # l_total of every step taken by this call, in order
    step_losses: List[float] = field(default_factory=list)
    checkpoint: Optional[Checkpoint] = None
    checkpoint_paths: List[str] = field(default_factory=list)


def _make_checkpoint(model, optimizer, scheduler, config, seed, epoch,
                     class_names, metrics) -> Checkpoint:
    state = model.trainable_state()
    return Checkpoint(
        config=config_to_dict(config),
        config_hash=config_hash(config),
        seed=seed,
        epoch=epoch,
        class_names=list(class_names),
        rho=state["rho"],
        pv=state["pv"],
        frg=state["frg"],
        optimizer=optimizer.state_dict(),
        scheduler=scheduler.state_dict(),
        rng_state=torch.get_rng_state(),
        metrics=[m.to_dict() for m in metrics],
    )


def fit(
    model: PromptSSLModel,
    dataset: TripletDataset,
    config: RunConfig,
    seed: int,
    class_names: Sequence[str],
    checkpoint_dir: Optional[Path] = None,
    resume: Optional[Checkpoint] = None,
    stop_after: Optional[int] = None,
) -> FitResult:
    """
    Train one seed for ``config.train.epochs`` epochs.

    Args:
        model: Freshly built model
        dataset: Triplets of the episode
        config: Resolved run configuration
        seed: Run seed (shuffling and augmentation)
        class_names: Seen classes in label order
        checkpoint_dir: Where ``last.pt`` is written after every epoch
        resume: Checkpoint to continue from
        stop_after: Stop once this epoch has finished

    Returns:
        FitResult with per-epoch metrics and the last checkpoint
    """
    train = config.train
    steps = steps_per_epoch(len(dataset), train.batch_size)
    if steps == 0 and train.epochs > 0:
        raise TrainingError(
            f"Episode of {len(dataset)} samples yields no batch of at "
            f"least {MIN_BATCH}")
    optimizer = build_optimizer(model, train)
    scheduler = build_scheduler(optimizer, train, max(1, steps))
    class_tokens = model.class_tokens(class_names)

    metrics: List[EpochMetrics] = []
    start_epoch = 0
    if resume is not None:
        model.load_trainable_state(
            {"rho": resume.rho, "pv": resume.pv, "frg": resume.frg})
        optimizer.load_state_dict(resume.optimizer)
        scheduler.load_state_dict(resume.scheduler)
        if resume.rng_state is not None:
            torch.set_rng_state(resume.rng_state)
        metrics = [EpochMetrics(**m) for m in resume.metrics]
        start_epoch = resume.epoch
        logger.info("Resuming seed %d from epoch %d", seed, start_epoch)

    result = FitResult(metrics=metrics, checkpoint=resume)
    if resume is not None and checkpoint_dir is not None:
        result.checkpoint_paths.append(
            str(Path(checkpoint_dir) / LAST_CHECKPOINT))
    backbone_sum = module_checksum(model.vision) + module_checksum(
        model.text)

    def checkpoint_now(epoch: int) -> None:
        result.checkpoint = _make_checkpoint(
            model, optimizer, scheduler, config, seed, epoch, class_names,
            result.metrics)
        if checkpoint_dir is not None:
            path = save_checkpoint(result.checkpoint,
                                   Path(checkpoint_dir) / LAST_CHECKPOINT)
            if str(path) not in result.checkpoint_paths:
                result.checkpoint_paths.append(str(path))

    if resume is None:
        checkpoint_now(0)

    last_epoch = train.epochs if stop_after is None else min(
        train.epochs, stop_after)
    for epoch in range(start_epoch, last_epoch):
        dataset.set_epoch(epoch)
        generator = torch.Generator().manual_seed(
            derive_seed(seed, "shuffle", epoch) % (2**63))
        order = torch.randperm(len(dataset), generator=generator).tolist()
        loader = DataLoader(dataset, batch_size=train.batch_size,
                            sampler=order, num_workers=train.num_workers)
        totals = {"l_con": 0.0, "l_ce": 0.0, "l_sem": 0.0, "l_total": 0.0}
        correct = seen = done = 0
        progress = tqdm(loader, desc=f"seed {seed} epoch {epoch + 1}",
                        leave=False, disable=None)
        for batch in progress:
            if batch[0].shape[0] < MIN_BATCH:
                continue
            report, logits = train_step(model, batch, class_tokens,
                                        optimizer, scheduler,
                                        train.grad_clip)
            for key, value in report.as_dict().items():
                totals[key] += value
            labels = batch[3]
            correct += int((logits.argmax(-1).cpu() == labels).sum())
            seen += labels.numel()
            done += 1
            result.step_losses.append(report.l_total)
            progress.set_postfix(loss=f"{report.l_total:.3f}")

        entry = EpochMetrics(
            epoch=epoch + 1,
            steps=done,
            l_con=totals["l_con"] / max(1, done),
            l_ce=totals["l_ce"] / max(1, done),
            l_sem=totals["l_sem"] / max(1, done),
            l_total=totals["l_total"] / max(1, done),
            train_accuracy=100.0 * correct / max(1, seen),
            lr=optimizer.param_groups[0]["lr"],
        )
        result.metrics.append(entry)
        logger.info(
            "seed %d epoch %d/%d: l_total=%.4f (con %.4f, ce %.4f, sem "
            "%.4f) train acc %.2f", seed, entry.epoch, train.epochs,
            entry.l_total, entry.l_con, entry.l_ce, entry.l_sem,
            entry.train_accuracy)
        checkpoint_now(epoch + 1)

    if module_checksum(model.vision) + module_checksum(
            model.text) != backbone_sum:
        raise TrainingError("Frozen backbone weights changed in training.")
    return result


@dataclass
class RunResult:
    manifest_path: Path
    manifest: Dict[str, Any]
    results: List[EvalResult]


def run_seeds(config: RunConfig) -> List[int]:
    """Explicit ``train.seeds``, else ``train.runs`` derived seeds."""
    if config.train.seeds:
        return list(config.train.seeds)
    return [derive_seed(config.seed, "run", i) % (2**31)
            for i in range(config.train.runs)]


def load_datasets(config: RunConfig, settings: Optional[Settings] = None
                  ) -> Dict[str, DatasetManifest]:
    names = [config.data.source, *config.data.targets]
    return {name: load_manifest(name, settings) for name in names}


def build_split(config: RunConfig,
                manifests: Dict[str, DatasetManifest]) -> ProtocolSplit:
    ordered = [manifests[config.data.source]] + [
        manifests[t] for t in config.data.targets]
    return make_split(ordered, config.data.protocol,
                      derive_seed(config.seed, "split"),
                      config.data.class_mapping)


def _check_output(out_dir: Path, overwrite: bool, resume: bool) -> None:
    if (out_dir / RUN_MANIFEST_NAME).exists() and not (overwrite or resume):
        raise OutputExistsError(
            f"{out_dir} already holds a run; pass --overwrite to replace "
            "it or --resume to continue it")


def train_run(
    config: RunConfig,
    out_dir: Path,
    settings: Optional[Settings] = None,
    overwrite: bool = False,
    resume: bool = False,
    stop_after: Optional[int] = None,
) -> RunResult:
    """
    Train and evaluate every seed of a run.

    Writes ``config.yaml``, one ``seed_<n>/last.pt`` per seed, the
    ``results.json``/``results.csv`` pair and the ``run.json`` manifest.

    Args:
        config: Resolved configuration
        out_dir: Run directory
        settings: Environment settings
        overwrite: Replace an existing run
        resume: Continue each seed from its last checkpoint
        stop_after: Stop every seed after this epoch (partial run)

    Returns:
        RunResult with the manifest and the seed-averaged results
    """
    out_dir = Path(out_dir)
    _check_output(out_dir, overwrite, resume)
    out_dir.mkdir(parents=True, exist_ok=True)
    set_deterministic(config.train.deterministic)
    digest = config_hash(config)
    (out_dir / "config.yaml").write_text(dump_config_yaml(config))

    manifests = load_datasets(config, settings)
    split = build_split(config, manifests)
    source = manifests[config.data.source]
    class_ids = [source.class_index(n) for n in split.seen]
    seeds = run_seeds(config)
    logger.info("Run %s: %d seed(s), %d seen class(es), config %s",
                out_dir, len(seeds), len(class_ids), digest[:12])

    seed_entries = []
    per_seed_results: List[List[EvalResult]] = []
    for seed in seeds:
        seed_dir = out_dir / f"seed_{seed}"
        previous = None
        if resume and (seed_dir / LAST_CHECKPOINT).exists():
            previous = load_checkpoint(seed_dir / LAST_CHECKPOINT)
            if previous.config_hash != digest:
                raise TrainingError(
                    f"Checkpoint in {seed_dir} was written by a different "
                    "config")

        model = build_model(config, settings, seed=seed)
        episode: Episode = build_episode(
            source, class_ids, config.train.shots,
            derive_seed(seed, "episode"))
        dataset = TripletDataset(source, episode, model.image_size,
                                 config.augment, model.normalization, seed)
        fitted = fit(model, dataset, config, seed, split.seen,
                     checkpoint_dir=seed_dir, resume=previous,
                     stop_after=stop_after)
        results = run_protocol(split, model, manifests,
                               trained_classes=split.seen)
        per_seed_results.append(results)
        seed_entries.append({
            "seed": seed,
            "train_sample_ids": list(episode.sample_ids),
            "train_class_ids": sorted(set(
                source.samples[i].class_id for i in episode.sample_ids)),
            "epochs": [m.to_dict() for m in fitted.metrics],
            "checkpoints": fitted.checkpoint_paths,
            "results": [r.to_dict() for r in results],
        })

    mean_results = average_results(per_seed_results, seeds)
    write_results(out_dir, mean_results, digest,
                  extra={"split": split.to_dict()},
                  overwrite=overwrite or resume)
    manifest = {
        "format": RUN_MANIFEST_FORMAT,
        "version": RUN_MANIFEST_VERSION,
        "promptssl_version": __version__,
        "config": config_to_dict(config),
        "config_hash": digest,
        "seeds": seeds,
        "datasets": {name: manifest_fingerprint(m)
                     for name, m in manifests.items()},
        "split": split.to_dict(),
        "runs": seed_entries,
        "mean": [r.to_dict() for r in mean_results],
    }
    manifest_path = out_dir / RUN_MANIFEST_NAME
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    logger.info("Wrote run manifest %s", manifest_path)
    return RunResult(manifest_path, manifest, mean_results)

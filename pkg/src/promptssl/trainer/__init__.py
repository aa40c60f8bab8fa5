# Few-shot training: episodes, optimization loop and checkpoints
from promptssl.trainer.checkpoint import (
    load_checkpoint,
    load_model_from_checkpoint,
    save_checkpoint,
)
from promptssl.trainer.common import (
    Checkpoint,
    CheckpointError,
    EpochMetrics,
    TrainingError,
)
from promptssl.trainer.episodes import Episode, TripletDataset, build_episode
from promptssl.trainer.loop import (
    FitResult,
    RunResult,
    build_optimizer,
    build_scheduler,
    build_split,
    fit,
    load_datasets,
    run_seeds,
    steps_per_epoch,
    train_run,
    train_step,
)

__all__ = [
    "Checkpoint",
    "CheckpointError",
    "Episode",
    "EpochMetrics",
    "FitResult",
    "RunResult",
    "TrainingError",
    "TripletDataset",
    "build_episode",
    "build_optimizer",
    "build_scheduler",
    "build_split",
    "fit",
    "load_checkpoint",
    "load_datasets",
    "load_model_from_checkpoint",
    "run_seeds",
    "save_checkpoint",
    "steps_per_epoch",
    "train_run",
    "train_step",
]

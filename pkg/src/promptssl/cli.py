"""
Command line for promptssl.

Subcommands train, evaluate, run ablation grids, export embeddings,
validate configs, import datasets and serve the run-inspection MCP
server. Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from promptssl import __version__
from promptssl.common import ConfigError, OutputExistsError, PromptSSLError
from promptssl.config import (
    RunConfig,
    config_hash,
    get_settings,
    load_config,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _add_config_args(parser: argparse.ArgumentParser,
                     required: bool = False) -> None:
    parser.add_argument("--config", type=Path, required=required,
                        help="YAML run configuration")
    parser.add_argument("--set", dest="overrides", action="append",
                        default=[], metavar="KEY=VALUE",
                        help="Override a config key by dotted path")


def _default_run_dir(config: RunConfig) -> Path:
    return get_settings().runs_root / f"run-{config_hash(config)[:12]}"


def cmd_train(args: argparse.Namespace) -> int:
    from promptssl.evaluation import format_results_table
    from promptssl.trainer import train_run

    config = load_config(args.config, args.overrides)
    out_dir = args.out or _default_run_dir(config)
    run = train_run(config, out_dir, get_settings(),
                    overwrite=args.overwrite, resume=args.resume)
    for entry in run.manifest["runs"]:
        if entry["epochs"]:
            last = entry["epochs"][-1]
            print(f"seed {entry['seed']}: epoch {last['epoch']} "
                  f"l_total={last['l_total']:.4f} "
                  f"(l_con={last['l_con']:.4f}, l_ce={last['l_ce']:.4f}, "
                  f"l_sem={last['l_sem']:.4f})")
        for path in entry["checkpoints"]:
            print(f"checkpoint: {path}")
    print(format_results_table(run.results))
    print(f"manifest: {run.manifest_path}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    from promptssl.backbone import build_backbones
    from promptssl.evaluation import (
        ZeroShotScorer,
        format_results_table,
        run_protocol,
        write_results,
    )
    from promptssl.trainer import (
        build_split,
        load_datasets,
        load_model_from_checkpoint,
    )

    settings = get_settings()
    if args.zero_shot:
        config = load_config(args.config, args.overrides)
        vision, text = build_backbones(config.backbone, settings)
        scorer = ZeroShotScorer(vision, text,
                                template=config.rho.template,
                                temperature=config.loss.temperature)
        trained, digest = None, config_hash(config)
        out_dir = args.out or _default_run_dir(config) / "zero_shot"
    else:
        if args.checkpoint is None:
            raise ConfigError("eval needs --checkpoint or --zero-shot")
        scorer, checkpoint = load_model_from_checkpoint(
            args.checkpoint, settings)
        if args.config is None and not args.overrides:
            config = RunConfig.model_validate(checkpoint.config)
        else:
            config = load_config(args.config, args.overrides)
        digest = checkpoint.config_hash
        if config_hash(config) != digest:
            logger.warning(
                "Evaluation config hash %s differs from checkpoint hash %s",
                config_hash(config)[:12], digest[:12])
            if not args.accept_config_mismatch:
                raise ConfigError(
                    "Config does not match the checkpoint; pass "
                    "--accept-config-mismatch to evaluate anyway")
        trained = checkpoint.class_names
        out_dir = args.out or Path(args.checkpoint).parent / "eval"

    manifests = load_datasets(config, settings)
    split = build_split(config, manifests)
    results = run_protocol(split, scorer, manifests,
                           trained_classes=trained)
    json_path, csv_path = write_results(
        out_dir, results, digest,
        extra={"eval_config_hash": config_hash(config),
               "split": split.to_dict()},
        overwrite=args.overwrite)
    print(format_results_table(results))
    print(f"results: {json_path} {csv_path}")
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    from promptssl.ablation import load_grid, run_ablation

    grid = load_grid(args.grid)
    out_dir = args.out or (
        get_settings().runs_root / f"ablate-{Path(args.grid).stem}")
    table = run_ablation(args.config, args.overrides, grid, out_dir,
                         get_settings(), overwrite=args.overwrite)
    print(table.read_text())
    print(f"results directory: {out_dir}")
    return EXIT_OK


def cmd_export_embeddings(args: argparse.Namespace) -> int:
    from promptssl.dataio import load_manifest
    from promptssl.evaluation.export import export_embeddings
    from promptssl.trainer import load_model_from_checkpoint

    settings = get_settings()
    model, checkpoint = load_model_from_checkpoint(args.checkpoint,
                                                   settings)
    dataset = args.dataset or checkpoint.config["data"]["source"]
    manifest = load_manifest(dataset, settings)
    path = export_embeddings(model, manifest, args.out, split=args.split,
                             overwrite=args.overwrite)
    print(f"embeddings: {path}")
    return EXIT_OK


def cmd_validate_config(args: argparse.Namespace) -> int:
    config = load_config(args.config, args.overrides)
    print(f"Configuration is valid. Hash: {config_hash(config)}")
    return EXIT_OK


def cmd_import_dataset(args: argparse.Namespace) -> int:
    from promptssl.dataio import import_folder, save_manifest

    manifest = import_folder(args.root, name=args.name)
    out = args.out or Path(args.root) / "manifest.json"
    if out.exists() and not args.overwrite:
        raise OutputExistsError(
            f"{out} exists; pass --overwrite to replace it")
    save_manifest(manifest, out)
    print(f"{manifest.name}: {manifest.num_classes} classes, "
          f"{len(manifest.samples)} images -> {out}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from promptssl.server import serve

    serve(args.transport, args.runs_root)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="promptssl",
        description="Self-supervised prompt learning on frozen "
                    "vision-language encoders")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="Train a run")
    _add_config_args(train)
    train.add_argument("--out", type=Path)
    train.add_argument("--overwrite", action="store_true")
    train.add_argument("--resume", action="store_true",
                       help="Continue every seed from its last checkpoint")
    train.set_defaults(handler=cmd_train)

    evaluate = commands.add_parser("eval", help="Evaluate a checkpoint")
    evaluate.add_argument("--checkpoint", type=Path)
    _add_config_args(evaluate)
    evaluate.add_argument("--zero-shot", action="store_true",
                          help="Score the hand-written prompt baseline")
    evaluate.add_argument("--accept-config-mismatch", action="store_true")
    evaluate.add_argument("--out", type=Path)
    evaluate.add_argument("--overwrite", action="store_true")
    evaluate.set_defaults(handler=cmd_eval)

    ablate = commands.add_parser("ablate", help="Run an ablation grid")
    _add_config_args(ablate)
    ablate.add_argument("--grid", required=True,
                        help="Preset (loss_table, context_lengths, shots, "
                             "init) or grid YAML file")
    ablate.add_argument("--out", type=Path)
    ablate.add_argument("--overwrite", action="store_true")
    ablate.set_defaults(handler=cmd_ablate)

    export = commands.add_parser("export-embeddings",
                                 help="Export joint-space embeddings")
    export.add_argument("--checkpoint", type=Path, required=True)
    export.add_argument("--dataset")
    export.add_argument("--split")
    export.add_argument("--out", type=Path, required=True)
    export.add_argument("--overwrite", action="store_true")
    export.set_defaults(handler=cmd_export_embeddings)

    validate = commands.add_parser("validate-config",
                                   help="Resolve and hash a config")
    _add_config_args(validate)
    validate.set_defaults(handler=cmd_validate_config)

    importer = commands.add_parser(
        "import-dataset", help="Write a manifest for a class-folder tree")
    importer.add_argument("root", type=Path)
    importer.add_argument("--name")
    importer.add_argument("--out", type=Path)
    importer.add_argument("--overwrite", action="store_true")
    importer.set_defaults(handler=cmd_import_dataset)

    server = commands.add_parser("serve",
                                 help="Serve the run-inspection MCP server")
    server.add_argument("--transport", default="stdio",
                        choices=["stdio", "sse", "streamable-http"])
    server.add_argument("--runs-root", type=Path)
    server.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point for the command-line script."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format=LOG_FORMAT, force=True)
    try:
        return args.handler(args)
    except ConfigError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except PromptSSLError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

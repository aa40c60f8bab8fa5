"""
Loading, importing and fingerprinting dataset manifests.
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import ValidationError

from promptssl.config import Settings, get_settings
from promptssl.dataio.common import DatasetError, DatasetManifest
from promptssl.dataio.images import synthetic_path

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".tif", ".tiff", ".webp"}

TOY_SAMPLES_PER_CLASS = 64
TOY_TEST_PER_CLASS = 16

_BUILTIN_CLASSES: Dict[str, List[str]] = {
    "toy2": ["red_stripes", "blue_bars"],
    "toy4": ["red_stripes", "blue_bars", "green_checks", "yellow_waves"],
}
_BUILTIN_DOMAINS = {"toy2": "base", "toy4": "base", "toy4_shifted": "shifted"}


def builtin_names() -> List[str]:
    return sorted(_BUILTIN_DOMAINS)


def _builtin_manifest(name: str) -> DatasetManifest:
    classes = _BUILTIN_CLASSES.get(name, _BUILTIN_CLASSES["toy4"])
    domain = _BUILTIN_DOMAINS[name]
    samples = []
    train: List[int] = []
    test: List[int] = []
    for class_id in range(len(classes)):
        for index in range(TOY_SAMPLES_PER_CLASS):
            position = len(samples)
            samples.append({
                "path": synthetic_path(name, class_id, index, domain),
                "class": class_id,
                "domain": domain,
            })
            if index < TOY_SAMPLES_PER_CLASS - TOY_TEST_PER_CLASS:
                train.append(position)
            else:
                test.append(position)
    return DatasetManifest.model_validate({
        "name": name,
        "classes": classes,
        "samples": samples,
        "splits": {"train": train, "test": test},
    })


def _format_validation_error(source: str, error: ValidationError) -> str:
    lines = [f"Invalid dataset manifest {source}:"]
    for item in error.errors():
        dotted = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"  {dotted}: {item['msg']}")
    return "\n".join(lines)


def parse_manifest(data: dict, source: str = "<memory>") -> DatasetManifest:
    """
    Validate a manifest mapping.

    Raises:
        DatasetError: Listing every schema violation by path
    """
    try:
        return DatasetManifest.model_validate(data)
    except ValidationError as e:
        raise DatasetError(_format_validation_error(source, e)) from e


def _read_manifest_file(path: Path) -> DatasetManifest:
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise DatasetError(f"Cannot read manifest {path}: {e}") from e
    manifest = parse_manifest(data, str(path))
    # Relative sample paths are relative to the manifest file.
    root = path.parent
    samples = []
    for sample in manifest.samples:
        sample_path = Path(sample.path)
        if not sample.path.startswith("toy://") and \
                not sample_path.is_absolute():
            sample = sample.model_copy(
                update={"path": str(root / sample_path)})
        samples.append(sample)
    return manifest.model_copy(update={"samples": samples})


def import_folder(root: Path, name: Optional[str] = None,
                  test_every: int = 5) -> DatasetManifest:
    """
    Build a manifest from a folder-per-class layout.

    If ``root`` has ``train/`` and ``test/`` sub-directories they define
    the splits; otherwise every ``test_every``-th image of each class
    (in sorted order) goes to ``test`` and the rest to ``train``.

    Raises:
        DatasetError: If no class directories or images are found
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"Dataset directory {root} does not exist")
    split_dirs = {"train": root / "train", "test": root / "test"}
    explicit = all(d.is_dir() for d in split_dirs.values())
    class_root = split_dirs["train"] if explicit else root
    classes = sorted(p.name for p in class_root.iterdir() if p.is_dir())
    if not classes:
        raise DatasetError(f"No class directories under {class_root}")

    samples = []
    splits: Dict[str, List[int]] = {"train": [], "test": []}

    def add(directory: Path, class_id: int, split: Optional[str]) -> None:
        files = sorted(p for p in directory.iterdir()
                       if p.suffix.lower() in IMAGE_SUFFIXES)
        for position, file in enumerate(files):
            target = split or (
                "test" if position % test_every == test_every - 1
                else "train")
            splits[target].append(len(samples))
            samples.append({"path": str(file), "class": class_id})

    for class_id, class_name in enumerate(classes):
        if explicit:
            for split, directory in split_dirs.items():
                if (directory / class_name).is_dir():
                    add(directory / class_name, class_id, split)
        else:
            add(root / class_name, class_id, None)
    if not samples:
        raise DatasetError(f"No images found under {root}")

    manifest = parse_manifest({
        "name": name or root.name,
        "classes": classes,
        "samples": samples,
        "splits": splits,
    }, str(root))
    logger.info("Imported %s: %d classes, %d images", manifest.name,
                manifest.num_classes, len(manifest.samples))
    return manifest


def load_manifest(source: str,
                  settings: Optional[Settings] = None) -> DatasetManifest:
    """
    Load a dataset manifest.

    Args:
        source: A builtin name (``toy2``, ``toy4``, ``toy4_shifted``), a
            manifest JSON file, a folder-per-class directory, or a name
            resolved under the data root
        settings: Environment settings supplying the data root

    Returns:
        Validated DatasetManifest; images are not decoded

    Raises:
        DatasetError: If the source cannot be found or does not validate
    """
    if source in _BUILTIN_DOMAINS:
        return _builtin_manifest(source)
    settings = settings or get_settings()
    candidates = [Path(source), settings.data_root / source,
                  settings.data_root / f"{source}.json"]
    for candidate in candidates:
        if candidate.is_file():
            return _read_manifest_file(candidate)
        if candidate.is_dir():
            manifest_file = candidate / "manifest.json"
            if manifest_file.is_file():
                return _read_manifest_file(manifest_file)
            return import_folder(candidate)
    builtins = ", ".join(builtin_names())
    raise DatasetError(
        f"Dataset '{source}' is neither a builtin ({builtins}) nor a "
        "manifest or directory")


def save_manifest(manifest: DatasetManifest, path: Path) -> Path:
    """Write a manifest as JSON using the ``class`` field alias."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.model_dump_json(by_alias=True, indent=2))
    return path


def manifest_fingerprint(manifest: DatasetManifest) -> str:
    """SHA-256 over the canonical JSON form of a manifest."""
    payload = json.dumps(manifest.model_dump(mode="json", by_alias=True),
                         sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()

# Dataset manifests, images and protocol splits
from promptssl.dataio.common import (
    DatasetError,
    DatasetManifest,
    ProtocolKind,
    ProtocolSplit,
    SampleRecord,
)
from promptssl.dataio.images import load_image, synthesize_image
from promptssl.dataio.manifest import (
    builtin_names,
    import_folder,
    load_manifest,
    manifest_fingerprint,
    parse_manifest,
    save_manifest,
)
from promptssl.dataio.splits import make_split

__all__ = [
    "DatasetError",
    "DatasetManifest",
    "ProtocolKind",
    "ProtocolSplit",
    "SampleRecord",
    "builtin_names",
    "import_folder",
    "load_image",
    "load_manifest",
    "make_split",
    "manifest_fingerprint",
    "parse_manifest",
    "save_manifest",
    "synthesize_image",
]

"""Object sprites, preprocessing, and materialized speckle datasets."""

from .objects import CLASS_TAGS, ObjectImage, generate_objects, import_objects
from .preprocess import bin2x2, preprocess
from .dataset import (
    DatasetManifest,
    DiffuserInfo,
    RecordMeta,
    SpeckleRecord,
    build_dataset,
    validate_manifest,
)

__all__ = [
    "ObjectImage",
    "CLASS_TAGS",
    "generate_objects",
    "import_objects",
    "bin2x2",
    "preprocess",
    "DatasetManifest",
    "DiffuserInfo",
    "RecordMeta",
    "SpeckleRecord",
    "build_dataset",
    "validate_manifest",
]

"""Materialized speckle datasets: the training split and four test groups.

Split semantics:
    train   -- training objects through every training diffuser
    group1  -- the same training objects through every testing diffuser
    group2  -- fresh same-class objects through one testing diffuser
    group3  -- doodle objects through every testing diffuser
    group4  -- fresh same-class objects through the first training diffuser

Tensors are stored one SPKT file per record (raw, pre-binning); a JSON
manifest carries configuration, diffuser provenance, and record metadata.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, InvalidInputError
from ..formats import read_spkt, write_spkt
from ..optics.config import SystemConfig
from ..optics.diffuser import generate_diffuser
from ..optics.imaging import embed_object, simulate_speckle
from .objects import ObjectImage, generate_objects

SPLITS = ("train", "group1", "group2", "group3", "group4")


@dataclass
class DiffuserInfo:
    id: str
    seed: int
    role: str  # "train" | "test"


@dataclass
class RecordMeta:
    record_id: int
    object_id: int
    class_tag: str
    diffuser_id: str
    split: str
    speckle_path: str
    object_path: str


@dataclass
class SpeckleRecord:
    """A loaded record: raw object and speckle patches plus provenance."""

    object: np.ndarray
    speckle: np.ndarray
    object_id: int
    class_tag: str
    diffuser_id: str
    split: str


class DatasetManifest:
    """Provenance and access layer for a materialized dataset."""

    def __init__(
        self,
        config: dict,
        diffusers: list[DiffuserInfo],
        records: list[RecordMeta],
        preprocessing: dict,
        seeds: dict,
        root: Path,
    ) -> None:
        self.config = config
        self.diffusers = diffusers
        self.records = records
        self.preprocessing = preprocessing
        self.seeds = seeds
        self.root = Path(root)

    # -- access -----------------------------------------------------------
    def split(self, name: str) -> list[RecordMeta]:
        if name not in SPLITS:
            raise InvalidInputError(f"unknown split {name!r}; choose from {SPLITS}")
        return [r for r in self.records if r.split == name]

    def split_sizes(self) -> dict:
        sizes = {s: 0 for s in SPLITS}
        for r in self.records:
            sizes[r.split] += 1
        return sizes

    def diffuser_ids(self, role: str) -> list[str]:
        return [d.id for d in self.diffusers if d.role == role]

    def system_config(self) -> SystemConfig:
        return SystemConfig.from_dict(self.config)

    def load_speckle(self, rec: RecordMeta) -> np.ndarray:
        return read_spkt(self.root / rec.speckle_path)

    def load_object(self, rec: RecordMeta) -> np.ndarray:
        return read_spkt(self.root / rec.object_path)

    def load_record(self, rec: RecordMeta) -> SpeckleRecord:
        return SpeckleRecord(
            object=self.load_object(rec),
            speckle=self.load_speckle(rec),
            object_id=rec.object_id,
            class_tag=rec.class_tag,
            diffuser_id=rec.diffuser_id,
            split=rec.split,
        )

    # -- persistence --------------------------------------------------------
    def manifest_path(self) -> Path:
        return self.root / "manifest.json"

    def save(self) -> Path:
        doc = {
            "config": self.config,
            "diffusers": [{"id": d.id, "seed": d.seed, "role": d.role} for d in self.diffusers],
            "records": [
                {
                    "record_id": r.record_id,
                    "object_id": r.object_id,
                    "class": r.class_tag,
                    "diffuser_id": r.diffuser_id,
                    "split": r.split,
                    "speckle_path": r.speckle_path,
                    "object_path": r.object_path,
                }
                for r in self.records
            ],
            "preprocessing": self.preprocessing,
            "seeds": self.seeds,
        }
        path = self.manifest_path()
        path.write_text(json.dumps(doc, indent=1, sort_keys=True))
        return path

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        path = Path(path)
        doc = json.loads(path.read_text())
        return cls(
            config=doc["config"],
            diffusers=[DiffuserInfo(d["id"], int(d["seed"]), d["role"]) for d in doc["diffusers"]],
            records=[
                RecordMeta(
                    record_id=int(r["record_id"]),
                    object_id=int(r["object_id"]),
                    class_tag=r["class"],
                    diffuser_id=r["diffuser_id"],
                    split=r["split"],
                    speckle_path=r["speckle_path"],
                    object_path=r["object_path"],
                )
                for r in doc["records"]
            ],
            preprocessing=doc.get("preprocessing", {}),
            seeds=doc.get("seeds", {}),
            root=path.parent,
        )


def validate_manifest(manifest: DatasetManifest) -> None:
    """Enforce the leakage invariants; raises ConfigurationError on violation."""
    train_seeds = {d.seed for d in manifest.diffusers if d.role == "train"}
    test_seeds = {d.seed for d in manifest.diffusers if d.role == "test"}
    if train_seeds & test_seeds:
        raise ConfigurationError(f"train/test diffuser seeds overlap: {train_seeds & test_seeds}")
    train_diffusers = set(manifest.diffuser_ids("train"))
    train_objects = {r.object_id for r in manifest.records if r.split == "train"}
    for r in manifest.records:
        if r.split == "train" and r.diffuser_id not in train_diffusers:
            raise ConfigurationError(f"training record {r.record_id} uses a test diffuser")
        if r.split in ("group1", "group2", "group3") and r.diffuser_id in train_diffusers:
            raise ConfigurationError(f"{r.split} record {r.record_id} uses a training diffuser")
        if r.split in ("group2", "group3") and r.object_id in train_objects:
            raise ConfigurationError(f"{r.split} record {r.record_id} reuses a training object")
        if r.split == "group4" and r.object_id in train_objects:
            raise ConfigurationError(f"group4 record {r.record_id} reuses a training object")


def build_dataset(
    cfg: SystemConfig,
    n_train_diffusers: int,
    n_test_diffusers: int,
    n_train_objects: int,
    seed: int,
    out_dir: str | Path,
    n_group2_objects: int = 40,
    n_group3_objects: int = 30,
    n_group4_objects: int = 28,
    feature_size: float = 63.0,
    phase_std: float = 2.0 * np.pi,
    train_diffuser_seeds: list[int] | None = None,
    test_diffuser_seeds: list[int] | None = None,
    threads: int = 1,
) -> DatasetManifest:
    """Simulate and write a complete dataset; returns its manifest.

    Training objects are an even mix of the two glyph families. Diffuser
    seeds default to values derived from ``seed`` but can be pinned
    explicitly; the train and test pools must be disjoint.
    """
    if n_train_diffusers < 1 or n_test_diffusers < 1:
        raise ConfigurationError("need at least one training and one testing diffuser")
    if n_train_objects < 2:
        raise ConfigurationError("need at least two training objects")
    out_dir = Path(out_dir)
    (out_dir / "objects").mkdir(parents=True, exist_ok=True)
    for s in SPLITS:
        (out_dir / "speckles" / s).mkdir(parents=True, exist_ok=True)

    master = np.random.default_rng(seed)
    if train_diffuser_seeds is None:
        train_diffuser_seeds = [int(v) for v in master.integers(0, 2**62, size=n_train_diffusers)]
    if test_diffuser_seeds is None:
        test_diffuser_seeds = [int(v) for v in master.integers(0, 2**62, size=n_test_diffusers)]
    if len(train_diffuser_seeds) != n_train_diffusers or len(test_diffuser_seeds) != n_test_diffusers:
        raise ConfigurationError("diffuser seed lists do not match the requested counts")
    if set(train_diffuser_seeds) & set(test_diffuser_seeds):
        raise ConfigurationError("train and test diffuser seed pools overlap")

    diffusers = [
        DiffuserInfo(f"train{i}", s, "train") for i, s in enumerate(train_diffuser_seeds)
    ] + [DiffuserInfo(f"test{i}", s, "test") for i, s in enumerate(test_diffuser_seeds)]
    screens = {
        d.id: generate_diffuser(cfg, feature_size, phase_std, d.seed, id=d.id) for d in diffusers
    }

    object_region = cfg.grid_size // 4
    obj_seed = int(master.integers(0, 2**62))
    g2_seed = int(master.integers(0, 2**62))
    g3_seed = int(master.integers(0, 2**62))
    g4_seed = int(master.integers(0, 2**62))
    group2_diffuser = f"test{int(master.integers(0, n_test_diffusers))}"
    group4_diffuser = "train0"

    def glyph_mix(count: int, seed_: int, id_offset: int) -> list[ObjectImage]:
        half = count // 2
        a = generate_objects("glyphs_a", half, object_region, seed_, id_offset)
        b = generate_objects("glyphs_b", count - half, object_region, seed_ + 1, id_offset + half)
        return a + b

    train_objs = glyph_mix(n_train_objects, obj_seed, 0)
    next_id = n_train_objects
    g2_objs = glyph_mix(n_group2_objects, g2_seed, next_id) if n_group2_objects else []
    next_id += n_group2_objects
    g3_objs = (
        generate_objects("doodles", n_group3_objects, object_region, g3_seed, next_id)
        if n_group3_objects
        else []
    )
    next_id += n_group3_objects
    g4_objs = glyph_mix(n_group4_objects, g4_seed, next_id) if n_group4_objects else []

    roi = cfg.grid_size // 2
    all_objects = train_objs + g2_objs + g3_objs + g4_objs
    object_paths: dict[int, str] = {}
    for obj in all_objects:
        rel = f"objects/obj_{obj.object_id:05d}.spkt"
        embedded = embed_object(obj.grid, cfg)
        write_spkt(out_dir / rel, embedded.crop_center(roi).grid)
        object_paths[obj.object_id] = rel

    plan: list[tuple[ObjectImage, str, str]] = []
    for obj in train_objs:
        for d in diffusers:
            plan.append((obj, d.id, "train" if d.role == "train" else "group1"))
    for obj in g2_objs:
        plan.append((obj, group2_diffuser, "group2"))
    for obj in g3_objs:
        for d in diffusers:
            if d.role == "test":
                plan.append((obj, d.id, "group3"))
    for obj in g4_objs:
        plan.append((obj, group4_diffuser, "group4"))

    records: list[RecordMeta] = []
    for rid, (obj, did, split) in enumerate(plan):
        rel = f"speckles/{split}/r{rid:06d}.spkt"
        records.append(
            RecordMeta(rid, obj.object_id, obj.class_tag, did, split, rel, object_paths[obj.object_id])
        )

    object_by_id = {o.object_id: o for o in all_objects}

    def simulate_one(rec: RecordMeta) -> None:
        obj = object_by_id[rec.object_id]
        speckle = simulate_speckle(embed_object(obj.grid, cfg), screens[rec.diffuser_id], cfg)
        write_spkt(out_dir / rec.speckle_path, speckle.crop_center(roi).grid)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(simulate_one, records))
    else:
        for rec in records:
            simulate_one(rec)

    manifest = DatasetManifest(
        config={
            **cfg.as_dict(),
            "object_region": object_region,
            "roi_size": roi,
            "feature_size": feature_size,
            "phase_std": phase_std,
        },
        diffusers=diffusers,
        records=records,
        preprocessing={"binning": 2, "normalization": "max", "input_size": roi // 2},
        seeds={
            "master": seed,
            "train_diffusers": train_diffuser_seeds,
            "test_diffusers": test_diffuser_seeds,
            "objects": obj_seed,
            "group2_objects": g2_seed,
            "group3_objects": g3_seed,
            "group4_objects": g4_seed,
            "group2_diffuser": group2_diffuser,
            "group4_diffuser": group4_diffuser,
        },
        root=out_dir,
    )
    validate_manifest(manifest)
    manifest.save()
    return manifest

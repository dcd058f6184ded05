"""Point-cloud I/O, normalization, and the synthetic dataset builder.

Two cloud file formats:

* text: one ``x y z`` line per point, ``#`` comments and blank lines
  allowed, full-precision decimal floats;
* binary: magic ``PCB1``, u32 little-endian point count, then N
  little-endian float32 (x, y, z) triplets.

A dataset is a directory of cloud files plus ``manifest.json``::

    {
      "format_version": 1,
      "normalization": "center-unit-max",
      "point_count": 256,
      "seed": 7,
      "entries": [
        {"id": "box-chair-0000", "family": "box-chair",
         "path": "clouds/box-chair-0000.pcb", "points": 256, "seed": 123}
      ]
    }

Entry paths are relative to the manifest's directory.
"""

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionError, FormatError
from .shapes import FAMILIES, generate_shape, random_params
from .validation import as_point_cloud

CLOUD_MAGIC = b"PCB1"
NORMALIZATION_MODE = "center-unit-max"
MANIFEST_VERSION = 1


def normalize(cloud):
    """Center on the centroid and scale the farthest point to radius 1.

    Returns ``(normalized, centroid, scale)``; a single repeated point
    keeps scale 1. ``denormalize`` inverts it.
    """
    cloud = as_point_cloud(cloud)
    centroid = cloud.mean(axis=0)
    centered = cloud - centroid
    scale = float(np.sqrt(np.einsum("ij,ij->i", centered, centered).max()))
    if scale == 0.0:
        scale = 1.0
    return centered / scale, centroid, scale


def denormalize(cloud, centroid, scale):
    """Invert :func:`normalize` using its returned parameters."""
    cloud = as_point_cloud(cloud)
    return cloud * scale + np.asarray(centroid, dtype=np.float64)


# --- file formats -------------------------------------------------------


def save_cloud(cloud, path, fmt="binary"):
    """Write a cloud in the text or binary format."""
    cloud = as_point_cloud(cloud)
    path = Path(path)
    if fmt == "binary":
        data = np.ascontiguousarray(cloud, dtype="<f4")
        with open(path, "wb") as fh:
            fh.write(CLOUD_MAGIC)
            fh.write(struct.pack("<I", cloud.shape[0]))
            fh.write(data.tobytes())
    elif fmt == "text":
        lines = [" ".join(repr(float(c)) for c in point) for point in cloud]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        raise ConfigError(f"unknown cloud format {fmt!r}; use 'binary' or 'text'")


def _load_cloud_text(path):
    points = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 3:
                raise FormatError(
                    f"{path}: line {lineno}: expected 3 coordinates, got {len(fields)}",
                    line=lineno,
                )
            try:
                points.append([float(f) for f in fields])
            except ValueError as exc:
                raise FormatError(
                    f"{path}: line {lineno}: non-numeric coordinate: {exc}",
                    line=lineno,
                ) from exc
    if not points:
        raise DimensionError(f"{path}: cloud file contains no points")
    return np.asarray(points, dtype=np.float64)


def _load_cloud_binary(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if len(magic) < 4 or magic != CLOUD_MAGIC:
            raise FormatError(
                f"{path}: bad magic {magic!r}, expected {CLOUD_MAGIC!r}", offset=0
            )
        header = fh.read(4)
        if len(header) != 4:
            raise FormatError(f"{path}: truncated point count", offset=4)
        (count,) = struct.unpack("<I", header)
        if count < 1:
            raise DimensionError(f"{path}: cloud file declares zero points")
        payload = fh.read(12 * count)
        if len(payload) != 12 * count:
            raise FormatError(
                f"{path}: truncated payload: expected {12 * count} bytes, "
                f"got {len(payload)}",
                offset=8 + len(payload),
            )
        trailing = fh.read(1)
        if trailing:
            raise FormatError(f"{path}: trailing data after payload", offset=8 + 12 * count)
    pts = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(count, 3)
    return pts


def load_cloud(path):
    """Load either cloud format, sniffing the binary magic first."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == CLOUD_MAGIC:
        cloud = _load_cloud_binary(path)
    else:
        cloud = _load_cloud_text(path)
    return as_point_cloud(cloud, name=str(path))


# --- dataset ------------------------------------------------------------


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    family: str
    path: str  # relative to the manifest directory
    points: int
    seed: int


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple
    normalization: str
    point_count: int
    seed: int
    root: Path  # directory the entry paths resolve against

    def resolve(self, entry):
        return self.root / entry.path

    @property
    def families(self):
        return sorted({e.family for e in self.entries})


def save_manifest(manifest, path):
    doc = {
        "format_version": MANIFEST_VERSION,
        "normalization": manifest.normalization,
        "point_count": manifest.point_count,
        "seed": manifest.seed,
        "entries": [
            {
                "id": e.id,
                "family": e.family,
                "path": e.path,
                "points": e.points,
                "seed": e.seed,
            }
            for e in manifest.entries
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_manifest(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}", line=exc.lineno) from exc
    try:
        if doc["format_version"] != MANIFEST_VERSION:
            raise FormatError(
                f"{path}: unsupported manifest version {doc['format_version']}"
            )
        entries = tuple(
            ManifestEntry(
                id=str(e["id"]),
                family=str(e["family"]),
                path=str(e["path"]),
                points=int(e["points"]),
                seed=int(e["seed"]),
            )
            for e in doc["entries"]
        )
        manifest = DatasetManifest(
            entries=entries,
            normalization=str(doc["normalization"]),
            point_count=int(doc["point_count"]),
            seed=int(doc["seed"]),
            root=path.parent,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed manifest: {exc}") from exc
    ids = [e.id for e in manifest.entries]
    if len(set(ids)) != len(ids):
        raise FormatError(f"{path}: duplicate entry ids")
    for e in manifest.entries:
        if e.points != manifest.point_count:
            raise FormatError(
                f"{path}: entry {e.id} has {e.points} points, dataset declares "
                f"{manifest.point_count}"
            )
    return manifest


def family_mix(count, families):
    """Deterministic near-equal split of ``count`` over the families.

    The first ``count % len(families)`` families receive one extra item.
    """
    families = list(families)
    base = count // len(families)
    extra = count % len(families)
    return {fam: base + (1 if i < extra else 0) for i, fam in enumerate(families)}


def build_dataset(out_dir, count, families=FAMILIES, n_points=256, seed=0, fmt="binary"):
    """Generate a seeded synthetic dataset and write it plus its manifest.

    Returns the manifest. Running twice with the same arguments produces
    byte-identical files.
    """
    if count < 1:
        raise ConfigError(f"dataset count must be >= 1, got {count}")
    if n_points < 1:
        raise ConfigError(f"point count must be >= 1, got {n_points}")
    families = list(families)
    for fam in families:
        if fam not in FAMILIES:
            raise ConfigError(f"unknown family {fam!r}; choose from {FAMILIES}")
    out_dir = Path(out_dir)
    cloud_dir = out_dir / "clouds"
    cloud_dir.mkdir(parents=True, exist_ok=True)
    mix = family_mix(count, families)
    ext = "pcb" if fmt == "binary" else "xyz"
    master = np.random.default_rng(seed)
    entries = []
    for fam in families:
        for i in range(mix[fam]):
            params = random_params(fam, master)
            entry_seed = int(master.integers(0, 2**32))
            cloud = generate_shape(params, n_points, entry_seed)
            entry_id = f"{fam}-{i:04d}"
            rel_path = f"clouds/{entry_id}.{ext}"
            save_cloud(cloud, out_dir / rel_path, fmt=fmt)
            entries.append(
                ManifestEntry(
                    id=entry_id,
                    family=fam,
                    path=rel_path,
                    points=n_points,
                    seed=entry_seed,
                )
            )
    manifest = DatasetManifest(
        entries=tuple(entries),
        normalization=NORMALIZATION_MODE,
        point_count=n_points,
        seed=seed,
        root=out_dir,
    )
    save_manifest(manifest, out_dir / "manifest.json")
    return manifest


def load_dataset_clouds(manifest, normalized=True):
    """Load every entry's cloud, optionally normalized, in manifest order."""
    clouds = []
    for entry in manifest.entries:
        cloud = load_cloud(manifest.resolve(entry))
        if cloud.shape[0] != manifest.point_count:
            raise DimensionError(
                f"{entry.id}: file has {cloud.shape[0]} points, manifest says "
                f"{manifest.point_count}"
            )
        if normalized:
            cloud, _, _ = normalize(cloud)
        clouds.append(cloud)
    return clouds

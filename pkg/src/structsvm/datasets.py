"""Dataset file formats, deterministic synthetic generators, and model
persistence.

Multiclass data uses a sparse text format (one instance per line, 1-based
sorted feature indices); chain and graph data use one JSON document per
file with an explicit header. Models are JSON with the weight payload
hex-encoded from the raw 64-bit representation so save/load round-trips
are bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .oracles import TaskInstance
from .tasks import BinaryPottsTask, ChainTask, MulticlassTask

__all__ = [
    "Dataset",
    "DatasetFormatError",
    "ModelFormatError",
    "check_model_compatible",
    "generate",
    "generate_binary_potts",
    "generate_chain",
    "generate_multiclass",
    "load_binary_potts",
    "load_chain",
    "load_dataset",
    "load_model",
    "load_multiclass",
    "save_dataset",
    "save_model",
]

FORMAT_VERSION = 1
MODEL_FORMAT = "structsvm-model"

TASK_KINDS = ("multiclass", "chain", "binary-potts")


class DatasetFormatError(ValueError):
    """A dataset file violates its declared format."""


class ModelFormatError(ValueError):
    """A model file is corrupt, incompatible, or from another version."""


@dataclass(frozen=True, eq=False)
class Dataset:
    kind: str
    task: Any
    instances: list[TaskInstance]

    @property
    def n(self) -> int:
        return len(self.instances)

    @property
    def task_params(self) -> dict:
        if self.kind == "multiclass":
            return {"num_classes": self.task.num_classes, "base_dim": self.task.base_dim}
        if self.kind == "chain":
            return {"num_labels": self.task.num_labels, "unary_dim": self.task.unary_dim}
        return {"unary_dim": self.task.unary_dim}


# ---------------------------------------------------------------------------
# multiclass text format


def load_multiclass(path: str | Path) -> Dataset:
    """Parse the sparse multiclass text format.

    First line ``#multiclass K d``; then one instance per line,
    ``label idx:val ...`` with 1-based strictly increasing indices.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith("#multiclass"):
        raise DatasetFormatError(f"{path}:1: expected '#multiclass K d' header")
    header = lines[0].split()
    if len(header) != 3:
        raise DatasetFormatError(f"{path}:1: malformed header {lines[0]!r}")
    try:
        num_classes, base_dim = int(header[1]), int(header[2])
    except ValueError as exc:
        raise DatasetFormatError(f"{path}:1: non-integer header fields") from exc
    if num_classes < 2 or base_dim < 1:
        raise DatasetFormatError(f"{path}:1: invalid sizes K={num_classes} d={base_dim}")
    task = MulticlassTask(num_classes, base_dim)
    instances = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        tokens = line.split()
        try:
            label = int(tokens[0])
        except ValueError as exc:
            raise DatasetFormatError(f"{path}:{lineno}: bad label {tokens[0]!r}") from exc
        if not 0 <= label < num_classes:
            raise DatasetFormatError(f"{path}:{lineno}: label {label} out of range")
        features = np.zeros(base_dim)
        previous = 0
        for token in tokens[1:]:
            idx_text, _, val_text = token.partition(":")
            try:
                idx, val = int(idx_text), float(val_text)
            except ValueError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: bad entry {token!r}") from exc
            if idx <= previous:
                raise DatasetFormatError(
                    f"{path}:{lineno}: indices must be sorted and unique, got {idx} after {previous}"
                )
            if idx > base_dim:
                raise DatasetFormatError(
                    f"{path}:{lineno}: index {idx} exceeds declared dimension {base_dim}"
                )
            features[idx - 1] = val
            previous = idx
        instances.append(TaskInstance(features=features, truth=label, index=len(instances)))
    if not instances:
        raise DatasetFormatError(f"{path}: no instances")
    return Dataset("multiclass", task, instances)


def _save_multiclass(dataset: Dataset, path: Path) -> None:
    lines = [f"#multiclass {dataset.task.num_classes} {dataset.task.base_dim}"]
    for instance in dataset.instances:
        entries = " ".join(
            f"{j + 1}:{float(value)!r}" for j, value in enumerate(instance.features)
            if value != 0.0
        )
        lines.append(f"{instance.truth} {entries}".rstrip())
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# chain and graph JSON formats


def load_chain(path: str | Path) -> Dataset:
    """Load the chain JSON format (header plus per-example labels/features)."""
    path = Path(path)
    payload = _read_json(path)
    header = _check_header(payload, path, "chain", ("num_labels", "unary_dim"))
    num_labels, unary_dim = int(header["num_labels"]), int(header["unary_dim"])
    task = ChainTask(num_labels, unary_dim)
    instances = []
    for idx, example in enumerate(payload["examples"]):
        labels = example.get("labels")
        features = example.get("features")
        if not isinstance(labels, list) or not labels:
            raise DatasetFormatError(f"{path}: example {idx}: missing or empty labels")
        if not isinstance(features, list) or len(features) != len(labels):
            raise DatasetFormatError(
                f"{path}: example {idx}: features and labels must have equal length"
            )
        feats = _feature_matrix(features, unary_dim, path, idx)
        truth = _label_tuple(labels, num_labels, path, idx)
        instances.append(TaskInstance(features=feats, truth=truth, index=idx))
    return Dataset("chain", task, instances)


def load_binary_potts(path: str | Path) -> Dataset:
    """Load the graph JSON format (node features, binary labels, edge list)."""
    path = Path(path)
    payload = _read_json(path)
    header = _check_header(payload, path, "binary-potts", ("unary_dim",))
    unary_dim = int(header["unary_dim"])
    task = BinaryPottsTask(unary_dim)
    instances = []
    for idx, example in enumerate(payload["examples"]):
        labels = example.get("labels")
        features = example.get("features")
        edges = example.get("edges")
        if not isinstance(labels, list) or not labels:
            raise DatasetFormatError(f"{path}: example {idx}: missing or empty labels")
        if not isinstance(features, list) or len(features) != len(labels):
            raise DatasetFormatError(
                f"{path}: example {idx}: features and labels must have equal length"
            )
        if not isinstance(edges, list):
            raise DatasetFormatError(f"{path}: example {idx}: missing edge list")
        feats = _feature_matrix(features, unary_dim, path, idx)
        truth = _label_tuple(labels, 2, path, idx)
        node_count = len(labels)
        seen = set()
        checked = []
        for edge in edges:
            if not isinstance(edge, list) or len(edge) != 2:
                raise DatasetFormatError(f"{path}: example {idx}: bad edge {edge!r}")
            k, l = int(edge[0]), int(edge[1])
            if not 0 <= k < l < node_count:
                raise DatasetFormatError(
                    f"{path}: example {idx}: edge ({k}, {l}) must satisfy 0 <= k < l < {node_count}"
                )
            if (k, l) in seen:
                raise DatasetFormatError(f"{path}: example {idx}: duplicate edge ({k}, {l})")
            seen.add((k, l))
            checked.append((k, l))
        edge_array = np.array(checked, dtype=np.int64).reshape(len(checked), 2)
        instances.append(TaskInstance(features=feats, truth=truth, index=idx, edges=edge_array))
    return Dataset("binary-potts", task, instances)


def _save_json_dataset(dataset: Dataset, path: Path) -> None:
    header = {"task": dataset.kind, "version": FORMAT_VERSION, "n": dataset.n}
    header.update(dataset.task_params)
    examples = []
    for instance in dataset.instances:
        example = {
            "labels": [int(v) for v in np.atleast_1d(instance.truth)],
            "features": [[float(v) for v in row] for row in instance.features],
        }
        if dataset.kind == "binary-potts":
            example["edges"] = [[int(k), int(l)] for k, l in instance.edges]
        examples.append(example)
    path.write_text(json.dumps({"header": header, "examples": examples}, indent=1) + "\n")


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset in its canonical on-disk format."""
    path = Path(path)
    if dataset.kind == "multiclass":
        _save_multiclass(dataset, path)
    else:
        _save_json_dataset(dataset, path)


def load_dataset(path: str | Path, kind: str | None = None) -> Dataset:
    """Load any dataset file, sniffing the task kind from its header.

    A ``kind`` argument, when given, is validated against the file.
    """
    path = Path(path)
    text_head = path.read_text()[:128].lstrip()
    if text_head.startswith("#multiclass"):
        detected = "multiclass"
    elif text_head.startswith("{"):
        payload = _read_json(path)
        detected = payload.get("header", {}).get("task")
        if detected not in ("chain", "binary-potts"):
            raise DatasetFormatError(f"{path}: unknown task kind {detected!r} in header")
    else:
        raise DatasetFormatError(f"{path}: unrecognized dataset format")
    if kind is not None and kind != detected:
        raise DatasetFormatError(f"{path}: file holds a {detected} dataset, expected {kind}")
    loader = {
        "multiclass": load_multiclass,
        "chain": load_chain,
        "binary-potts": load_binary_potts,
    }[detected]
    return loader(path)


def _read_json(path: Path) -> dict:
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(payload, dict) or "header" not in payload or "examples" not in payload:
        raise DatasetFormatError(f"{path}: expected an object with 'header' and 'examples'")
    return payload


def _check_header(payload: dict, path: Path, kind: str, required: tuple[str, ...]) -> dict:
    header = payload["header"]
    if header.get("task") != kind:
        raise DatasetFormatError(f"{path}: header task {header.get('task')!r}, expected {kind!r}")
    if header.get("version") != FORMAT_VERSION:
        raise DatasetFormatError(
            f"{path}: format version {header.get('version')!r}, expected {FORMAT_VERSION}"
        )
    for key in required + ("n",):
        if key not in header:
            raise DatasetFormatError(f"{path}: header missing {key!r}")
    if int(header["n"]) != len(payload["examples"]):
        raise DatasetFormatError(
            f"{path}: header declares n={header['n']} but file has {len(payload['examples'])} examples"
        )
    if int(header["n"]) < 1:
        raise DatasetFormatError(f"{path}: dataset is empty")
    return header


def _feature_matrix(rows: list, width: int, path: Path, idx: int) -> np.ndarray:
    for row in rows:
        if not isinstance(row, list) or len(row) != width:
            raise DatasetFormatError(
                f"{path}: example {idx}: feature rows must have length {width}"
            )
    return np.array(rows, dtype=np.float64)


def _label_tuple(labels: list, count: int, path: Path, idx: int) -> tuple[int, ...]:
    out = []
    for value in labels:
        value = int(value)
        if not 0 <= value < count:
            raise DatasetFormatError(f"{path}: example {idx}: label {value} out of range")
        out.append(value)
    return tuple(out)


# ---------------------------------------------------------------------------
# synthetic generators


def _simplex_means(count: int, dim: int, scale: float) -> np.ndarray:
    """Vertices of a regular simplex on the sphere of radius ``scale`` in R^dim."""
    if dim < count - 1:
        raise ValueError(f"feature dimension {dim} too small for {count} simplex vertices")
    corners = np.eye(count) - 1.0 / count
    _, _, vt = np.linalg.svd(corners)
    coords = corners @ vt[: count - 1].T
    coords /= np.linalg.norm(coords, axis=1, keepdims=True)
    means = np.zeros((count, dim))
    means[:, : count - 1] = scale * coords
    return means


def generate_multiclass(
    n: int,
    num_classes: int,
    base_dim: int,
    seed: int,
    scale: float = 4.0,
    noise: float = 1.0,
) -> Dataset:
    """Gaussian clusters with unit variance, means on a scaled simplex."""
    if n < 1 or num_classes < 2 or base_dim < 1:
        raise ValueError("sizes must be positive and num_classes at least 2")
    rng = np.random.default_rng(seed)
    means = _simplex_means(num_classes, base_dim, scale)
    labels = rng.integers(0, num_classes, size=n)
    instances = []
    for i in range(n):
        features = means[labels[i]] + noise * rng.standard_normal(base_dim)
        instances.append(TaskInstance(features=features, truth=int(labels[i]), index=i))
    return Dataset("multiclass", MulticlassTask(num_classes, base_dim), instances)


def generate_chain(
    n: int,
    length: int,
    num_labels: int,
    unary_dim: int = 2,
    seed: int = 0,
    scale: float = 4.0,
    noise: float = 1.0,
) -> Dataset:
    """Label sequences from a random Markov chain; per-position features are
    the label's cluster mean plus Gaussian noise."""
    if n < 1 or length < 1 or num_labels < 2 or unary_dim < 1:
        raise ValueError("sizes must be positive and num_labels at least 2")
    rng = np.random.default_rng(seed)
    means = _simplex_means(num_labels, unary_dim, scale)
    transition = rng.random((num_labels, num_labels)) + 0.1
    transition /= transition.sum(axis=1, keepdims=True)
    instances = []
    for i in range(n):
        labels = np.zeros(length, dtype=np.int64)
        labels[0] = rng.integers(0, num_labels)
        for pos in range(1, length):
            labels[pos] = rng.choice(num_labels, p=transition[labels[pos - 1]])
        features = means[labels] + noise * rng.standard_normal((length, unary_dim))
        instances.append(
            TaskInstance(features=features, truth=tuple(int(v) for v in labels), index=i)
        )
    return Dataset("chain", ChainTask(num_labels, unary_dim), instances)


def generate_binary_potts(
    n: int,
    rows: int,
    cols: int,
    unary_dim: int = 2,
    seed: int = 0,
    smoothing: float = 0.5,
    scale: float = 4.0,
    noise: float = 1.0,
) -> Dataset:
    """Grid-graph segmentation examples.

    Ground truth thresholds a spatially smoothed random field that is shrunk
    toward its mean by ``smoothing``; at smoothing 1 the labeling is
    constant. Node features are the label's cluster mean plus noise.
    """
    if n < 1 or rows < 1 or cols < 1 or unary_dim < 1:
        raise ValueError("sizes must be positive")
    if not 0.0 <= smoothing <= 1.0:
        raise ValueError("smoothing must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    means = _simplex_means(2, unary_dim, scale)
    edges = _grid_edges(rows, cols)
    instances = []
    for i in range(n):
        field = rng.standard_normal((rows, cols))
        for _ in range(3):
            field = 0.5 * field + 0.5 * _neighbor_mean(field)
        field = (1.0 - smoothing) * field + smoothing * field.mean()
        labels = (field.ravel() > 0.0).astype(np.int64)
        features = means[labels] + noise * rng.standard_normal((rows * cols, unary_dim))
        instances.append(
            TaskInstance(
                features=features,
                truth=tuple(int(v) for v in labels),
                index=i,
                edges=edges.copy(),
            )
        )
    return Dataset("binary-potts", BinaryPottsTask(unary_dim), instances)


def generate(kind: str, seed: int = 0, **params) -> Dataset:
    """Dispatch to the task-specific generator by kind."""
    if kind == "multiclass":
        return generate_multiclass(seed=seed, **params)
    if kind == "chain":
        return generate_chain(seed=seed, **params)
    if kind == "binary-potts":
        return generate_binary_potts(seed=seed, **params)
    raise ValueError(f"unknown task kind {kind!r}; expected one of {TASK_KINDS}")


def _grid_edges(rows: int, cols: int) -> np.ndarray:
    edges = []
    for r in range(rows):
        for c in range(cols):
            node = r * cols + c
            if c + 1 < cols:
                edges.append((node, node + 1))
            if r + 1 < rows:
                edges.append((node, node + cols))
    return np.array(edges, dtype=np.int64).reshape(len(edges), 2)


def _neighbor_mean(field: np.ndarray) -> np.ndarray:
    padded = np.pad(field, 1, mode="edge")
    return (padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:]) / 4.0


# ---------------------------------------------------------------------------
# model persistence


def save_model(weights: np.ndarray, metadata: dict, path: str | Path) -> None:
    """Write weights plus metadata as JSON; the weight payload is the raw
    64-bit representation in hex, so a round-trip is bit-exact."""
    weights = np.ascontiguousarray(weights, dtype="<f8")
    payload = {
        "format": MODEL_FORMAT,
        "version": FORMAT_VERSION,
        **metadata,
        "dim": int(weights.shape[0]),
        "weights_hex": weights.tobytes().hex(),
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def load_model(path: str | Path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid JSON ({exc})") from exc
    if payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"{path}: not a model file")
    if payload.get("version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: model version {payload.get('version')!r}, expected {FORMAT_VERSION}"
        )
    try:
        weights = np.frombuffer(bytes.fromhex(payload["weights_hex"]), dtype="<f8").copy()
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"{path}: corrupt weight payload") from exc
    if weights.shape[0] != payload.get("dim"):
        raise ModelFormatError(
            f"{path}: payload holds {weights.shape[0]} weights, header says {payload.get('dim')}"
        )
    metadata = {k: v for k, v in payload.items() if k not in ("format", "weights_hex")}
    return weights, metadata


def check_model_compatible(metadata: dict, dataset: Dataset) -> None:
    """Raise if a loaded model does not match a dataset's task."""
    if metadata.get("task") != dataset.kind:
        raise ModelFormatError(
            f"model was trained for task {metadata.get('task')!r}, dataset is {dataset.kind!r}"
        )
    if metadata.get("dim") != dataset.task.dim:
        raise ModelFormatError(
            f"model dimension {metadata.get('dim')} does not match task dimension {dataset.task.dim}"
        )
    params = metadata.get("task_params")
    if params is not None and dict(params) != dataset.task_params:
        raise ModelFormatError(
            f"model task parameters {params} do not match dataset {dataset.task_params}"
        )

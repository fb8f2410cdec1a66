"""Built-in task families: multiclass classification, chain sequence
labeling, and binary Potts segmentation on graphs.

Each family defines its joint feature map, its loss, and an exact
loss-augmented max-oracle. Multiclass labels are plain ints; chain and
graph labelings are tuples of ints. All oracles resolve ties toward a
canonical first maximizer (ascending class id, lower label id at Viterbi
back-pointers, sink-side label 0 for indifferent graph nodes) so repeated
runs are reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .maxflow import BinaryEnergy, minimize_binary_energy
from .oracles import OracleResult, TaskInstance, plane_for_label

__all__ = [
    "BinaryPottsTask",
    "ChainTask",
    "MulticlassTask",
    "binary_potts_oracle",
    "chain_viterbi_oracle",
    "multiclass_oracle",
]


def _finish(task, instance: TaskInstance, label, w: np.ndarray, n: int) -> OracleResult:
    # Value and plane always go through the shared assembly so that every
    # oracle agrees bit-for-bit with the brute-force reference on a shared
    # argmax label.
    plane = plane_for_label(task, instance, label, n)
    return OracleResult(plane, label, plane.value_at(w))


@dataclass(frozen=True)
class MulticlassTask:
    """K-way classification with the block one-hot joint feature map.

    The joint feature of (x, y) places the base feature vector in the y-th
    of K blocks; the loss is 0/1.
    """

    num_classes: int
    base_dim: int

    def __post_init__(self) -> None:
        if self.num_classes < 2:
            raise ValueError("need at least two classes")
        if self.base_dim < 1:
            raise ValueError("base feature dimension must be positive")

    @property
    def dim(self) -> int:
        return self.num_classes * self.base_dim

    def joint_feature(self, instance: TaskInstance, label: int) -> tuple[np.ndarray, float]:
        label = self._check_label(label)
        vec = np.zeros(self.dim)
        vec[label * self.base_dim : (label + 1) * self.base_dim] = instance.features
        return vec, 0.0

    def loss(self, truth: int, label: int) -> float:
        return 0.0 if int(label) == int(truth) else 1.0

    def oracle(self, instance: TaskInstance, w: np.ndarray, n: int) -> OracleResult:
        return multiclass_oracle(self, instance, w, n)

    def predict(self, instance: TaskInstance, w: np.ndarray) -> int:
        return int(np.argmax(self._class_scores(instance, w)))

    def enumerate_labels(self, instance: TaskInstance) -> Iterable[int]:
        return range(self.num_classes)

    def label_count(self, instance: TaskInstance) -> int:
        return self.num_classes

    def _class_scores(self, instance: TaskInstance, w: np.ndarray) -> np.ndarray:
        return w.reshape(self.num_classes, self.base_dim) @ instance.features

    def _check_label(self, label: int) -> int:
        label = int(label)
        if not 0 <= label < self.num_classes:
            raise ValueError(f"class id {label} out of range for K={self.num_classes}")
        return label


def multiclass_oracle(
    task: MulticlassTask, instance: TaskInstance, w: np.ndarray, n: int
) -> OracleResult:
    """Exact loss-augmented argmax by scoring all K classes.

    Ties go to the smallest class id.
    """
    w = _check_w(w, task.dim)
    scores = task._class_scores(instance, w)
    augmented = scores - scores[instance.truth] + 1.0
    augmented[instance.truth] = 0.0
    label = int(np.argmax(augmented))
    return _finish(task, instance, label, w, n)


@dataclass(frozen=True)
class ChainTask:
    """Sequence labeling over chains with unary and transition features.

    The joint feature concatenates the summed per-position block one-hot
    encodings with the K*K transition indicator counts; the loss is the
    normalized Hamming distance. The exact oracle is a Viterbi sweep.
    """

    num_labels: int
    unary_dim: int

    def __post_init__(self) -> None:
        if self.num_labels < 2:
            raise ValueError("need at least two labels")
        if self.unary_dim < 1:
            raise ValueError("unary feature dimension must be positive")

    @property
    def dim(self) -> int:
        return self.num_labels * self.unary_dim + self.num_labels**2

    def joint_feature(self, instance: TaskInstance, label) -> tuple[np.ndarray, float]:
        label = self._check_label(instance, label)
        k, ud = self.num_labels, self.unary_dim
        unary = np.zeros((k, ud))
        np.add.at(unary, label, instance.features)
        pairwise = np.zeros((k, k))
        if label.size > 1:
            np.add.at(pairwise, (label[:-1], label[1:]), 1.0)
        return np.concatenate([unary.ravel(), pairwise.ravel()]), 0.0

    def loss(self, truth, label) -> float:
        truth = np.asarray(truth)
        label = np.asarray(label)
        return float(np.mean(truth != label))

    def oracle(self, instance: TaskInstance, w: np.ndarray, n: int) -> OracleResult:
        return chain_viterbi_oracle(self, instance, w, n)

    def predict(self, instance: TaskInstance, w: np.ndarray) -> tuple[int, ...]:
        return self._viterbi(instance, _check_w(w, self.dim), with_loss=False)

    def enumerate_labels(self, instance: TaskInstance) -> Iterator[tuple[int, ...]]:
        return itertools.product(range(self.num_labels), repeat=len(instance.truth))

    def label_count(self, instance: TaskInstance) -> int:
        return self.num_labels ** len(instance.truth)

    def _viterbi(self, instance: TaskInstance, w: np.ndarray, with_loss: bool) -> tuple[int, ...]:
        k, ud = self.num_labels, self.unary_dim
        length = instance.features.shape[0]
        w_unary = w[: k * ud].reshape(k, ud)
        w_pair = w[k * ud :].reshape(k, k)
        node = instance.features @ w_unary.T  # (L, K)
        if with_loss:
            truth = np.asarray(instance.truth)
            node = node + (np.arange(k)[None, :] != truth[:, None]) / length
        score = node[0].copy()
        back = np.zeros((length, k), dtype=np.int64)
        for pos in range(1, length):
            candidate = score[:, None] + w_pair  # (K_prev, K_cur)
            back[pos] = np.argmax(candidate, axis=0)  # first max: lower prev label wins
            score = candidate[back[pos], np.arange(k)] + node[pos]
        labels = np.zeros(length, dtype=np.int64)
        labels[-1] = int(np.argmax(score))
        for pos in range(length - 1, 0, -1):
            labels[pos - 1] = back[pos, labels[pos]]
        return tuple(int(v) for v in labels)

    def _check_label(self, instance: TaskInstance, label) -> np.ndarray:
        label = np.asarray(label, dtype=np.int64)
        if label.shape != (instance.features.shape[0],):
            raise ValueError("labeling length does not match the feature sequence")
        if label.size and (label.min() < 0 or label.max() >= self.num_labels):
            raise ValueError(f"label out of range for K={self.num_labels}")
        return label


def chain_viterbi_oracle(
    task: ChainTask, instance: TaskInstance, w: np.ndarray, n: int
) -> OracleResult:
    """Exact loss-augmented argmax over label sequences in O(L K^2)."""
    w = _check_w(w, task.dim)
    label = task._viterbi(instance, w, with_loss=True)
    return _finish(task, instance, label, w, n)


@dataclass(frozen=True)
class BinaryPottsTask:
    """Figure-ground labeling on graphs with an unweighted smoothness prior.

    Nodes carry the two-block one-hot unary features; every edge whose
    endpoints disagree is penalized by ``pairwise_weight`` in the prediction
    score. The smoothness term carries no learned weight, so it enters the
    offset side of the planes, not the feature vector. The loss is the
    normalized Hamming distance, and the exact oracle reduces to one s-t
    min-cut on a submodular energy.
    """

    unary_dim: int
    pairwise_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.unary_dim < 1:
            raise ValueError("unary feature dimension must be positive")

    @property
    def dim(self) -> int:
        return 2 * self.unary_dim

    def joint_feature(self, instance: TaskInstance, label) -> tuple[np.ndarray, float]:
        label = self._check_label(instance, label)
        vec = np.zeros(self.dim)
        for cls in (0, 1):
            mask = label == cls
            if mask.any():
                vec[cls * self.unary_dim : (cls + 1) * self.unary_dim] = instance.features[
                    mask
                ].sum(axis=0)
        return vec, -self.pairwise_weight * self._disagreements(instance, label)

    def loss(self, truth, label) -> float:
        truth = np.asarray(truth)
        label = np.asarray(label)
        return float(np.mean(truth != label))

    def oracle(self, instance: TaskInstance, w: np.ndarray, n: int) -> OracleResult:
        return binary_potts_oracle(self, instance, w, n)

    def predict(self, instance: TaskInstance, w: np.ndarray) -> tuple[int, ...]:
        return self._cut_argmax(instance, _check_w(w, self.dim), with_loss=False)

    def enumerate_labels(self, instance: TaskInstance) -> Iterator[tuple[int, ...]]:
        return itertools.product((0, 1), repeat=instance.features.shape[0])

    def label_count(self, instance: TaskInstance) -> int:
        return 2 ** instance.features.shape[0]

    def _cut_argmax(self, instance: TaskInstance, w: np.ndarray, with_loss: bool) -> tuple[int, ...]:
        if self.pairwise_weight < 0.0:
            raise ValueError("negative smoothness weight breaks submodularity")
        length = instance.features.shape[0]
        gain = instance.features @ w.reshape(2, self.unary_dim).T  # (L, 2)
        if with_loss:
            truth = np.asarray(instance.truth)
            gain = gain + (np.arange(2)[None, :] != truth[:, None]) / length
        edges = instance.edges if instance.edges is not None else np.zeros((0, 2), dtype=np.int64)
        energy = BinaryEnergy(
            unary=-gain,
            pairwise=tuple((int(k), int(l), self.pairwise_weight) for k, l in edges),
        )
        labels, _ = minimize_binary_energy(energy)
        return tuple(int(v) for v in labels)

    def _disagreements(self, instance: TaskInstance, label: np.ndarray) -> float:
        if instance.edges is None or len(instance.edges) == 0:
            return 0.0
        edges = np.asarray(instance.edges)
        return float(np.count_nonzero(label[edges[:, 0]] != label[edges[:, 1]]))

    def _check_label(self, instance: TaskInstance, label) -> np.ndarray:
        label = np.asarray(label, dtype=np.int64)
        if label.shape != (instance.features.shape[0],):
            raise ValueError("labeling length does not match the node count")
        if label.size and (label.min() < 0 or label.max() > 1):
            raise ValueError("graph labels must be binary")
        return label


def binary_potts_oracle(
    task: BinaryPottsTask, instance: TaskInstance, w: np.ndarray, n: int
) -> OracleResult:
    """Exact loss-augmented argmax over binary labelings via one min-cut.

    Maximizing loss plus unary score minus the smoothness penalty is carried
    out as minimization of the negated objective, whose pairwise term puts a
    non-negative cost on disagreeing neighbors and stays submodular.
    """
    w = _check_w(w, task.dim)
    label = task._cut_argmax(instance, w, with_loss=True)
    return _finish(task, instance, label, w, n)


def _check_w(w: np.ndarray, dim: int) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (dim,):
        raise ValueError(f"weight dimension mismatch: expected ({dim},), got {w.shape}")
    return w

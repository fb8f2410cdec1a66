"""Max-oracle contract shared by the task families.

A max-oracle takes one training example and a weight vector and returns the
labeling maximizing loss plus score margin, packaged as a solver-ready plane.
The ground-truth labeling always scores exactly zero, so oracle values are
never negative. A brute-force oracle that enumerates the whole label space
serves as the reference implementation for small problems.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Protocol

import numpy as np

from .planes import Plane

__all__ = [
    "CapacityError",
    "OracleResult",
    "Task",
    "TaskInstance",
    "brute_force_oracle",
    "max_oracle",
    "plane_for_label",
]

ENUMERATION_CAP = 1_000_000


class CapacityError(RuntimeError):
    """Label space too large for exhaustive enumeration."""


@dataclass(frozen=True, eq=False)
class TaskInstance:
    """One training example: feature payload, ground-truth labeling, index.

    The payload layout is task-specific (a single feature vector for
    multiclass, one vector per position for chains and graphs); graph
    examples additionally carry their undirected edge list.
    """

    features: np.ndarray
    truth: Any
    index: int
    edges: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class OracleResult:
    """Plane and labeling returned by one oracle call.

    ``value`` is the plane evaluated at the query weights, i.e. the scaled
    structured hinge loss attained by ``label``.
    """

    plane: Plane
    label: Any
    value: float


class Task(Protocol):
    """What the solvers and the brute-force oracle need from a task family."""

    @property
    def dim(self) -> int: ...

    def joint_feature(self, instance: TaskInstance, label: Any) -> tuple[np.ndarray, float]: ...

    def loss(self, truth: Any, label: Any) -> float: ...

    def oracle(self, instance: TaskInstance, w: np.ndarray, n: int) -> OracleResult: ...

    def predict(self, instance: TaskInstance, w: np.ndarray) -> Any: ...

    def enumerate_labels(self, instance: TaskInstance) -> Iterable[Any]: ...

    def label_count(self, instance: TaskInstance) -> int: ...


def plane_for_label(task: Task, instance: TaskInstance, label: Any, n: int) -> Plane:
    """Assemble the plane of one candidate labeling.

    The star part is the feature difference to the ground truth, the offset
    the task loss plus the difference in offset-side score (the unweighted
    smoothness term of graph tasks, zero elsewhere), both scaled by 1/n.
    By construction the truth labeling maps to the zero plane.
    """
    feat, side = task.joint_feature(instance, label)
    feat_truth, side_truth = task.joint_feature(instance, instance.truth)
    scale = 1.0 / n
    return Plane(
        scale * (feat - feat_truth),
        scale * (task.loss(instance.truth, label) + side - side_truth),
    )


def max_oracle(task: Task, instance: TaskInstance, w: np.ndarray, n: int) -> OracleResult:
    """Loss-augmented argmax for one example at weights ``w``.

    Dispatches to the task's exact oracle after validating dimensions. The
    returned value equals the structured hinge loss of the example and is
    always non-negative, since the truth labeling attains exactly zero.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (task.dim,):
        raise ValueError(f"weight dimension mismatch: task has d={task.dim}, got {w.shape}")
    if n < 1:
        raise ValueError("example count n must be at least 1")
    return task.oracle(instance, w, n)


def brute_force_oracle(
    task: Task,
    instance: TaskInstance,
    w: np.ndarray,
    n: int,
    cap: int = ENUMERATION_CAP,
) -> OracleResult:
    """Reference oracle: exhaustively score every labeling.

    Ties resolve to the first maximizer in the task's canonical enumeration
    order. Intended as ground truth in tests; raises :class:`CapacityError`
    when the label space exceeds ``cap``.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (task.dim,):
        raise ValueError(f"weight dimension mismatch: task has d={task.dim}, got {w.shape}")
    count = task.label_count(instance)
    if count > cap:
        raise CapacityError(f"label space of size {count} exceeds enumeration cap {cap}")
    best: OracleResult | None = None
    for label in task.enumerate_labels(instance):
        plane = plane_for_label(task, instance, label, n)
        value = plane.value_at(w)
        if best is None or value > best.value:
            best = OracleResult(plane, label, value)
    if best is None:
        raise ValueError("task enumerated an empty label space")
    return best

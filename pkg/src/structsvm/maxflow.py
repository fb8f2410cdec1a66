"""Exact s-t max-flow / min-cut and the reduction from submodular binary
pairwise energies to cut graphs.

The solver is a shortest-augmenting-path scheme over real-valued capacities
with a small residual threshold to guarantee termination. The minimum cut is
reported canonically as the set of nodes reachable from the source in the
final residual graph, which makes labelings deterministic under ties.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator

import numpy as np

__all__ = [
    "AUGMENT_EPS",
    "BinaryEnergy",
    "FlowNetwork",
    "energy_of",
    "energy_to_network",
    "max_flow",
    "minimize_binary_energy",
]

# Residual capacities at or below this are treated as saturated.
AUGMENT_EPS = 1e-12


class FlowNetwork:
    """Flow network over ``node_count`` non-terminal nodes plus two terminals.

    Terminals are addressed through the ``source`` and ``sink`` properties.
    Every arc implicitly carries a reverse residual arc of capacity zero.
    """

    def __init__(self, node_count: int) -> None:
        if node_count < 0:
            raise ValueError("node count must be non-negative")
        self.node_count = int(node_count)
        self._adj: list[list[int]] = [[] for _ in range(self.node_count + 2)]
        self._to: list[int] = []
        self._cap: list[float] = []

    @property
    def source(self) -> int:
        return self.node_count

    @property
    def sink(self) -> int:
        return self.node_count + 1

    def add_arc(self, tail: int, head: int, capacity: float) -> None:
        capacity = float(capacity)
        if not np.isfinite(capacity) or capacity < 0.0:
            raise ValueError(f"arc capacity must be finite and non-negative, got {capacity}")
        for node in (tail, head):
            if not 0 <= node < self.node_count + 2:
                raise ValueError(f"node id {node} out of range")
        if tail == head:
            raise ValueError("self-loop arcs are not allowed")
        if {tail, head} == {self.source, self.sink}:
            raise ValueError("arcs may not join the two terminals directly")
        self._adj[tail].append(len(self._to))
        self._to.append(head)
        self._cap.append(capacity)
        self._adj[head].append(len(self._to))
        self._to.append(tail)
        self._cap.append(0.0)

    def arcs(self) -> Iterator[tuple[int, int, float]]:
        """Yield the forward arcs as (tail, head, capacity)."""
        for arc in range(0, len(self._to), 2):
            yield self._to[arc + 1], self._to[arc], self._cap[arc]


def max_flow(net: FlowNetwork) -> tuple[float, np.ndarray]:
    """Maximum s-t flow and the canonical minimum cut.

    Returns
    -------
    flow : float
        Value of the maximum flow, equal to the minimum cut capacity.
    source_side : ndarray of bool, shape (node_count,)
        True for non-terminal nodes reachable from the source in the final
        residual graph; unreachable (including fully indifferent) nodes are
        sink-side.
    """
    total = net.node_count + 2
    residual = np.array(net._cap, dtype=np.float64)
    to = net._to
    adj = net._adj
    s, t = net.source, net.sink

    flow = 0.0
    parent = np.empty(total, dtype=np.int64)
    while True:
        parent.fill(-1)
        parent[s] = -2
        queue = deque([s])
        while queue and parent[t] == -1:
            u = queue.popleft()
            for arc in adj[u]:
                v = to[arc]
                if parent[v] == -1 and residual[arc] > AUGMENT_EPS:
                    parent[v] = arc
                    queue.append(v)
        if parent[t] == -1:
            break
        bottleneck = np.inf
        v = t
        while v != s:
            arc = parent[v]
            bottleneck = min(bottleneck, residual[arc])
            v = to[arc ^ 1]
        v = t
        while v != s:
            arc = parent[v]
            residual[arc] -= bottleneck
            residual[arc ^ 1] += bottleneck
            v = to[arc ^ 1]
        flow += bottleneck

    reachable = np.zeros(total, dtype=bool)
    reachable[s] = True
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for arc in adj[u]:
            v = to[arc]
            if not reachable[v] and residual[arc] > AUGMENT_EPS:
                reachable[v] = True
                queue.append(v)
    return flow, reachable[: net.node_count]


@dataclass(frozen=True, eq=False)
class BinaryEnergy:
    """Binary pairwise labeling energy with non-negative disagreement weights.

    ``unary[k]`` holds the costs of assigning node k label 0 and label 1;
    every pairwise entry ``(k, l, weight)`` adds ``weight`` when the two
    nodes take different labels. Non-negative weights keep the energy
    submodular, hence exactly minimizable by one s-t min-cut.
    """

    unary: np.ndarray
    pairwise: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        unary = np.array(self.unary, dtype=np.float64)
        if unary.ndim != 2 or unary.shape[1] != 2:
            raise ValueError(f"unary costs must have shape (L, 2), got {unary.shape}")
        if not np.isfinite(unary).all():
            raise ValueError("unary costs must be finite")
        unary.flags.writeable = False
        count = unary.shape[0]
        checked = []
        for k, l, weight in self.pairwise:
            k, l, weight = int(k), int(l), float(weight)
            if not 0 <= k < count or not 0 <= l < count or k == l:
                raise ValueError(f"invalid pairwise pair ({k}, {l}) for {count} nodes")
            if not np.isfinite(weight) or weight < 0.0:
                raise ValueError(
                    f"pairwise weight must be non-negative for submodularity, got {weight}"
                )
            checked.append((k, l, weight))
        object.__setattr__(self, "unary", unary)
        object.__setattr__(self, "pairwise", tuple(checked))

    @property
    def node_count(self) -> int:
        return int(self.unary.shape[0])


def energy_of(energy: BinaryEnergy, labels: np.ndarray) -> float:
    """Evaluate the energy of a binary labeling."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (energy.node_count,):
        raise ValueError("labeling length does not match the energy")
    total = float(energy.unary[np.arange(energy.node_count), labels].sum())
    for k, l, weight in energy.pairwise:
        if labels[k] != labels[l]:
            total += weight
    return total


def energy_to_network(energy: BinaryEnergy) -> tuple[FlowNetwork, float]:
    """Cut graph whose minimum cut minimizes the energy.

    For every labeling, the capacity of the induced cut equals the energy of
    the labeling minus the returned constant. The label convention is fixed
    by the canonical cut: sink-side nodes take label 0, source-side nodes
    label 1, so fully indifferent nodes resolve to label 0.
    """
    net = FlowNetwork(energy.node_count)
    constant = 0.0
    for k in range(energy.node_count):
        cost0, cost1 = energy.unary[k]
        base = min(cost0, cost1)
        constant += base
        if cost0 - base > 0.0:
            net.add_arc(net.source, k, cost0 - base)  # paid when k is sink-side (label 0)
        if cost1 - base > 0.0:
            net.add_arc(k, net.sink, cost1 - base)  # paid when k is source-side (label 1)
    for k, l, weight in energy.pairwise:
        if weight > 0.0:
            net.add_arc(k, l, weight)
            net.add_arc(l, k, weight)
    return net, constant


def minimize_binary_energy(energy: BinaryEnergy) -> tuple[np.ndarray, float]:
    """Globally minimize a submodular binary energy via one min-cut.

    Returns the minimizing labeling (int array) and its energy value.
    """
    net, _ = energy_to_network(energy)
    _, source_side = max_flow(net)
    labels = source_side.astype(np.int64)
    return labels, energy_of(energy, labels)

"""Shared toys and reference helpers for the test suite.

The three canonical toy datasets are pinned here (sizes, seeds, and
hardness) so the unit tests and the acceptance suite exercise identical
problems. Reference helpers are deliberately independent of the code paths
they check: grid search for line searches, bitmask enumeration for cuts,
vectorized exhaustive enumeration for chain labelings.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import settings

import structsvm as ss

settings.register_profile("ci", derandomize=True, max_examples=50)
settings.load_profile("ci")


# --- canonical toys --------------------------------------------------------


def multiclass_toy() -> ss.Dataset:
    """n=20, K=3, d=6; separable enough to reach tiny duality gaps fast."""
    return ss.generate_multiclass(20, 3, 2, seed=5)


def tiny_multiclass_toy() -> ss.Dataset:
    """n=3 problem whose dual optimum sits at a vertex, so the whole-plane
    solver terminates exactly (checked when the toy was pinned)."""
    return ss.generate_multiclass(3, 3, 2, seed=8, scale=2.0)


TINY_MULTICLASS_LAMBDA = 1.0


def chain_toy() -> ss.Dataset:
    """n=30 chains of length 5 with K=3 labels (d=15)."""
    return ss.generate_chain(30, 5, 3, unary_dim=2, seed=11)


def potts_toy() -> ss.Dataset:
    """n=15 noisy 4x4 grids; hard enough that cached planes stay useful for
    many passes."""
    return ss.generate_binary_potts(15, 4, 4, seed=12, scale=1.0, noise=2.0)


@pytest.fixture(scope="session")
def toys() -> dict[str, ss.Dataset]:
    return {"multiclass": multiclass_toy(), "chain": chain_toy(), "binary-potts": potts_toy()}


# --- simulated clock -------------------------------------------------------


class FakeClock:
    """Deterministic clock advanced explicitly (e.g., from observer events)."""

    def __init__(self) -> None:
        self.now = 0.0

    def __call__(self) -> float:
        return self.now

    def advance(self, dt: float) -> None:
        self.now += dt


def charging_observer(clock: FakeClock, exact_cost: float, approx_cost: float):
    """Observer that charges simulated time per oracle-type event."""

    def observe(event: ss.TrainEvent) -> None:
        if event.kind == "exact_call":
            clock.advance(exact_cost)
        elif event.kind == "approx_update":
            clock.advance(approx_cost)

    return observe


# --- reference implementations --------------------------------------------


def grid_best_bound(old: ss.Plane, new: ss.Plane, aggregate: ss.Plane, lam: float,
                    points: int = 10_001) -> float:
    """Best dual bound over a uniform gamma grid on [0, 1] (vectorized)."""
    gammas = np.linspace(0.0, 1.0, points)
    diff_star = new.star - old.star
    diff_offset = new.offset - old.offset
    stars = aggregate.star[None, :] + gammas[:, None] * diff_star[None, :]
    offsets = aggregate.offset + gammas * diff_offset
    return float(np.max(-np.einsum("ij,ij->i", stars, stars) / (2.0 * lam) + offsets))


def bound_after_step(old: ss.Plane, new: ss.Plane, aggregate: ss.Plane, lam: float,
                     gamma: float) -> float:
    moved = ss.Plane(
        aggregate.star + gamma * (new.star - old.star),
        aggregate.offset + gamma * (new.offset - old.offset),
    )
    return ss.dual_bound(moved, lam)


def cut_capacity(net: ss.FlowNetwork, source_side: np.ndarray) -> float:
    """Capacity of the cut induced by a source-side indicator over non-terminals."""
    in_source = np.zeros(net.node_count + 2, dtype=bool)
    in_source[: net.node_count] = source_side
    in_source[net.source] = True
    total = 0.0
    for tail, head, capacity in net.arcs():
        if in_source[tail] and not in_source[head]:
            total += capacity
    return total


def brute_force_min_cut(net: ss.FlowNetwork) -> float:
    """Minimum cut capacity by enumerating all 2^L partitions (vectorized)."""
    count = net.node_count
    masks = np.arange(2**count, dtype=np.int64)
    side = np.zeros((2**count, count + 2), dtype=bool)
    for node in range(count):
        side[:, node] = (masks >> node) & 1
    side[:, net.source] = True
    totals = np.zeros(2**count)
    for tail, head, capacity in net.arcs():
        totals += capacity * (side[:, tail] & ~side[:, head])
    return float(totals.min())


def exhaustive_chain_argmax(task: ss.ChainTask, instance: ss.TaskInstance,
                            w: np.ndarray, n: int) -> tuple[tuple[int, ...], float]:
    """Exhaustive enumeration of all K^L labelings, vectorized over sequences.

    Returns the first maximizer in lexicographic order and its oracle value,
    recomputed through the shared plane assembly so agreement checks against
    the dynamic-programming oracle are exact.
    """
    k, ud = task.num_labels, task.unary_dim
    length = instance.features.shape[0]
    truth = np.asarray(instance.truth)
    w_unary = w[: k * ud].reshape(k, ud)
    w_pair = w[k * ud :].reshape(k, k)
    node = instance.features @ w_unary.T
    node = node + (np.arange(k)[None, :] != truth[:, None]) / length
    seqs = np.indices((k,) * length).reshape(length, -1).T  # lexicographic rows
    totals = np.zeros(seqs.shape[0])
    for pos in range(length):
        totals += node[pos, seqs[:, pos]]
    if length > 1:
        totals += w_pair[seqs[:, :-1], seqs[:, 1:]].sum(axis=1)
    label = tuple(int(v) for v in seqs[int(np.argmax(totals))])
    value = ss.plane_for_label(task, instance, label, n).value_at(w)
    return label, value


def exhaustive_potts_argmax(task: ss.BinaryPottsTask, instance: ss.TaskInstance,
                            w: np.ndarray, n: int) -> tuple[tuple[int, ...], float]:
    """Exhaustive enumeration of all 2^L labelings through the plane assembly."""
    best_label, best_value = None, -np.inf
    length = instance.features.shape[0]
    for label in itertools.product((0, 1), repeat=length):
        value = ss.plane_for_label(task, instance, label, n).value_at(w)
        if value > best_value:
            best_label, best_value = label, value
    return best_label, best_value


def random_plane(rng: np.random.Generator, dim: int, scale: float = 2.0) -> ss.Plane:
    return ss.Plane(scale * rng.standard_normal(dim), scale * float(rng.standard_normal()))


def random_flow_network(rng: np.random.Generator, max_nodes: int = 12) -> ss.FlowNetwork:
    """Random small network with terminal arcs and internal arcs."""
    count = int(rng.integers(2, max_nodes + 1))
    net = ss.FlowNetwork(count)
    for node in range(count):
        if rng.random() < 0.8:
            net.add_arc(net.source, node, float(rng.random() * 4.0))
        if rng.random() < 0.8:
            net.add_arc(node, net.sink, float(rng.random() * 4.0))
    internal = int(rng.integers(0, 2 * count + 1))
    for _ in range(internal):
        tail, head = rng.integers(0, count, size=2)
        if tail != head:
            net.add_arc(int(tail), int(head), float(rng.random() * 4.0))
    return net

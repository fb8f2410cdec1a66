"""Training loop for the dual solvers.

Three algorithms share one code path: the classical whole-plane method
("fw"), its block-coordinate variant ("bcfw"), and the multi-plane
extension ("mp-bcfw") that caches oracle planes per example and interleaves
cheap approximate passes over the caches with the expensive exact passes.
The block-coordinate variant is the multi-plane loop with caching and
approximate passes disabled, which makes the reduction between the two
exact by construction. The "-avg" variants additionally maintain weighted
averages of the aggregate plane and extract the best interpolation of the
exact-call and approximate-call averages.

Every block update performs a closed-form line search on the dual bound, so
the bound is non-decreasing across the entire run, pass by pass and update
by update. An injected clock drives all timing (the approximate-pass
scheduling and the trace timestamps), which lets tests simulate oracle
cost deterministically.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from . import autotune
from .autotune import IterationProgress
from .oracles import OracleResult, Task, TaskInstance, max_oracle
from .planes import DualState, Plane, dual_bound, line_search_gamma, weights_of
from .trace import TraceRecord

__all__ = [
    "ALGORITHMS",
    "AveragingState",
    "CachedPlane",
    "PLANE_MATCH_TOL",
    "SolverConfig",
    "TrainEvent",
    "TrainResult",
    "WorkingSet",
    "bcfw_exact_pass",
    "error_rate",
    "fw_iteration",
    "mpbcfw_approx_pass",
    "primal_objective",
    "train",
]

ALGORITHMS = ("fw", "bcfw", "bcfw-avg", "mp-bcfw", "mp-bcfw-avg")

# Oracle planes this close (component-wise) to a cached one refresh its
# activity stamp instead of being stored as duplicates.
PLANE_MATCH_TOL = 1e-12


@dataclass(eq=False)
class CachedPlane:
    plane: Plane
    inserted: int
    last_active: int


class WorkingSet:
    """Bounded per-example cache of oracle planes with activity stamps.

    Capacity 0 keeps the set permanently empty. When an insertion exceeds
    the capacity, the longest inactive plane is evicted (oldest insertion
    breaks ties). Stamps are outer-iteration indices.
    """

    def __init__(self, capacity: int) -> None:
        if capacity < 0:
            raise ValueError("working-set capacity must be non-negative")
        self.capacity = int(capacity)
        self.entries: list[CachedPlane] = []

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, plane: Plane, stamp: int) -> None:
        """Insert an oracle plane, deduplicating against cached ones."""
        if self.capacity == 0:
            return
        for entry in self.entries:
            if entry.plane.close_to(plane, PLANE_MATCH_TOL):
                entry.last_active = stamp
                return
        self.entries.append(CachedPlane(plane, stamp, stamp))
        if len(self.entries) > self.capacity:
            victim = min(
                range(len(self.entries)),
                key=lambda j: (self.entries[j].last_active, self.entries[j].inserted, j),
            )
            del self.entries[victim]

    def best(self, w: np.ndarray, stamp: int) -> Plane | None:
        """Highest-scoring cached plane at ``w``; refreshes its activity stamp."""
        if not self.entries:
            return None
        best_j = 0
        best_value = self.entries[0].plane.value_at(w)
        for j in range(1, len(self.entries)):
            value = self.entries[j].plane.value_at(w)
            if value > best_value:
                best_j, best_value = j, value
        entry = self.entries[best_j]
        entry.last_active = stamp
        return entry.plane

    def evict_stale(self, stamp: int, horizon: int) -> None:
        """Drop planes that were last active more than ``horizon`` iterations ago."""
        self.entries = [e for e in self.entries if stamp - e.last_active <= horizon]


class AveragingState:
    """Triangularly weighted running averages of the aggregate plane.

    The k-th average weights the t-th iterate proportionally to t. It is
    maintained incrementally: the (k+1)-th average interpolates the k-th
    with the new iterate at step 2/(k+2). Exact-call and approximate-call
    iterates are averaged separately because the two call types progress at
    very different rates; extraction interpolates between the two averages
    at the point of best dual bound.
    """

    def __init__(self) -> None:
        self.avg_exact: Plane | None = None
        self.count_exact = 0
        self.avg_approx: Plane | None = None
        self.count_approx = 0

    def update(self, aggregate: Plane, which: str) -> None:
        if which == "exact":
            self.avg_exact = self._step(self.avg_exact, self.count_exact, aggregate)
            self.count_exact += 1
        elif which == "approx":
            self.avg_approx = self._step(self.avg_approx, self.count_approx, aggregate)
            self.count_approx += 1
        else:
            raise ValueError(f"unknown average kind {which!r}")

    def best(self, lam: float) -> Plane:
        """Interpolation of the two averages maximizing the dual bound."""
        if self.avg_exact is None and self.avg_approx is None:
            raise RuntimeError("no averaged iterates have been recorded")
        if self.avg_exact is None:
            return self.avg_approx
        if self.avg_approx is None:
            return self.avg_exact
        gamma = line_search_gamma(self.avg_exact, self.avg_approx, self.avg_exact, lam)
        return self.avg_exact.interpolate(self.avg_approx, gamma)

    @staticmethod
    def _step(current: Plane | None, count: int, iterate: Plane) -> Plane:
        if current is None:
            return iterate
        return current.interpolate(iterate, 2.0 / (count + 2.0))


@dataclass
class SolverConfig:
    """Training configuration; ``lam=None`` selects 1/n.

    ``cache_size``, ``max_approx_passes``, and ``inactivity`` only affect
    the multi-plane algorithms. ``approx_policy`` is either "auto" (the
    slope rule) or "fixed:K" (exactly min(K, max_approx_passes) approximate
    passes per iteration, unconditionally). At least one stopping criterion
    (``max_passes``, ``gap_tol``, ``time_budget_ms``) must be set.
    """

    algorithm: str = "bcfw"
    lam: float | None = None
    cache_size: int = 1000
    max_approx_passes: int = 1000
    inactivity: int = 10
    approx_policy: str = "auto"
    seed: int = 0
    max_passes: int | None = None
    gap_tol: float | None = None
    time_budget_ms: float | None = None
    primal_every: int = 1

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.lam is not None and not self.lam > 0:
            raise ValueError("lambda must be positive")
        if self.cache_size < 0:
            raise ValueError("cache size must be non-negative")
        if self.max_approx_passes < 0:
            raise ValueError("max approximate passes must be non-negative")
        if self.inactivity < 1:
            raise ValueError("inactivity horizon must be at least 1")
        if self.fixed_approx_passes() is None and self.approx_policy != "auto":
            raise ValueError(
                f"approx policy must be 'auto' or 'fixed:K', got {self.approx_policy!r}"
            )
        if self.max_passes is None and self.gap_tol is None and self.time_budget_ms is None:
            raise ValueError(
                "at least one stopping criterion required: max_passes, gap_tol, or time_budget_ms"
            )
        if self.max_passes is not None and self.max_passes < 1:
            raise ValueError("max passes must be at least 1")
        if self.primal_every < 0:
            raise ValueError("primal cadence must be non-negative")
        if self.gap_tol is not None and self.primal_every == 0:
            raise ValueError("gap-tolerance stopping needs primal evaluation (primal_every >= 1)")

    def fixed_approx_passes(self) -> int | None:
        """K from "fixed:K", or None under the automatic policy."""
        if self.approx_policy == "auto":
            return None
        prefix, _, count = self.approx_policy.partition(":")
        if prefix == "fixed" and count.isdigit():
            return int(count)
        return None


@dataclass(eq=False)
class TrainEvent:
    """Observer payload emitted by :func:`train`.

    Kinds: "exact_call" and "approx_update" after each block update (these
    are the points where a simulated clock charges oracle cost),
    "primal_call" per oracle call of a primal evaluation, and "pass_end" /
    "iteration_end" for bookkeeping snapshots.
    """

    kind: str
    iteration: int
    index: int | None = None
    pass_kind: str | None = None
    label: Any = None
    gamma: float | None = None
    dual: float | None = None
    working_sets: list[WorkingSet] | None = None


Observer = Callable[[TrainEvent], None]


@dataclass(eq=False)
class TrainResult:
    """Outcome of a training run.

    ``weights`` comes from the extraction plane: the raw aggregate for the
    plain variants, the best interpolation of the iterate averages for the
    "-avg" variants. ``dual``/``primal``/``gap`` are evaluated on that same
    extraction. ``state``, ``working_sets``, and ``averages`` expose the
    final solver internals for inspection.
    """

    weights: np.ndarray
    trace: list[TraceRecord]
    dual: float
    primal: float | None
    gap: float | None
    algorithm: str
    lam: float
    seed: int
    exact_calls: int
    approx_calls: int
    primal_calls: int
    extraction: Plane
    state: DualState | None = None
    working_sets: list[WorkingSet] | None = None
    averages: AveragingState | None = None


def primal_objective(task: Task, instances: Sequence[TaskInstance], w: np.ndarray, lam: float) -> float:
    """Regularized training objective: ``lam/2 ||w||^2 + sum_i H_i(w)``.

    Each hinge term is evaluated with the exact oracle, so the result upper
    bounds the optimum and, combined with the dual bound, certifies
    suboptimality.
    """
    n = len(instances)
    hinge = sum(max_oracle(task, inst, w, n).value for inst in instances)
    return 0.5 * lam * float(w @ w) + hinge


def error_rate(task: Task, instances: Sequence[TaskInstance], w: np.ndarray) -> float:
    """Mean task loss of the plain (non loss-augmented) predictions."""
    losses = [task.loss(inst.truth, task.predict(inst, w)) for inst in instances]
    return float(np.mean(losses))


def fw_iteration(
    phi: Plane,
    task: Task,
    instances: Sequence[TaskInstance],
    lam: float,
    on_call: Callable[[int, OracleResult], None] | None = None,
) -> tuple[Plane, float, list[OracleResult]]:
    """One whole-plane iteration: n oracle calls at fixed weights, then a
    single line-searched interpolation of the aggregated oracle plane.

    Returns the new plane, the step size, and the oracle results.
    """
    n = len(instances)
    w = weights_of(phi, lam)
    results = []
    hat_star = np.zeros(phi.dim)
    hat_offset = 0.0
    for i, instance in enumerate(instances):
        res = max_oracle(task, instance, w, n)
        results.append(res)
        hat_star += res.plane.star
        hat_offset += res.plane.offset
        if on_call is not None:
            on_call(i, res)
    hat = Plane(hat_star, hat_offset)
    gamma = line_search_gamma(phi, hat, phi, lam)
    return phi.interpolate(hat, gamma), gamma, results


def bcfw_exact_pass(
    state: DualState,
    task: Task,
    instances: Sequence[TaskInstance],
    order: Sequence[int],
    working_sets: list[WorkingSet] | None = None,
    stamp: int = 0,
    averages: AveragingState | None = None,
    on_update: Callable[[int, OracleResult, float], None] | None = None,
) -> list[OracleResult]:
    """One exact pass: per block, oracle call at the current weights, line
    search, and incremental update. With working sets supplied, each block's
    oracle plane is cached (deduplicated, capacity enforced)."""
    n = len(instances)
    results = []
    for i in order:
        i = int(i)
        w = state.weights()
        res = max_oracle(task, instances[i], w, n)
        gamma = line_search_gamma(state.block(i), res.plane, state.aggregate, state.lam)
        state.apply_block_update(i, res.plane, gamma)
        if working_sets is not None:
            working_sets[i].add(res.plane, stamp)
        if averages is not None:
            averages.update(state.aggregate, "exact")
        results.append(res)
        if on_update is not None:
            on_update(i, res, gamma)
    return results


def mpbcfw_approx_pass(
    state: DualState,
    working_sets: list[WorkingSet],
    order: Sequence[int],
    stamp: int,
    horizon: int,
    averages: AveragingState | None = None,
    on_update: Callable[[int, Plane, float], None] | None = None,
) -> tuple[float, int]:
    """One approximate pass: per block, the best cached plane stands in for
    the oracle. Blocks with empty working sets are skipped at zero cost;
    winners get their activity stamp refreshed and stale planes are evicted.

    Returns the dual-bound gain of the pass and the number of block updates
    performed. The gain is never negative up to rounding, since every block
    update is line-searched.
    """
    start_bound = state.dual_bound()
    updates = 0
    for i in order:
        i = int(i)
        ws = working_sets[i]
        if not len(ws):
            continue
        w = state.weights()
        candidate = ws.best(w, stamp)
        gamma = line_search_gamma(state.block(i), candidate, state.aggregate, state.lam)
        state.apply_block_update(i, candidate, gamma)
        ws.evict_stale(stamp, horizon)
        if averages is not None:
            averages.update(state.aggregate, "approx")
        updates += 1
        if on_update is not None:
            on_update(i, candidate, gamma)
    return state.dual_bound() - start_bound, updates


def train(
    dataset,
    config: SolverConfig,
    clock: Callable[[], float] | None = None,
    observer: Observer | None = None,
) -> TrainResult:
    """Train on a dataset (anything exposing ``task`` and ``instances``).

    Runs outer iterations until a stopping criterion fires. For the
    multi-plane algorithms each iteration is one exact pass followed by up
    to ``max_approx_passes`` approximate passes, scheduled by the slope rule
    or a fixed count. Emits one trace record per pass; the primal objective
    is evaluated once per ``primal_every`` iterations with oracle calls
    charged to a separate counter.
    """
    config.validate()
    task, instances = dataset.task, list(dataset.instances)
    n = len(instances)
    if n == 0:
        raise ValueError("dataset is empty")
    lam = config.lam if config.lam is not None else 1.0 / n
    clock = clock or time.monotonic
    rng = np.random.default_rng(config.seed)
    emit = observer or (lambda event: None)

    if config.algorithm == "fw":
        return _train_fw(task, instances, lam, config, clock, emit)

    multiplane = config.algorithm.startswith("mp-")
    averaging = config.algorithm.endswith("-avg")
    cache_size = config.cache_size if multiplane else 0
    max_approx = config.max_approx_passes if multiplane else 0
    fixed_passes = config.fixed_approx_passes()

    state = DualState(n, task.dim, lam)
    working_sets = [WorkingSet(cache_size) for _ in range(n)]
    if cache_size > 0:
        for ws in working_sets:
            ws.add(Plane.zero(task.dim), 0)
    averages = AveragingState() if averaging else None

    trace: list[TraceRecord] = []
    counters = {"exact": 0, "approx": 0, "primal": 0}
    start_time = clock()

    def elapsed_ms() -> float:
        return (clock() - start_time) * 1000.0

    def mean_ws_size() -> float:
        return float(np.mean([len(ws) for ws in working_sets]))

    def record_pass(iteration: int, pass_kind: str, approx_passes: int) -> TraceRecord:
        record = TraceRecord(
            iteration=iteration,
            pass_kind=pass_kind,
            exact_calls=counters["exact"],
            approx_calls=counters["approx"],
            elapsed_ms=elapsed_ms(),
            dual=state.dual_bound(),
            mean_ws_size=mean_ws_size(),
            approx_passes_this_iter=approx_passes,
        )
        if averages is not None:
            record.dual_avg = dual_bound(averages.best(lam), lam)
        trace.append(record)
        return record

    def evaluate_primal(iteration: int, w: np.ndarray) -> float:
        total = 0.0
        for i, instance in enumerate(instances):
            total += max_oracle(task, instance, w, n).value
            counters["primal"] += 1
            emit(TrainEvent("primal_call", iteration, index=i))
        return 0.5 * lam * float(w @ w) + total

    def out_of_time() -> bool:
        return config.time_budget_ms is not None and elapsed_ms() >= config.time_budget_ms

    iteration = 0
    stop = False
    while not stop:
        iteration += 1
        iter_start_time = clock()
        iter_start_bound = state.dual_bound()

        def on_exact(i: int, res: OracleResult, gamma: float) -> None:
            counters["exact"] += 1
            emit(
                TrainEvent(
                    "exact_call",
                    iteration,
                    index=i,
                    pass_kind="exact",
                    label=res.label,
                    gamma=gamma,
                    dual=state.dual_bound(),
                )
            )

        bcfw_exact_pass(
            state,
            task,
            instances,
            rng.permutation(n),
            working_sets=working_sets if cache_size > 0 else None,
            stamp=iteration,
            averages=averages,
            on_update=on_exact,
        )
        record_pass(iteration, "exact", 0)
        emit(
            TrainEvent(
                "pass_end",
                iteration,
                pass_kind="exact",
                dual=state.dual_bound(),
                working_sets=working_sets,
            )
        )

        def on_approx(i: int, plane: Plane, gamma: float) -> None:
            counters["approx"] += 1
            emit(
                TrainEvent(
                    "approx_update",
                    iteration,
                    index=i,
                    pass_kind="approx",
                    gamma=gamma,
                    dual=state.dual_bound(),
                )
            )

        passes_done = 0
        last_gain = 0.0
        last_duration = 0.0
        while passes_done < max_approx and not out_of_time():
            if fixed_passes is not None:
                if passes_done >= fixed_passes:
                    break
            else:
                if not any(len(ws) for ws in working_sets):
                    break
                progress = IterationProgress(
                    iter_start_bound=iter_start_bound,
                    iter_start_time=iter_start_time,
                    last_pass_gain=last_gain,
                    last_pass_duration=last_duration,
                    approx_passes_done=passes_done,
                )
                if not autotune.should_continue_approx(progress, clock(), state.dual_bound()):
                    break
            pass_start = clock()
            last_gain, _ = mpbcfw_approx_pass(
                state,
                working_sets,
                rng.permutation(n),
                iteration,
                config.inactivity,
                averages=averages,
                on_update=on_approx,
            )
            last_duration = clock() - pass_start
            passes_done += 1
            record_pass(iteration, "approx", passes_done)
            emit(
                TrainEvent(
                    "pass_end",
                    iteration,
                    pass_kind="approx",
                    dual=state.dual_bound(),
                    working_sets=working_sets,
                )
            )

        # Staleness is defined against outer iterations, so the sweep must
        # run even when no approximate pass did.
        for ws in working_sets:
            ws.evict_stale(iteration, config.inactivity)

        gap = None
        if config.primal_every and iteration % config.primal_every == 0:
            primal = evaluate_primal(iteration, state.weights())
            gap = primal - state.dual_bound()
            last = trace[-1]
            last.primal = primal
            last.gap = gap
            if averages is not None:
                extraction = averages.best(lam)
                last.primal_avg = evaluate_primal(iteration, weights_of(extraction, lam))
                last.gap_avg = last.primal_avg - dual_bound(extraction, lam)

        emit(
            TrainEvent(
                "iteration_end",
                iteration,
                dual=state.dual_bound(),
                working_sets=working_sets,
            )
        )

        if config.gap_tol is not None and gap is not None and gap <= config.gap_tol:
            stop = True
        if config.max_passes is not None and iteration >= config.max_passes:
            stop = True
        if out_of_time():
            stop = True

    extraction = averages.best(lam) if averages is not None else state.aggregate
    final_weights = weights_of(extraction, lam)
    final_dual = dual_bound(extraction, lam)
    final_primal = None
    final_gap = None
    if config.primal_every:
        # Nothing moves after the last pass, so a primal evaluated at the end
        # of the final iteration is still current.
        last = trace[-1] if trace else None
        if averages is None and last is not None and last.primal is not None:
            final_primal = last.primal
        elif averages is not None and last is not None and last.primal_avg is not None:
            final_primal = last.primal_avg
        else:
            final_primal = primal_objective(task, instances, final_weights, lam)
            counters["primal"] += n
        final_gap = final_primal - final_dual
    return TrainResult(
        weights=final_weights,
        trace=trace,
        dual=final_dual,
        primal=final_primal,
        gap=final_gap,
        algorithm=config.algorithm,
        lam=lam,
        seed=config.seed,
        exact_calls=counters["exact"],
        approx_calls=counters["approx"],
        primal_calls=counters["primal"],
        extraction=extraction,
        state=state,
        working_sets=working_sets,
        averages=averages,
    )


def _train_fw(
    task: Task,
    instances: Sequence[TaskInstance],
    lam: float,
    config: SolverConfig,
    clock: Callable[[], float],
    emit: Observer,
) -> TrainResult:
    n = len(instances)
    phi = Plane.zero(task.dim)
    trace: list[TraceRecord] = []
    counters = {"exact": 0, "approx": 0, "primal": 0}
    start_time = clock()

    def elapsed_ms() -> float:
        return (clock() - start_time) * 1000.0

    iteration = 0
    stop = False
    while not stop:
        iteration += 1

        def on_call(i: int, res: OracleResult) -> None:
            counters["exact"] += 1
            emit(
                TrainEvent(
                    "exact_call",
                    iteration,
                    index=i,
                    pass_kind="exact",
                    label=res.label,
                    dual=dual_bound(phi, lam),
                )
            )

        phi, gamma, _ = fw_iteration(phi, task, instances, lam, on_call=on_call)
        record = TraceRecord(
            iteration=iteration,
            pass_kind="exact",
            exact_calls=counters["exact"],
            approx_calls=0,
            elapsed_ms=elapsed_ms(),
            dual=dual_bound(phi, lam),
        )
        trace.append(record)
        emit(TrainEvent("pass_end", iteration, pass_kind="exact", dual=record.dual))

        gap = None
        if config.primal_every and iteration % config.primal_every == 0:
            w = weights_of(phi, lam)
            primal = 0.0
            for i, instance in enumerate(instances):
                primal += max_oracle(task, instance, w, n).value
                counters["primal"] += 1
                emit(TrainEvent("primal_call", iteration, index=i))
            primal += 0.5 * lam * float(w @ w)
            gap = primal - record.dual
            record.primal = primal
            record.gap = gap

        emit(TrainEvent("iteration_end", iteration, dual=record.dual))

        if config.gap_tol is not None and gap is not None and gap <= config.gap_tol:
            stop = True
        if config.max_passes is not None and iteration >= config.max_passes:
            stop = True
        if config.time_budget_ms is not None and elapsed_ms() >= config.time_budget_ms:
            stop = True

    final_weights = weights_of(phi, lam)
    final_dual = dual_bound(phi, lam)
    final_primal = None
    final_gap = None
    if config.primal_every:
        last = trace[-1] if trace else None
        if last is not None and last.primal is not None:
            final_primal = last.primal
        else:
            final_primal = primal_objective(task, instances, final_weights, lam)
            counters["primal"] += n
        final_gap = final_primal - final_dual
    return TrainResult(
        weights=final_weights,
        trace=trace,
        dual=final_dual,
        primal=final_primal,
        gap=final_gap,
        algorithm="fw",
        lam=lam,
        seed=config.seed,
        exact_calls=counters["exact"],
        approx_calls=0,
        primal_calls=counters["primal"],
        extraction=phi,
    )

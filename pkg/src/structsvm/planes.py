"""Plane arithmetic shared by the dual solvers.

A plane is a vector in R^(d+1), split into a d-dimensional ``star`` part
acting on the weight vector and a scalar ``offset``. It represents the
linear function ``w -> <star, w> + offset``, which the solvers use as a
lower bound on one structured hinge-loss term. The sum of all per-example
planes yields a closed-form lower bound on the full training objective
(the dual bound), and every solver update is a line search along the
interpolation between two planes, chosen to maximize that bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEGENERATE_DENOM",
    "DualState",
    "Plane",
    "dual_bound",
    "line_search_gamma",
    "weights_of",
]

# Below this squared segment length the line search is over a single point
# (up to noise) and gamma = 0 is returned so the state is left untouched.
DEGENERATE_DENOM = 1e-30


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not lam > 0.0:
        raise ValueError(f"regularization constant must be positive, got {lam}")
    return lam


@dataclass(frozen=True, eq=False)
class Plane:
    """Immutable (star, offset) pair; the currency of the dual solvers."""

    star: np.ndarray
    offset: float

    def __post_init__(self) -> None:
        star = np.array(self.star, dtype=np.float64)  # always copy: planes are shared
        if star.ndim != 1:
            raise ValueError(f"star part must be a vector, got shape {star.shape}")
        offset = float(self.offset)
        if not (np.isfinite(star).all() and np.isfinite(offset)):
            raise ValueError("plane components must be finite")
        star.flags.writeable = False
        object.__setattr__(self, "star", star)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def zero(cls, dim: int) -> "Plane":
        return cls(np.zeros(dim), 0.0)

    @property
    def dim(self) -> int:
        return int(self.star.shape[0])

    def value_at(self, w: np.ndarray) -> float:
        """Evaluate ``<star, w> + offset``."""
        return float(self.star @ w) + self.offset

    def interpolate(self, other: "Plane", gamma: float) -> "Plane":
        """Convex combination ``(1 - gamma) * self + gamma * other``."""
        return Plane(
            (1.0 - gamma) * self.star + gamma * other.star,
            (1.0 - gamma) * self.offset + gamma * other.offset,
        )

    def close_to(self, other: "Plane", tol: float = 1e-12) -> bool:
        """Component-wise agreement within absolute tolerance ``tol``."""
        return (
            self.star.shape == other.star.shape
            and abs(self.offset - other.offset) <= tol
            and bool(np.all(np.abs(self.star - other.star) <= tol))
        )

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Plane(star={self.star!r}, offset={self.offset!r})"


def dual_bound(plane: Plane, lam: float) -> float:
    """Lower bound on the primal objective induced by a feasible plane.

    For a plane that lower-bounds the summed hinge losses, minimizing
    ``lam/2 ||w||^2 + <plane, [w 1]>`` over w has the closed form
    ``-||star||^2 / (2 lam) + offset``.
    """
    lam = _check_lambda(lam)
    return -float(plane.star @ plane.star) / (2.0 * lam) + plane.offset


def weights_of(plane: Plane, lam: float) -> np.ndarray:
    """Weight vector minimizing ``lam/2 ||w||^2 + <plane, [w 1]>``: ``-star / lam``."""
    lam = _check_lambda(lam)
    return -plane.star / lam


def line_search_gamma(old: Plane, new: Plane, aggregate: Plane, lam: float) -> float:
    """Step size in [0, 1] maximizing the dual bound along a block interpolation.

    Replacing the block plane ``old`` by ``(1-gamma)*old + gamma*new`` moves
    the aggregate to ``aggregate + gamma*(new - old)``. The dual bound is a
    concave quadratic in gamma with maximizer

        (<old.star - new.star, aggregate.star> - lam*(old.offset - new.offset))
        / ||old.star - new.star||^2

    clipped to [0, 1]. The whole-plane update of the non-block solver is the
    special case ``aggregate is old``. A degenerate segment (star parts equal
    within noise) returns 0 so the state is not perturbed.
    """
    lam = _check_lambda(lam)
    diff = old.star - new.star
    denom = float(diff @ diff)
    if denom < DEGENERATE_DENOM:
        return 0.0
    numer = float(diff @ aggregate.star) - lam * (old.offset - new.offset)
    return min(1.0, max(0.0, numer / denom))


class DualState:
    """Per-example planes, their aggregate, and the regularization constant.

    The aggregate is maintained incrementally as blocks change and re-summed
    from scratch every ``n`` block updates, which caps floating-point drift
    at an amortized cost of O(d) per update instead of O(n d).
    """

    def __init__(self, n: int, dim: int, lam: float) -> None:
        if n < 1:
            raise ValueError("need at least one example block")
        if dim < 1:
            raise ValueError("model dimension must be positive")
        self.n = int(n)
        self.dim = int(dim)
        self.lam = _check_lambda(lam)
        self._block_star = np.zeros((self.n, self.dim))
        self._block_offset = np.zeros(self.n)
        self._agg_star = np.zeros(self.dim)
        self._agg_offset = 0.0
        self._updates_since_resum = 0

    def block(self, i: int) -> Plane:
        self._check_index(i)
        return Plane(self._block_star[i], self._block_offset[i])

    @property
    def aggregate(self) -> Plane:
        return Plane(self._agg_star, self._agg_offset)

    def weights(self) -> np.ndarray:
        """Current model weights ``-aggregate.star / lam``."""
        return -self._agg_star / self.lam

    def dual_bound(self) -> float:
        return -float(self._agg_star @ self._agg_star) / (2.0 * self.lam) + self._agg_offset

    def apply_block_update(self, i: int, new_block: Plane, gamma: float) -> None:
        """Replace block i by ``(1-gamma)*block + gamma*new_block`` incrementally."""
        self._check_index(i)
        if not 0.0 <= gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
        if new_block.dim != self.dim:
            raise ValueError(
                f"block dimension mismatch: state has d={self.dim}, plane has d={new_block.dim}"
            )
        delta_star = gamma * (new_block.star - self._block_star[i])
        delta_offset = gamma * (new_block.offset - self._block_offset[i])
        self._block_star[i] += delta_star
        self._block_offset[i] += delta_offset
        self._agg_star += delta_star
        self._agg_offset += delta_offset
        self._updates_since_resum += 1
        if self._updates_since_resum >= self.n:
            self.resum()

    def resum(self) -> None:
        """Recompute the aggregate from the blocks, discarding accumulated drift."""
        self._agg_star = self._block_star.sum(axis=0)
        self._agg_offset = float(self._block_offset.sum())
        self._updates_since_resum = 0

    def resummed_aggregate(self) -> Plane:
        """Fresh sum of the blocks, without touching the incremental aggregate."""
        return Plane(self._block_star.sum(axis=0), float(self._block_offset.sum()))

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise ValueError(f"block index {i} out of range for n={self.n}")

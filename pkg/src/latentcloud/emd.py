"""Earth mover's distance between equal-size point clouds.

EMD here is the minimum total *unsquared* Euclidean distance over
bijections between the two point sets, i.e. a linear assignment problem.
``emd_exact`` solves it exactly (capped at EXACT_SIZE_CAP points);
``emd_approx`` runs an epsilon-scaling auction whose final cost is within
``n * epsilon`` of the optimum while always returning a valid bijection.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import CapacityError, ConvergenceError, DimensionError
from .validation import as_point_cloud

EXACT_SIZE_CAP = 512


@dataclass(frozen=True)
class Assignment:
    """A bijection a[i] -> b[permutation[i]] and its total distance."""

    permutation: np.ndarray
    cost: float

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=np.intp)
        object.__setattr__(self, "permutation", perm)
        n = perm.shape[0]
        if n < 1 or not np.array_equal(np.sort(perm), np.arange(n)):
            raise DimensionError("permutation is not a bijection")


def _cost_matrix(a, b):
    a = as_point_cloud(a, name="a")
    b = as_point_cloud(b, name="b")
    if a.shape[0] != b.shape[0]:
        raise DimensionError(
            f"clouds must have equal sizes, got {a.shape[0]} and {b.shape[0]}"
        )
    diffs = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diffs, diffs))


def emd_exact(a, b, size_cap=EXACT_SIZE_CAP):
    """Minimum-cost bijection, solved exactly as an assignment problem."""
    cost = _cost_matrix(a, b)
    n = cost.shape[0]
    if n > size_cap:
        raise CapacityError(
            f"{n} points exceeds the exact-solver cap of {size_cap}; use emd_approx"
        )
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(n, dtype=np.intp)
    perm[rows] = cols
    return Assignment(permutation=perm, cost=float(cost[rows, cols].sum()))


def emd_approx(a, b, epsilon, max_bids=None):
    """Epsilon-scaling auction assignment.

    The returned cost is >= the optimum and <= optimum + n * epsilon; the
    permutation is a valid bijection for any epsilon. Raises
    ConvergenceError (with the bid count) if the bid cap is exhausted,
    which for a finite epsilon only happens with a hostile cap.
    """
    if epsilon <= 0:
        raise DimensionError(f"epsilon must be positive, got {epsilon}")
    cost = _cost_matrix(a, b)
    n = cost.shape[0]
    if n == 1:
        return Assignment(permutation=np.zeros(1, dtype=np.intp), cost=float(cost[0, 0]))
    cost_range = float(cost.max() - cost.min())
    if cost_range == 0.0:
        # every bijection has identical cost; the identity is optimal
        return Assignment(
            permutation=np.arange(n, dtype=np.intp), cost=float(cost[0, 0] * n)
        )

    benefit = -cost
    prices = np.zeros(n)
    owner_of = np.full(n, -1, dtype=np.intp)  # object -> person
    assigned_to = np.full(n, -1, dtype=np.intp)  # person -> object

    if max_bids is None:
        # each winning bid raises a price by >= eps and prices are bounded
        # by the benefit range per scaling round; pad generously
        max_bids = int(16 * n * (cost_range / epsilon + n + 16))
    bids_used = 0

    eps = max(cost_range / n, epsilon)
    while True:
        owner_of.fill(-1)
        assigned_to.fill(-1)
        while True:
            unassigned = np.flatnonzero(assigned_to < 0)
            if unassigned.size == 0:
                break
            bids_used += int(unassigned.size)
            if bids_used > max_bids:
                raise ConvergenceError(
                    f"auction exceeded {max_bids} bids at eps={eps}",
                    iterations=bids_used,
                )
            values = benefit[unassigned] - prices
            best_j = np.argmax(values, axis=1)  # smallest object index on ties
            best_v = values[np.arange(unassigned.size), best_j]
            values[np.arange(unassigned.size), best_j] = -np.inf
            second_v = values.max(axis=1)
            bid_amounts = best_v - second_v + eps
            # one winner per contested object: highest bid, smallest person
            # index on ties (stable ordering below guarantees both)
            order = np.lexsort((unassigned, -bid_amounts))
            seen = set()
            for k in order:
                j = int(best_j[k])
                if j in seen:
                    continue
                seen.add(j)
                person = int(unassigned[k])
                prices[j] += float(bid_amounts[k])
                prev = owner_of[j]
                if prev >= 0:
                    assigned_to[prev] = -1
                owner_of[j] = person
                assigned_to[person] = j
        if eps <= epsilon:
            break
        eps = max(eps / 2.0, epsilon)

    total = float(cost[np.arange(n), assigned_to].sum())
    return Assignment(permutation=assigned_to.copy(), cost=total)

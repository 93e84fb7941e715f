"""EigenTrust baseline: interaction ledger, normalized local trust matrix,
global trust by power iteration, and greedy link selection on global trust.
"""

from __future__ import annotations

import numpy as np


class InteractionLedger:
    """Counts of satisfactory and unsatisfactory interactions between sensors.

    Entry (i, j) records node i's experience with node j's forwarding service,
    judged end to end: an interaction is satisfactory iff the packet
    ultimately reached a cluster head.
    """

    def __init__(self, node_ids: list[int]):
        self.node_ids = sorted(node_ids)
        self.index = {nid: k for k, nid in enumerate(self.node_ids)}
        n = len(self.node_ids)
        self.sat = np.zeros((n, n), dtype=np.int64)
        self.unsat = np.zeros((n, n), dtype=np.int64)

    def record(self, observer: int, subject: int, satisfactory: bool) -> None:
        i, j = self.index[observer], self.index[subject]
        if satisfactory:
            self.sat[i, j] += 1
        else:
            self.unsat[i, j] += 1

    def nonzero_entries_per_row(self) -> np.ndarray:
        return np.count_nonzero(self.sat + self.unsat, axis=1)


def local_trust_matrix(sat: np.ndarray, unsat: np.ndarray,
                       pretrust: np.ndarray | None = None) -> np.ndarray:
    """Row-normalized local trust: s = max(sat - unsat, 0), each row divided
    by its sum; rows that sum to zero fall back to the pre-trust distribution
    (uniform by default)."""
    s = np.maximum(sat - unsat, 0).astype(float)
    n = s.shape[0]
    if pretrust is None:
        pretrust = np.full(n, 1.0 / n)
    row_sums = s.sum(axis=1)
    c = np.empty_like(s)
    for i in range(n):
        if row_sums[i] > 0:
            c[i] = s[i] / row_sums[i]
        else:
            c[i] = pretrust
    return c


def compute_global_trust(c: np.ndarray, epsilon: float = 1e-10,
                         max_iters: int = 1000) -> tuple[np.ndarray, bool]:
    """Principal left eigenvector of the local trust matrix by power
    iteration from the uniform vector, renormalized to sum 1 every step.

    Returns (trust vector, converged). Stops when the max-norm change drops
    below epsilon; hitting max_iters returns the last iterate with
    converged=False.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    n = c.shape[0]
    t = np.full(n, 1.0 / n)
    ct = c.T
    for _ in range(max_iters):
        nxt = ct @ t
        total = nxt.sum()
        if total > 0:
            nxt = nxt / total
        if np.max(np.abs(nxt - t)) < epsilon:
            return nxt, True
        t = nxt
    return t, False


def eigentrust_select_link(candidates: list[int],
                           trust: dict[int, float]) -> int | None:
    """Next hop under EigenTrust: the highest-global-trust candidate, ties
    broken by the lower node id. Candidates must already be filtered to
    neighbors no farther from the head than the selector."""
    if not candidates:
        return None
    return max(sorted(candidates), key=lambda nid: (trust.get(nid, 0.0), -nid))

"""Descendant generating profiles and their aggregate norms.

For a decay weight ``b`` in [0, 1) and a finite rooted tree, each vertex
carries the value delta(v) = sum_r |D_r(v)| b^r, the b-weighted count of
its descendants by generation.  Leaves have delta = 1 and internal
vertices satisfy

    delta(v) = 1 + b * sum of delta over the children of v,

so one bottom-up pass computes the whole profile.  The aggregate
Delta = ||delta||_2 over all vertices is the concentration constant used
throughout the verification checks.

Two independent routes to the ordered-pair sum S = sum b^d(w1,w2) over
V x V are provided: a naive BFS-per-source method (the test oracle) and a
closed form obtained by decomposing pairs by their meet, which telescopes
to S = (1 - b^2) * Delta^2 + b^2 * delta(root)^2.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from treeconc.tree import RootedTree, dary_vertex_count


def _check_b(b: float) -> float:
    b = float(b)
    if not 0.0 <= b < 1.0:
        raise ValueError(f"decay weight b must lie in [0, 1), got {b}")
    return b


@dataclass(frozen=True)
class DescendantProfile:
    """Per-vertex descendant series values and their l2 aggregate.

    delta_sq holds the exact sum of squares; big_delta is its root (kept
    separately so squared quantities never pay a double rounding)."""

    b: float
    delta: np.ndarray
    delta_sq: float

    @property
    def big_delta(self) -> float:
        return float(np.sqrt(self.delta_sq))


@dataclass(frozen=True)
class DeltaSeries:
    """Aggregate profile norms over the depth-k truncations of one tree.

    delta_sqs holds the exact sums of squares; deltas are their roots
    (kept separately so squared quantities never lose a rounding step).
    """

    ks: np.ndarray
    vertex_counts: np.ndarray
    delta_sqs: np.ndarray

    @property
    def deltas(self) -> np.ndarray:
        return np.sqrt(self.delta_sqs)

    @property
    def ratios(self) -> np.ndarray:
        """Delta_k^2 / |V_k|, the plotted growth-rate diagnostic."""
        return self.delta_sqs / self.vertex_counts


@dataclass(frozen=True)
class SandwichBounds:
    lower: float
    upper: float
    delta_sq: float


def delta_profile(tree: RootedTree, b: float) -> DescendantProfile:
    """Bottom-up evaluation of the descendant profile (single pass)."""
    b = _check_b(b)
    delta = np.ones(tree.n, dtype=np.float64)
    for d in range(tree.depth_max, 0, -1):
        lvl = tree.level(d)
        up = tree.level(d - 1)
        contrib = np.bincount(
            tree._level_rank[tree.parent[lvl]], weights=delta[lvl], minlength=up.size
        )
        delta[up] += b * contrib
    return DescendantProfile(b=b, delta=delta, delta_sq=float(np.sum(delta**2)))


def delta_via_operator(tree: RootedTree, b: float, k: int) -> np.ndarray:
    """Descendant profile of the depth-k truncation, written as the
    geometric operator sum applied to the indicator of the truncation.

    Returns the full-length vector sum_{j=0..k} (b Q)^j 1_{V_k}; its
    restriction to vertices of depth <= k equals the truncation's profile.
    """
    b = _check_b(b)
    if k < 0 or k > tree.depth_max:
        raise ValueError(f"truncation depth {k} outside [0, {tree.depth_max}]")
    indicator = (tree.depth <= k).astype(np.float64)
    acc = indicator.copy()
    cur = indicator
    for _ in range(k):
        cur = b * tree.child_sum(cur)
        acc += cur
    return acc


def distance_histogram(tree: RootedTree) -> np.ndarray:
    """hist[d] = number of ordered vertex pairs at graph distance d,
    by breadth-first search from every source (O(n^2))."""
    n = tree.n
    adj: list[list[int]] = [[] for _ in range(n)]
    for v in range(1, n):
        p = int(tree.parent[v])
        adj[v].append(p)
        adj[p].append(v)
    hist = np.zeros(2 * tree.depth_max + 1, dtype=np.int64)
    dist = np.empty(n, dtype=np.int64)
    for s in range(n):
        dist.fill(-1)
        dist[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            du = dist[u] + 1
            for w in adj[u]:
                if dist[w] < 0:
                    dist[w] = du
                    q.append(w)
        hist += np.bincount(dist, minlength=hist.size)
    return hist


def pair_distance_sum(tree: RootedTree, b: float, method: str = "fast") -> float:
    """Ordered-pair sum of b^distance over V x V (diagonal contributes n).

    method "naive" walks the tree from every source (the oracle);
    method "fast" uses the meet-decomposition closed form
    S = (1 - b^2) Delta^2 + b^2 delta(root)^2, exact and O(n).
    """
    b = _check_b(b)
    if method == "naive":
        hist = distance_histogram(tree)
        return float(np.sum(hist * np.power(b, np.arange(hist.size, dtype=np.float64))))
    if method == "fast":
        prof = delta_profile(tree, b)
        return float((1.0 - b * b) * prof.delta_sq + b * b * prof.delta[0] ** 2)
    raise ValueError(f"unknown method {method!r}; use 'naive' or 'fast'")


def sandwich_bounds(tree: RootedTree, b: float) -> SandwichBounds:
    """Two-sided bracket S <= Delta^2 <= S / (1 - b^2), with S from the
    naive pair-sum oracle so the bracket is a genuine cross-check."""
    b = _check_b(b)
    s = pair_distance_sum(tree, b, method="naive")
    prof = delta_profile(tree, b)
    return SandwichBounds(lower=s, upper=s / (1.0 - b * b), delta_sq=prof.delta_sq)


def alt_delta_bound(tree: RootedTree, b: float, d: int | None = None) -> float | None:
    """sqrt(n) / (1 - b d) when b d < 1, None otherwise (d = max child
    count).  Specializes to the product-measure value sqrt(n) at b = 0 and
    to the chain bound sqrt(n)/(1-b) at d = 1."""
    b = _check_b(b)
    if d is None:
        d = tree.max_child_count()
    if b * d >= 1.0:
        return None
    return float(np.sqrt(tree.n) / (1.0 - b * d))


def delta_series(tree: RootedTree, b: float, k_max: int) -> DeltaSeries:
    """Delta_k for every truncation depth k = 0..k_max of a materialized
    tree, each via one bottom-up level pass (truncations never built)."""
    b = _check_b(b)
    if k_max < 0 or k_max > tree.depth_max:
        raise ValueError(f"k_max {k_max} outside [0, {tree.depth_max}]")
    ks = np.arange(k_max + 1, dtype=np.int64)
    counts = np.empty(k_max + 1, dtype=np.int64)
    delta_sqs = np.empty(k_max + 1, dtype=np.float64)
    offsets = tree._level_offsets
    for k in range(k_max + 1):
        counts[k] = int(offsets[k + 1])
        lvl = tree.level(k)
        level_vals = np.ones(lvl.size, dtype=np.float64)
        total = float(lvl.size)
        for d in range(k, 0, -1):
            up = tree.level(d - 1)
            cur = tree.level(d)
            contrib = np.bincount(
                tree._level_rank[tree.parent[cur]], weights=level_vals, minlength=up.size
            )
            level_vals = 1.0 + b * contrib
            total += float(np.sum(level_vals**2))
        delta_sqs[k] = total
    return DeltaSeries(ks=ks, vertex_counts=counts, delta_sqs=delta_sqs)


# -------------------------------------------------------------------- #
# Family-specialized series (no tree materialization)                   #
# -------------------------------------------------------------------- #


def dary_delta_series(d: int, b: float, k_max: int) -> DeltaSeries:
    """Series for the complete d-ary tree.  All vertices at one depth share
    the same profile value, so each truncation is a scalar recursion; this
    handles depths whose trees could never be materialized."""
    b = _check_b(b)
    if d < 1:
        raise ValueError(f"d-ary degree must be >= 1, got {d}")
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    ks = np.arange(k_max + 1, dtype=np.int64)
    counts = np.array([dary_vertex_count(d, int(k)) for k in ks], dtype=np.int64)
    delta_sqs = np.empty(k_max + 1, dtype=np.float64)
    for k in range(k_max + 1):
        val = 1.0
        total = float(d) ** k * val * val
        for j in range(k - 1, -1, -1):
            val = 1.0 + b * d * val
            total += float(d) ** j * val * val
        delta_sqs[k] = total
    return DeltaSeries(ks=ks, vertex_counts=counts, delta_sqs=delta_sqs)


def threeone_delta_series(b: float, k_max: int) -> DeltaSeries:
    """Series for the 3-1 tree via level-by-level arrays.

    Level j holds 2^j values; the first half of level j (j >= 1) has 3
    children apiece in level j+1 (consecutive triples), the second half
    one child each.  Peak memory is two adjacent level arrays.
    """
    b = _check_b(b)
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    ks = np.arange(k_max + 1, dtype=np.int64)
    counts = 2 ** (ks + 1) - 1
    delta_sqs = np.empty(k_max + 1, dtype=np.float64)
    delta_sqs[0] = 1.0
    for k in range(1, k_max + 1):
        vals = np.ones(2**k, dtype=np.float64)
        total = float(vals.size)
        for j in range(k - 1, 0, -1):
            half = 2 ** (j - 1)
            cur = np.empty(2**j, dtype=np.float64)
            cur[:half] = 1.0 + b * vals[: 3 * half].reshape(half, 3).sum(axis=1)
            cur[half:] = 1.0 + b * vals[3 * half :]
            total += float(np.sum(cur**2))
            vals = cur
        root = 1.0 + b * (vals[0] + vals[1])
        total += root * root
        delta_sqs[k] = total
    return DeltaSeries(ks=ks, vertex_counts=counts, delta_sqs=delta_sqs)

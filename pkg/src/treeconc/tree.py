"""Immutable rooted trees on dense integer vertex ids.

A tree with ``n`` vertices lives on ids ``0..n-1`` with the root at id 0,
and every non-root vertex has a parent with a strictly smaller id.  All
structure is kept in flat numpy arrays (parent pointers, a CSR layout of
the children lists, per-level index slices) so that bottom-up passes over
trees with tens of millions of vertices stay vectorized.

Generated trees (``generate``) are numbered breadth-first: level by level,
left to right.  Trees built from arbitrary parent arrays are only
guaranteed parent-before-child; ``truncate_to_depth`` renumbers its result
breadth-first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ROOT_SENTINEL = -1

# Hard ceiling on generated-tree sizes: counts are held in int64 arrays.
_MAX_VERTICES = np.iinfo(np.int64).max


def _ragged_arange(counts: np.ndarray) -> np.ndarray:
    """[0..c0), [0..c1), ... concatenated, for nonnegative counts."""
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    return np.arange(total, dtype=np.int64) - starts


class RootedTree:
    """A finite rooted tree, immutable after construction.

    Attributes
    ----------
    n : int
        Vertex count.
    parent : ndarray of int64, shape (n,)
        ``parent[0] == -1``; ``parent[v] < v`` for ``v > 0``.
    depth : ndarray of int64, shape (n,)
        Edge distance from the root; ``depth[0] == 0``.
    depth_max : int
        Maximum depth over all vertices.
    """

    __slots__ = (
        "n",
        "parent",
        "depth",
        "depth_max",
        "_child_offsets",
        "_child_index",
        "_level_order",
        "_level_offsets",
        "_level_rank",
    )

    def __init__(self, parent, depth: np.ndarray | None = None):
        parent = np.asarray(parent, dtype=np.int64)
        if parent.ndim != 1 or parent.size == 0:
            raise ValueError("parent array must be a non-empty 1-d sequence")
        n = int(parent.size)
        if parent[0] != ROOT_SENTINEL:
            raise ValueError(
                f"index 0 must be the root (parent {ROOT_SENTINEL}), found {int(parent[0])}"
            )
        if n > 1:
            rest = parent[1:]
            bad = np.nonzero(rest < 0)[0]
            if bad.size:
                i = int(bad[0]) + 1
                raise ValueError(
                    f"second root sentinel / negative parent {int(parent[i])} at index {i}: "
                    "a tree has exactly one root, at index 0"
                )
            fwd = np.nonzero(rest >= np.arange(1, n))[0]
            if fwd.size:
                i = int(fwd[0]) + 1
                raise ValueError(
                    f"forward parent at index {i}: parent {int(parent[i])} must be < {i} "
                    "(vertices are numbered so parents precede children)"
                )

        self.n = n
        self.parent = parent
        self.parent.setflags(write=False)

        # Children in CSR form, each list ascending by child id.
        counts = np.bincount(parent[1:], minlength=n) if n > 1 else np.zeros(n, dtype=np.int64)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        self._child_offsets = offsets
        if n > 1:
            self._child_index = np.argsort(parent[1:], kind="stable").astype(np.int64) + 1
        else:
            self._child_index = np.empty(0, dtype=np.int64)
        self._child_offsets.setflags(write=False)
        self._child_index.setflags(write=False)

        if depth is None:
            depth = self._compute_depths()
        else:
            depth = np.asarray(depth, dtype=np.int64)
        self.depth = depth
        self.depth.setflags(write=False)
        self.depth_max = int(depth.max())

        # Level slices: _level_order groups vertices by depth, ascending id
        # within each level — a canonical breadth-first order.
        self._level_order = np.argsort(depth, kind="stable").astype(np.int64)
        sorted_depth = depth[self._level_order]
        self._level_offsets = np.searchsorted(
            sorted_depth, np.arange(self.depth_max + 2, dtype=np.int64)
        ).astype(np.int64)
        rank = np.empty(n, dtype=np.int64)
        rank[self._level_order] = np.arange(n, dtype=np.int64)
        self._level_rank = rank - self._level_offsets[depth]
        for a in (self._level_order, self._level_offsets, self._level_rank):
            a.setflags(write=False)

    # ---------------------------------------------------------------- #
    # Construction helpers                                              #
    # ---------------------------------------------------------------- #

    def _compute_depths(self) -> np.ndarray:
        depth = np.zeros(self.n, dtype=np.int64)
        frontier = np.array([0], dtype=np.int64)
        d = 0
        while frontier.size:
            kids = self.children_of(frontier)
            d += 1
            depth[kids] = d
            frontier = kids
        return depth

    @classmethod
    def from_text(cls, text: str) -> "RootedTree":
        """Parse the canonical tree text format.

        Line 1 holds the vertex count, line 2 the n space-separated parent
        entries (root = -1).
        """
        lines = text.split("\n")
        if len(lines) < 2:
            raise ValueError("tree text needs two lines: count, then parent entries")
        try:
            n = int(lines[0].strip())
        except ValueError as exc:
            raise ValueError(f"bad vertex count on line 1: {lines[0]!r}") from exc
        fields = lines[1].split()
        if len(fields) != n:
            raise ValueError(f"line 2 has {len(fields)} parent entries, expected {n}")
        return cls(np.array([int(f) for f in fields], dtype=np.int64))

    def to_text(self) -> str:
        """Serialize to the canonical format (LF endings, ASCII decimal)."""
        return f"{self.n}\n" + " ".join(str(int(p)) for p in self.parent) + "\n"

    # ---------------------------------------------------------------- #
    # Basic queries                                                     #
    # ---------------------------------------------------------------- #

    def _check_vertex(self, v: int) -> int:
        v = int(v)
        if not 0 <= v < self.n:
            raise ValueError(f"vertex id {v} out of range [0, {self.n})")
        return v

    def children(self, v: int) -> np.ndarray:
        v = self._check_vertex(v)
        return self._child_index[self._child_offsets[v] : self._child_offsets[v + 1]]

    def children_of(self, vertices: np.ndarray) -> np.ndarray:
        """Concatenated children of ``vertices``, preserving their order."""
        starts = self._child_offsets[vertices]
        counts = self._child_offsets[vertices + 1] - starts
        return self._child_index[np.repeat(starts, counts) + _ragged_arange(counts)]

    def num_children(self) -> np.ndarray:
        return self._child_offsets[1:] - self._child_offsets[:-1]

    def max_child_count(self) -> int:
        return int(self.num_children().max()) if self.n > 1 else 0

    def is_leaf(self, v: int) -> bool:
        v = self._check_vertex(v)
        return self._child_offsets[v] == self._child_offsets[v + 1]

    def leaf_mask(self) -> np.ndarray:
        return self.num_children() == 0

    def level(self, d: int) -> np.ndarray:
        """Vertex ids at depth ``d``, ascending (empty beyond depth_max)."""
        if d < 0 or d > self.depth_max:
            return np.empty(0, dtype=np.int64)
        return self._level_order[self._level_offsets[d] : self._level_offsets[d + 1]]

    def level_sizes(self) -> np.ndarray:
        """|D_r(root)| for r = 0..depth_max."""
        return np.diff(self._level_offsets)

    def child_sum(self, f: np.ndarray) -> np.ndarray:
        """g with g[v] = sum of f over the children of v (one forward step)."""
        if self.n == 1:
            return np.zeros(1, dtype=np.float64)
        return np.bincount(self.parent[1:], weights=f[1:], minlength=self.n)

    # ---------------------------------------------------------------- #
    # Metric / order structure                                          #
    # ---------------------------------------------------------------- #

    def meet(self, v: int, w: int) -> int:
        """Deepest common ancestor of v and w (ancestor-walk)."""
        v = self._check_vertex(v)
        w = self._check_vertex(w)
        dv, dw = int(self.depth[v]), int(self.depth[w])
        while dv > dw:
            v = int(self.parent[v])
            dv -= 1
        while dw > dv:
            w = int(self.parent[w])
            dw -= 1
        while v != w:
            v = int(self.parent[v])
            w = int(self.parent[w])
        return v

    def distance(self, v: int, w: int) -> int:
        """Number of edges on the unique simple path from v to w."""
        a = self.meet(v, w)
        return int(self.depth[v] + self.depth[w] - 2 * self.depth[a])

    def is_ancestor(self, v: int, w: int) -> bool:
        """True when v lies on the root-to-w path (including v == w)."""
        v = self._check_vertex(v)
        w = self._check_vertex(w)
        while self.depth[w] > self.depth[v]:
            w = int(self.parent[w])
        return v == w

    def descendants_at(self, v: int, r: int) -> int:
        """|D_r(v)|: descendants exactly r generations below v."""
        v = self._check_vertex(v)
        if r < 0:
            raise ValueError(f"generation index must be >= 0, got {r}")
        frontier = np.array([v], dtype=np.int64)
        for _ in range(r):
            if frontier.size == 0:
                return 0
            frontier = self.children_of(frontier)
        return int(frontier.size)

    def subtree_sizes(self) -> np.ndarray:
        """Vertex count of the subtree below each v (including v itself)."""
        size = np.ones(self.n, dtype=np.float64)
        for d in range(self.depth_max, 0, -1):
            lvl = self.level(d)
            up = self.level(d - 1)
            contrib = np.bincount(
                self._level_rank[self.parent[lvl]], weights=size[lvl], minlength=up.size
            )
            size[up] += contrib
        return size.astype(np.int64)

    def max_descendant_counts(self) -> np.ndarray:
        """m with m[r] = max over v of |D_r(v)|, for r = 0..depth_max."""
        out = np.empty(self.depth_max + 1, dtype=np.int64)
        out[0] = 1
        f = np.ones(self.n, dtype=np.float64)
        for r in range(1, self.depth_max + 1):
            f = self.child_sum(f)
            out[r] = int(f.max())
        return out

    # ---------------------------------------------------------------- #
    # Truncation and growth                                             #
    # ---------------------------------------------------------------- #

    def truncate_with_map(self, k: int) -> tuple["RootedTree", np.ndarray]:
        """Induced subtree on vertices of depth <= k, renumbered
        breadth-first; also returns the old ids in new-id order."""
        if k < 0:
            raise ValueError(f"truncation depth must be >= 0, got {k}")
        k = min(k, self.depth_max)
        m = int(self._level_offsets[k + 1])
        old_ids = self._level_order[:m]
        new_of_old = np.full(self.n, -1, dtype=np.int64)
        new_of_old[old_ids] = np.arange(m, dtype=np.int64)
        parent = np.empty(m, dtype=np.int64)
        parent[0] = ROOT_SENTINEL
        if m > 1:
            parent[1:] = new_of_old[self.parent[old_ids[1:]]]
        return RootedTree(parent, depth=self.depth[old_ids].copy()), old_ids

    def truncate_to_depth(self, k: int) -> "RootedTree":
        return self.truncate_with_map(k)[0]

    def growth_estimates(self) -> "GrowthEstimates":
        """Root-level, ball, and max-local growth sequences |.|^{1/r}."""
        if self.depth_max == 0:
            e = np.empty(0, dtype=np.float64)
            return GrowthEstimates(np.empty(0, dtype=np.int64), e, e.copy(), e.copy())
        r = np.arange(1, self.depth_max + 1, dtype=np.int64)
        sizes = self.level_sizes().astype(np.float64)
        balls = np.cumsum(sizes)
        local = self.max_descendant_counts().astype(np.float64)
        inv_r = 1.0 / r
        return GrowthEstimates(
            r=r,
            root_growth=sizes[1:] ** inv_r,
            ball_growth=balls[1:] ** inv_r,
            max_local_growth=local[1:] ** inv_r,
        )

    # ---------------------------------------------------------------- #

    def __repr__(self) -> str:  # pragma: no cover
        return f"RootedTree(n={self.n}, depth_max={self.depth_max})"


@dataclass(frozen=True)
class GrowthEstimates:
    """Growth-rate sequences over radii r = 1..depth.

    root_growth[r-1]      = |D_r(root)|^{1/r}
    ball_growth[r-1]      = |B_r(root)|^{1/r}
    max_local_growth[r-1] = (max_v |D_r(v)|)^{1/r}
    """

    r: np.ndarray
    root_growth: np.ndarray
    ball_growth: np.ndarray
    max_local_growth: np.ndarray


# -------------------------------------------------------------------- #
# Generators                                                            #
# -------------------------------------------------------------------- #


@dataclass(frozen=True)
class GeneratorSpec:
    """Description of a generated test tree.

    kind is one of "dary", "threeone", "path", "galton_watson"; the
    relevant parameter fields depend on the kind.
    """

    kind: str
    degree: int = 0
    depth: int = 0
    length: int = 0
    offspring: tuple[float, ...] = ()
    seed: int = 0

    @staticmethod
    def parse(token: str) -> "GeneratorSpec":
        """Parse CLI syntax: dary:D:K | threeone:K | path:L | gw:P0,P1,..:K:SEED."""
        parts = token.split(":")
        kind = parts[0]
        try:
            if kind == "dary" and len(parts) == 3:
                return GeneratorSpec("dary", degree=int(parts[1]), depth=int(parts[2]))
            if kind == "threeone" and len(parts) == 2:
                return GeneratorSpec("threeone", depth=int(parts[1]))
            if kind == "path" and len(parts) == 2:
                return GeneratorSpec("path", length=int(parts[1]))
            if kind in ("gw", "galton_watson") and len(parts) == 4:
                probs = tuple(float(x) for x in parts[1].split(","))
                return GeneratorSpec(
                    "galton_watson", offspring=probs, depth=int(parts[2]), seed=int(parts[3])
                )
        except ValueError as exc:
            raise ValueError(f"bad generator token {token!r}: {exc}") from exc
        raise ValueError(
            f"bad generator token {token!r}; expected dary:D:K, threeone:K, "
            "path:L or gw:P0,P1,..:K:SEED"
        )


def dary_vertex_count(d: int, depth: int) -> int:
    """Vertices of the complete d-ary tree of the given depth (exact int)."""
    if d == 1:
        return depth + 1
    return (d ** (depth + 1) - 1) // (d - 1)


def generate(spec: GeneratorSpec) -> RootedTree:
    """Build one of the standard test-instance families."""
    if spec.kind == "dary":
        return _generate_dary(spec.degree, spec.depth)
    if spec.kind == "threeone":
        return _generate_threeone(spec.depth)
    if spec.kind == "path":
        if spec.length < 0:
            raise ValueError(f"path length must be >= 0, got {spec.length}")
        n = spec.length + 1
        parent = np.arange(-1, n - 1, dtype=np.int64)
        return RootedTree(parent, depth=np.arange(n, dtype=np.int64))
    if spec.kind == "galton_watson":
        return _generate_galton_watson(spec.offspring, spec.depth, spec.seed)
    raise ValueError(f"unknown generator kind {spec.kind!r}")


def _generate_dary(d: int, depth: int) -> RootedTree:
    if d < 1:
        raise ValueError(f"d-ary degree must be >= 1, got {d}")
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    n = dary_vertex_count(d, depth)
    if n > _MAX_VERTICES:
        raise ValueError(f"dary({d},{depth}) has {n} vertices, beyond the int64 count type")
    parents = [np.array([ROOT_SENTINEL], dtype=np.int64)]
    depths = [np.zeros(1, dtype=np.int64)]
    level_start, level_size = 0, 1
    for j in range(1, depth + 1):
        size = level_size * d
        parents.append(level_start + np.arange(size, dtype=np.int64) // d)
        depths.append(np.full(size, j, dtype=np.int64))
        level_start += level_size
        level_size = size
    return RootedTree(np.concatenate(parents), depth=np.concatenate(depths))


def _generate_threeone(depth: int) -> RootedTree:
    """Level k has 2^k vertices; the first half of each level (k >= 1) gets
    3 children apiece, the second half 1, assigned left to right."""
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    n = 2 ** (depth + 1) - 1
    if n > _MAX_VERTICES:
        raise ValueError(f"threeone({depth}) has {n} vertices, beyond the int64 count type")
    parents = [np.array([ROOT_SENTINEL], dtype=np.int64)]
    depths = [np.zeros(1, dtype=np.int64)]
    if depth >= 1:
        parents.append(np.zeros(2, dtype=np.int64))
        depths.append(np.ones(2, dtype=np.int64))
    level_start = 1
    for j in range(1, depth):
        half = 2 ** (j - 1)
        size_next = 2 ** (j + 1)
        i = np.arange(size_next, dtype=np.int64)
        p = np.where(i < 3 * half, level_start + i // 3, level_start + half + (i - 3 * half))
        parents.append(p)
        depths.append(np.full(size_next, j + 1, dtype=np.int64))
        level_start += 2**j
    return RootedTree(np.concatenate(parents), depth=np.concatenate(depths))


def _generate_galton_watson(
    offspring: tuple[float, ...], depth: int, seed: int
) -> RootedTree:
    probs = np.asarray(offspring, dtype=np.float64)
    if probs.size == 0 or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
        raise ValueError("offspring probabilities must be nonnegative and sum to 1 (1e-12)")
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    rng = np.random.default_rng(seed)
    parent = [ROOT_SENTINEL]
    depths = [0]
    frontier = [0]
    for d in range(depth):
        counts = rng.choice(probs.size, size=len(frontier), p=probs)
        nxt = []
        for v, c in zip(frontier, counts):
            for _ in range(int(c)):
                nxt.append(len(parent))
                parent.append(v)
                depths.append(d + 1)
        if not nxt:
            break
        frontier = nxt
    return RootedTree(
        np.array(parent, dtype=np.int64), depth=np.array(depths, dtype=np.int64)
    )


def build_from_parent_array(parents) -> RootedTree:
    """Validated construction from a parent array (root sentinel -1 at 0)."""
    return RootedTree(parents)

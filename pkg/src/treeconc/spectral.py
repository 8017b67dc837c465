"""The child-sum operator on a tree, its powers, norms, and the induced
upper-triangular mixing matrix.

The forward operator acts on vectors indexed by vertices as
(Qf)(v) = sum of f over the children of v; its adjoint reads the parent,
(Q*f)(w) = f(parent(w)) with 0 at the root.  The j-th power norm has the
exact combinatorial value sqrt(max_v |D_j(v)|), which the matrix-free
power iteration here cross-checks.  Norm computations never materialize Q;
only ``mixing_matrix`` is dense, and it is size-guarded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from treeconc.tree import RootedTree

_DENSE_GUARD = 4096
_POWER_ITERS = 200
_RAYLEIGH_TOL = 1e-12


class TreeOperator:
    """Matrix-free child-sum operator bound to one tree."""

    __slots__ = ("tree",)

    def __init__(self, tree: RootedTree):
        self.tree = tree

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.tree.child_sum(f)

    def apply_adjoint(self, f: np.ndarray) -> np.ndarray:
        g = np.empty(self.tree.n, dtype=np.float64)
        g[0] = 0.0
        if self.tree.n > 1:
            g[1:] = f[self.tree.parent[1:]]
        return g

    def apply_power(self, f: np.ndarray, j: int) -> np.ndarray:
        for _ in range(j):
            f = self.apply(f)
        return f

    def apply_adjoint_power(self, f: np.ndarray, j: int) -> np.ndarray:
        for _ in range(j):
            f = self.apply_adjoint(f)
        return f


def q_apply(op: TreeOperator | RootedTree, f: np.ndarray, j: int = 1) -> np.ndarray:
    """j-fold application of the child-sum operator (j = 0 is identity)."""
    if j < 0:
        raise ValueError(f"power must be >= 0, got {j}")
    if isinstance(op, RootedTree):
        op = TreeOperator(op)
    return op.apply_power(np.asarray(f, dtype=np.float64), j)


def q_power_norm_exact(tree: RootedTree, j: int) -> float:
    """l2 operator norm of the j-th power: sqrt(max_v |D_j(v)|)."""
    if j < 0:
        raise ValueError(f"power must be >= 0, got {j}")
    if j == 0:
        return 1.0
    if j > tree.depth_max:
        return 0.0
    f = q_apply(tree, np.ones(tree.n), j)
    return float(np.sqrt(f.max()))


def _power_iteration(apply_sym, n: int, iters: int, seed) -> float:
    """Largest eigenvalue of a PSD operator given as a matvec callable.

    Deterministic start from the seed; all-zero images re-randomize a few
    times before the operator is declared null.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    for _ in range(4):
        if float(np.linalg.norm(apply_sym(x))) > 0.0:
            break
        x = rng.standard_normal(n)
    else:
        return 0.0
    x /= np.linalg.norm(x)
    lam_prev = -np.inf
    lam = 0.0
    for _ in range(max(1, iters)):
        y = apply_sym(x)
        lam = float(x @ y)
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            return 0.0
        x = y / ny
        if abs(lam - lam_prev) < _RAYLEIGH_TOL * max(1.0, abs(lam)):
            break
        lam_prev = lam
    return max(lam, 0.0)


def q_power_norm_iterative(
    tree: RootedTree, j: int, iters: int = _POWER_ITERS, seed: int = 0
) -> float:
    """Power-iteration estimate of the j-th power norm, via the symmetric
    composition with the adjoint.  Cross-check for the exact formula."""
    if j < 0:
        raise ValueError(f"power must be >= 0, got {j}")
    if iters < 1:
        raise ValueError(f"iters must be >= 1, got {iters}")
    if j == 0:
        return 1.0
    op = TreeOperator(tree)

    def sym(x: np.ndarray) -> np.ndarray:
        return op.apply_power(op.apply_adjoint_power(x, j), j)

    return float(np.sqrt(_power_iteration(sym, tree.n, iters, seed)))


def partial_sum_norm(
    tree: RootedTree, b: float, k: int, iters: int = _POWER_ITERS, seed: int = 0
) -> float:
    """l2 norm of the k-th geometric partial sum sum_{j=0..k} (bQ)^j."""
    b = float(b)
    if not 0.0 <= b < 1.0:
        raise ValueError(f"decay weight b must lie in [0, 1), got {b}")
    if k < 0:
        raise ValueError(f"partial-sum order must be >= 0, got {k}")
    op = TreeOperator(tree)

    def partial(x: np.ndarray, adjoint: bool) -> np.ndarray:
        acc = x.copy()
        cur = x
        step = op.apply_adjoint if adjoint else op.apply
        for _ in range(k):
            cur = b * step(cur)
            acc += cur
        return acc

    def sym(x: np.ndarray) -> np.ndarray:
        return partial(partial(x, adjoint=True), adjoint=False)

    return float(np.sqrt(_power_iteration(sym, tree.n, iters, seed)))


# -------------------------------------------------------------------- #
# Mixing matrix                                                         #
# -------------------------------------------------------------------- #


@dataclass(frozen=True)
class MixingMatrix:
    """Upper-triangular ancestor-decay matrix in a breadth-first order.

    entries[i, j] = b^(distance) when order[i] is an ancestor of order[j]
    (unit diagonal), 0 otherwise.
    """

    b: float
    order: np.ndarray
    entries: np.ndarray


@dataclass(frozen=True)
class MixingNorms:
    inf_norm: float
    two_norm: float
    row_sums: np.ndarray


def breadth_first_order(tree: RootedTree, rng: np.random.Generator | None = None) -> np.ndarray:
    """A breadth-first vertex order: canonical (by id within each level)
    when rng is None, otherwise with levels internally shuffled."""
    if rng is None:
        return tree._level_order.copy()
    parts = []
    for d in range(tree.depth_max + 1):
        lvl = tree.level(d).copy()
        rng.shuffle(lvl)
        parts.append(lvl)
    return np.concatenate(parts)


def _check_breadth_first(tree: RootedTree, order: np.ndarray) -> np.ndarray:
    order = np.asarray(order, dtype=np.int64)
    if order.shape != (tree.n,) or not np.array_equal(np.sort(order), np.arange(tree.n)):
        raise ValueError("order must be a permutation of all vertex ids")
    d = tree.depth[order]
    if np.any(np.diff(d) < 0):
        raise ValueError("order is not breadth-first: depths must be nondecreasing")
    return order


def mixing_matrix(tree: RootedTree, b: float, order: np.ndarray | None = None) -> MixingMatrix:
    """Dense geometric sum of operator powers, sum_r b^r Q^r, expressed in
    a breadth-first order (guarded at n <= 4096)."""
    b = float(b)
    if not 0.0 <= b < 1.0:
        raise ValueError(f"decay weight b must lie in [0, 1), got {b}")
    if tree.n > _DENSE_GUARD:
        raise ValueError(
            f"dense mixing matrix guarded at n <= {_DENSE_GUARD}, tree has {tree.n}"
        )
    order = breadth_first_order(tree) if order is None else _check_breadth_first(tree, order)
    pos = np.empty(tree.n, dtype=np.int64)
    pos[order] = np.arange(tree.n, dtype=np.int64)

    # Walk every vertex's ancestor chain in lockstep; step r writes the
    # distance-r ancestor entries for all still-active vertices at once.
    entries = np.zeros((tree.n, tree.n), dtype=np.float64)
    anc = np.arange(tree.n, dtype=np.int64)
    active = np.ones(tree.n, dtype=bool)
    r = 0
    while active.any():
        idx = np.nonzero(active)[0]
        entries[pos[anc[idx]], pos[idx]] = b**r
        parents = tree.parent[anc[idx]]
        anc[idx] = parents
        active[idx] = parents >= 0
        r += 1
    return MixingMatrix(b=b, order=order, entries=entries)


def mixing_norms(m: MixingMatrix, iters: int = _POWER_ITERS, seed: int = 0) -> MixingNorms:
    """Row-sum (l-infinity operator) norm, l2 operator norm via power
    iteration on the Gram matrix, and the image of the all-ones vector."""
    row_sums = m.entries.sum(axis=1)
    inf_norm = float(row_sums.max())
    gram = m.entries.T @ m.entries

    def sym(x: np.ndarray) -> np.ndarray:
        return gram @ x

    two_norm = float(np.sqrt(_power_iteration(sym, m.entries.shape[0], iters, seed)))
    return MixingNorms(inf_norm=inf_norm, two_norm=two_norm, row_sums=row_sums)

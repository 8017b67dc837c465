"""Finite-state broadcast models on rooted trees.

A model is a root distribution plus one row-stochastic transition kernel
per non-root vertex; each vertex draws its state conditionally on its
parent's state, with siblings independent given the parent.  The uniform
binary-flip special case (flip probability p, contraction b = 1 - 2p)
gets exact machinery: the closed-form multi-step kernel, the distribution
of the number of ones via a subtree-convolution DP, exact exponential
moments of centered linear observables, and the pair-sum variance formula
for the density of ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from treeconc.delta import pair_distance_sum
from treeconc.transport import decode_ranks, min_cost_transport
from treeconc.tree import RootedTree

_ENUM_GUARD = 2**20
_DP_GUARD = 20_000
_LIPSCHITZ_TOL = 1e-12


@dataclass(frozen=True)
class StateSpace:
    """A finite metric state space of diameter at most 1."""

    size: int
    metric: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "metric", np.asarray(self.metric, dtype=np.float64))
        m = self.metric
        if self.size < 2 or m.shape != (self.size, self.size):
            raise ValueError(f"need a {self.size}x{self.size} metric with size >= 2")
        if np.any(np.diag(m) != 0):
            raise ValueError("metric diagonal must be zero")
        if not np.array_equal(m, m.T):
            raise ValueError("metric must be symmetric")
        off = m[~np.eye(self.size, dtype=bool)]
        if np.any(off <= 0):
            raise ValueError("distinct states must be at positive distance")
        if np.any(m > 1 + 1e-15):
            raise ValueError("metric diameter must be at most 1")
        for a in range(self.size):
            if np.any(m[a][None, :] + m[:, a][:, None] < m - 1e-12):
                raise ValueError(f"triangle inequality fails through state {a}")

    @staticmethod
    def discrete(size: int = 2) -> "StateSpace":
        return StateSpace(size=size, metric=1.0 - np.eye(size))


class MarkovTreeModel:
    """Root distribution + per-vertex kernels over a finite state space.

    kernels[v][x, y] is the probability that vertex v takes state y given
    its parent is in state x; row 0 of the kernel stack is unused.
    """

    __slots__ = ("tree", "space", "root_dist", "kernels")

    def __init__(self, tree: RootedTree, space: StateSpace, root_dist, kernels):
        self.tree = tree
        self.space = space
        self.root_dist = np.asarray(root_dist, dtype=np.float64)
        self.kernels = np.asarray(kernels, dtype=np.float64)
        h = space.size
        if self.root_dist.shape != (h,) or abs(self.root_dist.sum() - 1.0) > 1e-12:
            raise ValueError("root distribution must be a length-h vector summing to 1")
        if self.kernels.shape != (tree.n, h, h):
            raise ValueError(f"kernel stack must have shape ({tree.n}, {h}, {h})")
        rows = self.kernels[1:].sum(axis=2) if tree.n > 1 else np.ones((0, h))
        if np.any(np.abs(rows - 1.0) > 1e-12) or np.any(self.kernels < 0):
            raise ValueError("every kernel row must be a probability vector (1e-12)")

    @property
    def n(self) -> int:
        return self.tree.n

    def vertex_marginals(self) -> np.ndarray:
        """Exact single-vertex marginals, propagated down the tree."""
        marg = np.empty((self.n, self.space.size), dtype=np.float64)
        marg[0] = self.root_dist
        for v in range(1, self.n):
            marg[v] = marg[self.tree.parent[v]] @ self.kernels[v]
        return marg


class IsingModel(MarkovTreeModel):
    """Uniform-root binary model where each child copies its parent's
    state except with flip probability p in (0, 1/2]."""

    __slots__ = ("p", "b")

    def __init__(self, tree: RootedTree, p: float):
        p = float(p)
        if not 0.0 < p <= 0.5:
            raise ValueError(f"flip probability must lie in (0, 1/2], got {p}")
        flip = np.array([[1.0 - p, p], [p, 1.0 - p]])
        kernels = np.broadcast_to(flip, (tree.n, 2, 2)).copy()
        super().__init__(tree, StateSpace.discrete(2), np.array([0.5, 0.5]), kernels)
        self.p = p
        self.b = 1.0 - 2.0 * p


@dataclass(frozen=True)
class ExactMeasure:
    """Explicit probability vector over all h^n configurations, indexed by
    rank (coordinate 0 most significant)."""

    space: StateSpace
    n: int
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=np.float64))
        if self.probs.shape != (self.space.size**self.n,):
            raise ValueError("probability vector length must be h^n")
        if np.any(self.probs < -1e-15):
            raise ValueError("probabilities must be nonnegative")
        if abs(self.probs.sum() - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {self.probs.sum()}, not 1 (1e-10)")


@dataclass(frozen=True)
class MagnetizationPGF:
    """Exact distribution of the number of ones: coefficients[m] is the
    probability of seeing m ones over the whole tree."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.float64)
        object.__setattr__(self, "coefficients", c)
        if np.any(c < -1e-12) or abs(c.sum() - 1.0) > 1e-10:
            raise ValueError("coefficients must be a probability vector (1e-10)")

    @property
    def n(self) -> int:
        return self.coefficients.size - 1

    def mean_count(self) -> float:
        return float(np.arange(self.coefficients.size) @ self.coefficients)

    def variance_of_density(self) -> float:
        # fsum keeps the moments exact to one rounding; the identity checks
        # against the pair-sum formula run on a 1e-10 absolute budget
        m = np.arange(self.coefficients.size, dtype=np.float64)
        e1 = math.fsum(m * self.coefficients)
        e2 = math.fsum(m * m * self.coefficients)
        return (e2 - e1 * e1) / self.n**2

    def tail_probability(self, eps: float) -> float:
        """P(|ones/n - mean/n| >= eps), boundary included."""
        m = np.arange(self.coefficients.size, dtype=np.float64)
        dev = np.abs(m - self.mean_count()) / self.n
        return float(self.coefficients[dev >= eps - 1e-15].sum())

    def exp_moment(self, lam: float) -> float:
        """E exp(lam * (ones - mean ones)), exactly from the coefficients."""
        m = np.arange(self.coefficients.size, dtype=np.float64)
        return float(np.sum(self.coefficients * np.exp(lam * (m - self.mean_count()))))


# -------------------------------------------------------------------- #
# Kernel geometry                                                       #
# -------------------------------------------------------------------- #


def kernel_lipschitz(model: MarkovTreeModel) -> float:
    """Smallest b such that every kernel moves its output distribution by
    at most b * d(x, x') in transportation distance when the conditioning
    state moves from x to x'.  Exact via per-pair 1-d transport."""
    h = model.space.size
    metric = model.space.metric
    worst = 0.0
    seen: dict[bytes, float] = {}
    for v in range(1, model.n):
        key = model.kernels[v].tobytes()
        if key in seen:
            worst = max(worst, seen[key])
            continue
        local = 0.0
        for x in range(h):
            for y in range(x + 1, h):
                moved, _, _, _ = min_cost_transport(
                    model.kernels[v, x], model.kernels[v, y], metric
                )
                local = max(local, moved / metric[x, y])
        seen[key] = local
        worst = max(worst, local)
    return worst


def n_step_matrix(p: float, m: int) -> np.ndarray:
    """Closed-form m-step binary flip kernel with contraction b = 1 - 2p."""
    p = float(p)
    if not 0.0 < p <= 0.5:
        raise ValueError(f"flip probability must lie in (0, 1/2], got {p}")
    if m < 0:
        raise ValueError(f"step count must be >= 0, got {m}")
    bm = (1.0 - 2.0 * p) ** m
    return 0.5 * np.array([[1.0 + bm, 1.0 - bm], [1.0 - bm, 1.0 + bm]])


# -------------------------------------------------------------------- #
# Sampling and exact measures                                           #
# -------------------------------------------------------------------- #


def sample(model: MarkovTreeModel, count: int, seed: int) -> np.ndarray:
    """count ancestral samples as an (count, n) array of state indices.

    Uniform variates come from a counter-based generator keyed only by
    the seed and consumed in a fixed (sample, vertex) layout, so output
    is determined by (seed, count) alone regardless of how callers
    schedule the work.
    """
    if count < 1:
        raise ValueError(f"sample count must be >= 1, got {count}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    uniforms = rng.random((count, model.n))
    out = np.empty((count, model.n), dtype=np.int64)
    root_cdf = np.cumsum(model.root_dist)
    out[:, 0] = np.searchsorted(root_cdf, uniforms[:, 0], side="right")
    for v in range(1, model.n):
        cdf_rows = np.cumsum(model.kernels[v], axis=1)[out[:, model.tree.parent[v]]]
        out[:, v] = (uniforms[:, v : v + 1] >= cdf_rows).sum(axis=1)
    np.clip(out, 0, model.space.size - 1, out=out)
    return out


def exact_measure(model: MarkovTreeModel) -> ExactMeasure:
    """Full probability vector over configurations: the root marginal times
    the kernel factors along every edge."""
    h = model.space.size
    total = h**model.n
    if total > _ENUM_GUARD:
        raise ValueError(
            f"exact enumeration needs {total} configurations, over the {_ENUM_GUARD} guard"
        )
    ranks = np.arange(total, dtype=np.int64)
    states = decode_ranks(ranks, model.n, h)
    probs = model.root_dist[states[:, 0]].copy()
    for v in range(1, model.n):
        probs *= model.kernels[v, states[:, model.tree.parent[v]], states[:, v]]
    return ExactMeasure(space=model.space, n=model.n, probs=probs)


def configuration_ones(n: int, h: int = 2) -> np.ndarray:
    """Number of coordinates in state 1 for each configuration rank."""
    ranks = np.arange(h**n, dtype=np.int64)
    return (decode_ranks(ranks, n, h) == 1).sum(axis=1)


# -------------------------------------------------------------------- #
# Exact DP over subtrees (binary state space)                           #
# -------------------------------------------------------------------- #


def _require_binary(model: MarkovTreeModel) -> None:
    if model.space.size != 2:
        raise ValueError("subtree DP requires a binary state space")
    if model.n > _DP_GUARD:
        raise ValueError(f"DP guarded at n <= {_DP_GUARD}, model has {model.n}")


def magnetization_distribution(model: MarkovTreeModel) -> MagnetizationPGF:
    """Exact law of the number of ones, by bottom-up convolution of
    per-spin subtree count polynomials (O(n^2) coefficient work)."""
    _require_binary(model)
    tree = model.tree
    tables: list[np.ndarray | None] = [None] * tree.n
    for v in range(tree.n - 1, -1, -1):
        acc0 = np.array([1.0])
        acc1 = np.array([1.0])
        for c in tree.children(v):
            kern = model.kernels[c]
            sub = tables[c]
            assert sub is not None
            acc0 = np.convolve(acc0, kern[0, 0] * sub[0] + kern[0, 1] * sub[1])
            acc1 = np.convolve(acc1, kern[1, 0] * sub[0] + kern[1, 1] * sub[1])
            tables[c] = None
        own = np.zeros((2, acc0.size + 1))
        own[0, : acc0.size] = acc0  # spin 0 adds no one
        own[1, 1:] = acc1  # spin 1 adds its own one
        tables[v] = own
    root = tables[0]
    assert root is not None
    coeffs = model.root_dist[0] * root[0] + model.root_dist[1] * root[1]
    return MagnetizationPGF(coefficients=coeffs)


def exp_moment(model: MarkovTreeModel, f_weights, lam: float) -> float:
    """Exact centered exponential moment E exp(n lam (f - Ef)) of a linear
    observable f(x) = (1/n) sum_v c_v(x_v), where f_weights[v] holds
    (c_v(0), c_v(1)).  The observable must be 1-Lipschitz coordinatewise:
    |c_v(0) - c_v(1)| <= 1.  Centering uses the exact per-vertex marginals.
    """
    _require_binary(model)
    weights = np.asarray(f_weights, dtype=np.float64)
    if weights.shape != (model.n, 2):
        raise ValueError(f"f_weights must have shape ({model.n}, 2)")
    gaps = np.abs(weights[:, 0] - weights[:, 1])
    if np.any(gaps > 1.0 + _LIPSCHITZ_TOL):
        v = int(np.argmax(gaps))
        raise ValueError(
            f"observable is not 1-Lipschitz: coordinate {v} moves by {gaps[v]}"
        )
    lam = float(lam)
    tree = model.tree
    # per-vertex pairs scaled by a running log factor to dodge overflow
    vals: list[np.ndarray | None] = [None] * tree.n
    logs = np.zeros(tree.n, dtype=np.float64)
    for v in range(tree.n - 1, -1, -1):
        g = np.exp(lam * (weights[v] - weights[v].max()))
        log_v = lam * weights[v].max()
        for c in tree.children(v):
            sub = vals[c]
            assert sub is not None
            g = g * (model.kernels[c] @ sub)
            log_v += logs[c]
            vals[c] = None
            top = g.max()
            if top > 0:
                g = g / top
                log_v += math.log(top)
        vals[v] = g
        logs[v] = log_v
    root = vals[0]
    assert root is not None
    mean = float(np.sum(model.vertex_marginals() * weights))
    log_total = math.log(float(model.root_dist @ root)) + logs[0] - lam * mean
    return math.exp(log_total)


def variance_magnetization(model: IsingModel) -> tuple[float, float | None]:
    """Variance of the density of ones: the pair-sum formula value, and the
    exact DP value when the model is within the DP guard."""
    s = pair_distance_sum(model.tree, model.b, method="fast")
    formula = s / (4.0 * model.n**2)
    exact = None
    if model.n <= _DP_GUARD:
        exact = magnetization_distribution(model).variance_of_density()
    return formula, exact


# -------------------------------------------------------------------- #
# Model text format                                                     #
# -------------------------------------------------------------------- #


def format_model(tree_path: str, p: float | None = None, kernel: np.ndarray | None = None,
                 root_dist: np.ndarray | None = None) -> str:
    """Serialize a model description referencing a tree file."""
    lines = [f"tree={tree_path}"]
    if p is not None:
        lines.append(f"p={p!r}")
    else:
        if kernel is None or root_dist is None:
            raise ValueError("general models need both a kernel table and a root row")
        h = root_dist.size
        lines.append(f"states={h}")
        lines.append("root=" + " ".join(repr(float(x)) for x in root_dist))
        lines.append("kernel=" + " ".join(repr(float(x)) for x in kernel.ravel()))
    return "\n".join(lines) + "\n"


def parse_model(text: str, read_tree) -> MarkovTreeModel:
    """Parse the model text format; ``read_tree(path)`` resolves the tree
    file reference.  Raises with the offending line number."""
    tree = None
    p = None
    states = None
    root = None
    shared_kernel = None
    per_vertex: dict[int, np.ndarray] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        try:
            if key == "tree":
                tree = read_tree(value.strip())
            elif key == "p":
                p = float(value)
            elif key == "states":
                states = int(value)
            elif key == "root":
                root = np.array([float(x) for x in value.split()])
            elif key == "kernel":
                shared_kernel = np.array([float(x) for x in value.split()])
            elif key.startswith("kernel:"):
                per_vertex[int(key.split(":", 1)[1])] = np.array(
                    [float(x) for x in value.split()]
                )
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    if tree is None:
        raise ValueError("model file must reference a tree file (tree=...)")
    if p is not None:
        return IsingModel(tree, p)
    if states is None or root is None or shared_kernel is None:
        raise ValueError("general models need states=, root= and kernel= lines")
    h = states
    base = shared_kernel.reshape(h, h)
    kernels = np.broadcast_to(base, (tree.n, h, h)).copy()
    for v, flat in per_vertex.items():
        kernels[v] = flat.reshape(h, h)
    return MarkovTreeModel(tree, StateSpace.discrete(h), root, kernels)

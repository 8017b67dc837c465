"""Exact transportation distance, relative entropy, and Lipschitz
extension on small finite configuration spaces.

The solver is successive-shortest-paths min-cost flow on the dense
bipartite support graph, with Dijkstra over node potentials.  Costs are
scaled to integers (1e9) so all shortest-path arithmetic is exact int64
and the algorithm cannot cycle on floating-point ties; the reported cost
is re-accumulated against the unscaled distances.  Optimality is
certified by complementary slackness with the recovered dual potentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from treeconc.broadcast import ExactMeasure

COST_SCALE = 10**9
_SUPPORT_GUARD = 4096
_ENUM_GUARD = 2**20
_MASS_EPS = 1e-15
_INT_INF = np.iinfo(np.int64).max // 4


@dataclass(frozen=True)
class WeightedHamming:
    """Per-coordinate weighted average of a base metric on states:
    d(x, y) = (1/n) * sum_i weights[i] * base(x_i, y_i)."""

    n: int
    weights: np.ndarray
    base_metric: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))
        object.__setattr__(
            self, "base_metric", np.asarray(self.base_metric, dtype=np.float64)
        )
        if self.weights.shape != (self.n,):
            raise ValueError(f"need {self.n} coordinate weights, got {self.weights.shape}")
        if np.any(self.weights <= 0):
            raise ValueError("coordinate weights must be positive")

    @staticmethod
    def uniform(n: int, base_metric: np.ndarray) -> "WeightedHamming":
        return WeightedHamming(n=n, weights=np.ones(n), base_metric=base_metric)

    def distance(self, x, y) -> float:
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        return float(np.sum(self.weights * self.base_metric[x, y]) / self.n)

    def pairwise(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Distance matrix between state matrices xs (m, n) and ys (k, n)."""
        out = np.zeros((xs.shape[0], ys.shape[0]), dtype=np.float64)
        for i in range(self.n):
            out += self.weights[i] * self.base_metric[np.ix_(xs[:, i], ys[:, i])]
        out /= self.n
        return out


def decode_ranks(ranks: np.ndarray, n: int, h: int) -> np.ndarray:
    """Configuration ranks to state matrices; coordinate 0 is the most
    significant digit (rank = sum_v x_v * h^(n-1-v))."""
    ranks = np.asarray(ranks, dtype=np.int64)
    out = np.empty((ranks.size, n), dtype=np.int64)
    for v in range(n):
        out[:, v] = (ranks // h ** (n - 1 - v)) % h
    return out


# -------------------------------------------------------------------- #
# Min-cost flow                                                         #
# -------------------------------------------------------------------- #


@dataclass(frozen=True)
class TransportPlan:
    """Optimal coupling over the two supports, with its certificate."""

    coupling: np.ndarray
    cost: float
    mu_support: np.ndarray
    nu_support: np.ndarray
    potentials_mu: np.ndarray
    potentials_nu: np.ndarray
    dual_feasibility_slack: float
    slackness_gap: float
    dropped_mass: float

    @property
    def certified(self) -> bool:
        return self.dual_feasibility_slack >= -1e-9 and self.slackness_gap <= 1e-9


def min_cost_transport(
    mu: np.ndarray, nu: np.ndarray, cost: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Exact optimal transport between two finite distributions.

    Returns (optimal cost against the unscaled cost matrix, flow matrix,
    source potentials, sink potentials).  Potentials are in scaled integer
    units and satisfy u_i + v_j <= cost_int[i, j] with equality on every
    flow-carrying arc.
    """
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    m, k = cost.shape
    if mu.shape != (m,) or nu.shape != (k,):
        raise ValueError("marginal sizes must match the cost matrix")
    if abs(mu.sum() - nu.sum()) > 1e-9:
        raise ValueError(f"total masses differ: {mu.sum()} vs {nu.sum()}")

    cost_int = np.rint(cost * COST_SCALE).astype(np.int64)
    flow = np.zeros((m, k), dtype=np.float64)
    u = np.zeros(m, dtype=np.int64)
    w = np.zeros(k, dtype=np.int64)

    if m == 1:
        flow[0, :] = nu
        w = cost_int[0, :].copy()
        return float(np.sum(flow * cost)), flow, np.zeros(1, dtype=np.int64), w
    if k == 1:
        flow[:, 0] = mu
        u = cost_int[:, 0].copy()
        return float(np.sum(flow * cost)), flow, u, np.zeros(1, dtype=np.int64)

    surplus = mu.copy()
    deficit = nu.copy()
    max_rounds = 10 * (m + k) + 100
    for _ in range(max_rounds):
        if surplus.sum() <= _MASS_EPS * max(1.0, m):
            break
        dist_s = np.where(surplus > _MASS_EPS, 0, _INT_INF).astype(np.int64)
        dist_t = np.full(k, _INT_INF, dtype=np.int64)
        done_s = np.zeros(m, dtype=bool)
        done_t = np.zeros(k, dtype=bool)
        from_s = np.full(k, -1, dtype=np.int64)  # source that relaxed each sink
        from_t = np.full(m, -1, dtype=np.int64)  # sink that relaxed each source
        target = -1
        while True:
            cand_s = np.where(done_s, _INT_INF, dist_s)
            cand_t = np.where(done_t, _INT_INF, dist_t)
            i = int(np.argmin(cand_s))
            j = int(np.argmin(cand_t))
            if min(cand_s[i], cand_t[j]) >= _INT_INF:
                break
            if cand_t[j] <= cand_s[i]:
                done_t[j] = True
                if deficit[j] > _MASS_EPS:
                    target = j
                    break
                # leave along backward (flow-carrying) arcs, reduced length 0
                rows = np.nonzero((flow[:, j] > _MASS_EPS) & ~done_s)[0]
                better = dist_t[j] < dist_s[rows]
                dist_s[rows[better]] = dist_t[j]
                from_t[rows[better]] = j
            else:
                done_s[i] = True
                nd = dist_s[i] + cost_int[i, :] - u[i] - w
                better = (nd < dist_t) & ~done_t
                dist_t[better] = nd[better]
                from_s[better] = i
        if target < 0:
            raise RuntimeError("transport network disconnected; masses unbalanced")

        # Dual update keeps all reduced costs nonnegative and flow arcs tight.
        d_star = dist_t[target]
        u += np.maximum(d_star - dist_s, 0)
        w -= np.maximum(d_star - dist_t, 0)

        # Walk the augmenting path backwards (alternating forward arcs
        # (i, j) and flow-carrying reverse arcs), find the bottleneck,
        # apply it.  path[idx] = (i, j) is a forward arc; the reverse arc
        # between consecutive entries is (path[idx][0], path[idx+1][1]).
        path = []
        j = target
        while True:
            i = int(from_s[j])
            path.append((i, j))
            if from_t[i] < 0:
                break
            j = int(from_t[i])
        amount = min(surplus[path[-1][0]], deficit[target])
        for idx in range(len(path) - 1):
            amount = min(amount, flow[path[idx][0], path[idx + 1][1]])
        for idx, (i, j) in enumerate(path):
            flow[i, j] += amount
            if idx + 1 < len(path):
                flow[i, path[idx + 1][1]] -= amount
        surplus[path[-1][0]] -= amount
        deficit[target] -= amount
    else:
        raise RuntimeError("augmentation cap exceeded; solver failed to converge")

    return float(np.sum(flow * cost)), flow, u, w


def wasserstein_from_probs(
    mu_probs: np.ndarray,
    nu_probs: np.ndarray,
    n: int,
    h: int,
    metric: WeightedHamming,
) -> tuple[float, TransportPlan]:
    mu_idx = np.nonzero(mu_probs > _MASS_EPS)[0]
    nu_idx = np.nonzero(nu_probs > _MASS_EPS)[0]
    if mu_idx.size + nu_idx.size > _SUPPORT_GUARD:
        raise ValueError(
            f"combined support {mu_idx.size + nu_idx.size} exceeds guard {_SUPPORT_GUARD}"
        )
    mu_s = mu_probs[mu_idx]
    nu_s = nu_probs[nu_idx]
    dropped = float((1.0 - mu_s.sum()) + (1.0 - nu_s.sum()))
    mu_s = mu_s / mu_s.sum()
    nu_s = nu_s / nu_s.sum()

    cost = metric.pairwise(decode_ranks(mu_idx, n, h), decode_ranks(nu_idx, n, h))
    value, flow, u, w = min_cost_transport(mu_s, nu_s, cost)

    cost_int = np.rint(cost * COST_SCALE).astype(np.int64)
    reduced = cost_int - u[:, None] - w[None, :]
    feas = float(reduced.min()) / COST_SCALE
    carrying = flow > _MASS_EPS
    gap = float(np.abs(reduced[carrying]).max()) / COST_SCALE if carrying.any() else 0.0
    plan = TransportPlan(
        coupling=flow,
        cost=value,
        mu_support=mu_idx,
        nu_support=nu_idx,
        potentials_mu=u,
        potentials_nu=w,
        dual_feasibility_slack=feas,
        slackness_gap=gap,
        dropped_mass=dropped,
    )
    return value, plan


def wasserstein(
    mu: "ExactMeasure", nu: "ExactMeasure", metric: WeightedHamming | None = None
) -> tuple[float, TransportPlan]:
    """Transportation distance between two explicit measures on the same
    configuration space, with the optimal plan and its certificate."""
    if mu.n != nu.n or mu.space.size != nu.space.size:
        raise ValueError(
            f"mismatched spaces: {mu.n} coords over {mu.space.size} states vs "
            f"{nu.n} over {nu.space.size}"
        )
    if metric is None:
        metric = WeightedHamming.uniform(mu.n, mu.space.metric)
    return wasserstein_from_probs(mu.probs, nu.probs, mu.n, mu.space.size, metric)


def relative_entropy(mu: "ExactMeasure", nu: "ExactMeasure") -> float:
    """KL divergence in nats; +inf when mu is not absolutely continuous
    with respect to nu.  0 log 0 counts as 0."""
    if mu.n != nu.n or mu.space.size != nu.space.size:
        raise ValueError("mismatched spaces")
    p = mu.probs
    q = nu.probs
    active = p > 0
    if np.any(q[active] == 0):
        return math.inf
    return float(np.sum(p[active] * np.log(p[active] / q[active])))


def mcshane_extension(
    values: dict[int, float], metric: WeightedHamming, h: int
) -> np.ndarray:
    """Total 1-Lipschitz extension of a partial function on configurations,
    by infimal convolution with the metric cone: out(x) = min over anchors
    y of values[y] + d(x, y).  Returns one value per configuration rank."""
    if not values:
        raise ValueError("need at least one anchor value")
    total = h**metric.n
    if total > _ENUM_GUARD:
        raise ValueError(f"configuration space {total} exceeds guard {_ENUM_GUARD}")
    anchors = np.fromiter(values.keys(), dtype=np.int64)
    anchor_vals = np.fromiter((values[int(a)] for a in anchors), dtype=np.float64)
    states = decode_ranks(np.arange(total, dtype=np.int64), metric.n, h)
    anchor_states = decode_ranks(anchors, metric.n, h)
    out = np.full(total, np.inf, dtype=np.float64)
    for a in range(anchors.size):
        d = np.zeros(total, dtype=np.float64)
        for i in range(metric.n):
            d += metric.weights[i] * metric.base_metric[states[:, i], anchor_states[a, i]]
        np.minimum(out, anchor_vals[a] + d / metric.n, out=out)
    return out


def product_coupling_identity(
    mus: list[np.ndarray],
    nus: list[np.ndarray],
    weights: np.ndarray,
    base_metric: np.ndarray,
) -> tuple[float, float]:
    """Both sides of the product-measure identity: the weighted-Hamming
    transport distance between product measures against the weighted
    average of the per-coordinate distances."""
    n = len(mus)
    if len(nus) != n:
        raise ValueError("need one nu per coordinate")
    weights = np.asarray(weights, dtype=np.float64)
    base_metric = np.asarray(base_metric, dtype=np.float64)
    h = base_metric.shape[0]

    mu: np.ndarray = np.asarray(mus[0], dtype=np.float64)
    nu: np.ndarray = np.asarray(nus[0], dtype=np.float64)
    for i in range(1, n):
        mu = np.kron(mu, np.asarray(mus[i], dtype=np.float64))
        nu = np.kron(nu, np.asarray(nus[i], dtype=np.float64))
    lhs, _ = wasserstein_from_probs(mu, nu, n, h, WeightedHamming(n, weights, base_metric))

    rhs = 0.0
    for i in range(n):
        di, _, _, _ = min_cost_transport(
            np.asarray(mus[i], dtype=np.float64),
            np.asarray(nus[i], dtype=np.float64),
            base_metric,
        )
        rhs += float(weights[i]) * di
    return lhs, rhs / n

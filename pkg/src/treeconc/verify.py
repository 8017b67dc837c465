"""Executable checkers for the concentration inequalities and identities.

Every checker evaluates both sides of its inequality exactly (DP,
enumeration, or min-cost flow; never Monte Carlo) over a family of test
instances and reports the worst achieved slack (bound minus achieved
value).  Identity checks contribute the negated absolute defect as their
slack, so every report passes exactly when worst_slack >= -tolerance.

Monte Carlo appears only as advisory fields inside witnesses, never in
pass/fail decisions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from treeconc.broadcast import (
    ExactMeasure,
    IsingModel,
    MarkovTreeModel,
    configuration_ones,
    exact_measure,
    exp_moment,
    kernel_lipschitz,
    magnetization_distribution,
    sample,
    variance_magnetization,
)
from treeconc.delta import delta_profile, pair_distance_sum
from treeconc.spectral import breadth_first_order, mixing_matrix, mixing_norms
from treeconc.transport import (
    WeightedHamming,
    mcshane_extension,
    relative_entropy,
    wasserstein,
)
from treeconc.tree import GeneratorSpec, RootedTree, generate

DEFAULT_TOLERANCE = 1e-9
IDENTITY_SCALE = 10.0  # folds a 1e-10 identity budget into the 1e-9 frame
_T1_GUARD = 8
DEFAULT_LAMBDAS = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)
DEFAULT_EPSILONS = (0.1, 0.25, 0.4, 0.5)
DEFAULT_TILT_LAMBDAS = (-1.0, -0.5, 0.5, 1.0)


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of one checker over all its instances."""

    name: str
    instances_checked: int
    worst_slack: float
    witness: dict
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def passed(self) -> bool:
        return self.worst_slack >= -self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "instances": self.instances_checked,
            "worst_slack": self.worst_slack,
            "passed": self.passed,
            "witness": self.witness,
        }


class _SlackTracker:
    """Min-reduction over instance slacks with the achieving witness."""

    def __init__(self):
        self.count = 0
        self.worst = math.inf
        self.witness: dict = {}

    def add(self, slack: float, witness: dict) -> None:
        self.count += 1
        if slack < self.worst:
            self.worst = slack
            self.witness = witness

    def merge(self, report: "InequalityReport") -> None:
        self.count += report.instances_checked
        if report.worst_slack < self.worst:
            self.worst = report.worst_slack
            self.witness = report.witness

    def report(self, name: str, tolerance: float = DEFAULT_TOLERANCE) -> InequalityReport:
        worst = self.worst if self.count else 0.0
        return InequalityReport(
            name=name,
            instances_checked=self.count,
            worst_slack=float(worst),
            witness=self.witness,
            tolerance=tolerance,
        )


# -------------------------------------------------------------------- #
# Observables                                                            #
# -------------------------------------------------------------------- #


@dataclass(frozen=True)
class LinearObservable:
    """f(x) = (1/n) sum_v weights[v, x_v]; 1-Lipschitz when every
    coordinate gap is at most 1."""

    label: str
    weights: np.ndarray


@dataclass(frozen=True)
class TabulatedObservable:
    """f given by one value per configuration rank."""

    label: str
    values: np.ndarray


def magnetization_observable(n: int) -> LinearObservable:
    return LinearObservable(label="magnetization", weights=np.tile([0.0, 1.0], (n, 1)))


def binary_hamming_matrix(n: int) -> np.ndarray:
    """Normalized Hamming distances between all 2^n binary configurations."""
    ranks = np.arange(2**n, dtype=np.int64)
    xor = ranks[:, None] ^ ranks[None, :]
    table = np.array([bin(i).count("1") for i in range(1 << min(n, 12))], dtype=np.int64)
    if n <= 12:
        counts = table[xor]
    else:
        counts = table[xor >> 12] + table[xor & ((1 << 12) - 1)]
    return counts / n


def mcshane_observables(n: int, count: int, seed: int) -> list[TabulatedObservable]:
    """Seeded random 1-Lipschitz observables on the binary n-cube, built by
    extending random anchor values through the metric cone."""
    rng = np.random.default_rng(seed)
    metric = WeightedHamming.uniform(n, 1.0 - np.eye(2))
    out = []
    total = 2**n
    for i in range(count):
        n_anchors = int(rng.integers(1, min(8, total) + 1))
        anchors = rng.choice(total, size=n_anchors, replace=False)
        vals = {int(a): float(rng.uniform(0.0, 1.0)) for a in anchors}
        out.append(TabulatedObservable(label=f"mcshane[{i}]", values=mcshane_extension(vals, metric, h=2)))
    return out


def model_contraction(model: MarkovTreeModel) -> float:
    """Kernel Lipschitz constant; closed form for the flip model."""
    if isinstance(model, IsingModel):
        return model.b
    return kernel_lipschitz(model)


def verify_lipschitz(values: np.ndarray, distances: np.ndarray) -> tuple[bool, tuple]:
    """Pairwise 1-Lipschitz check on an enumerated space; returns the
    first violating pair when there is one."""
    diffs = np.abs(values[:, None] - values[None, :])
    bad = diffs > distances + 1e-12
    if bad.any():
        i, j = np.unravel_index(int(np.argmax(bad)), bad.shape)
        return False, (int(i), int(j))
    return True, ()


# -------------------------------------------------------------------- #
# Checkers                                                               #
# -------------------------------------------------------------------- #


def check_exp_moment(
    model: MarkovTreeModel,
    functions: list[LinearObservable | TabulatedObservable] | None = None,
    lambdas=DEFAULT_LAMBDAS,
    label: str = "",
    mcshane_count: int = 5,
    seed: int = 0,
) -> InequalityReport:
    """Exponential-moment bound: for centered 1-Lipschitz f,
    E exp(n lam f) <= exp(lam^2 Delta^2 / 8)."""
    n = model.n
    b = model_contraction(model)
    delta_sq = delta_profile(model.tree, b).delta_sq
    if functions is None:
        functions = [magnetization_observable(n)]
        functions += mcshane_observables(n, mcshane_count, seed)
    needs_enum = any(isinstance(f, TabulatedObservable) for f in functions)
    mu = exact_measure(model) if needs_enum else None
    distances = binary_hamming_matrix(n) if needs_enum else None

    tracker = _SlackTracker()
    for f in functions:
        if isinstance(f, TabulatedObservable):
            ok, pair = verify_lipschitz(f.values, distances)
            if not ok:
                raise ValueError(
                    f"observable {f.label} is not 1-Lipschitz at configuration pair {pair}"
                )
            mean = float(mu.probs @ f.values)
            centered = f.values - mean
        for lam in lambdas:
            if isinstance(f, LinearObservable):
                moment = exp_moment(model, f.weights, lam)
            else:
                moment = float(mu.probs @ np.exp(n * lam * centered))
            bound = math.exp(lam * lam * delta_sq / 8.0)
            tracker.add(
                bound - moment,
                {"instance": label, "function": f.label, "lambda": lam,
                 "moment": moment, "bound": bound},
            )
    return tracker.report("exp_moment")


def tilt_measure(nu: ExactMeasure, lam: float) -> ExactMeasure:
    """Exponential tilt of nu by the number of ones (n lam f weighting)."""
    ones = configuration_ones(nu.n, nu.space.size)
    w = nu.probs * np.exp(lam * ones)
    return ExactMeasure(space=nu.space, n=nu.n, probs=w / w.sum())


def condition_on_vertex(nu: ExactMeasure, v: int, s: int) -> ExactMeasure:
    ranks = np.arange(nu.probs.size, dtype=np.int64)
    bit = (ranks // nu.space.size ** (nu.n - 1 - v)) % nu.space.size
    probs = np.where(bit == s, nu.probs, 0.0)
    return ExactMeasure(space=nu.space, n=nu.n, probs=probs / probs.sum())


def default_t1_family(nu: ExactMeasure) -> list[tuple[str, ExactMeasure]]:
    """Point masses at every configuration, four exponential tilts of the
    ones-count, and all single-vertex conditionings."""
    out: list[tuple[str, ExactMeasure]] = []
    total = nu.probs.size
    for r in range(total):
        probs = np.zeros(total)
        probs[r] = 1.0
        out.append((f"point[{r}]", ExactMeasure(space=nu.space, n=nu.n, probs=probs)))
    for lam in DEFAULT_TILT_LAMBDAS:
        out.append((f"tilt[{lam}]", tilt_measure(nu, lam)))
    for v in range(nu.n):
        for s in range(nu.space.size):
            out.append((f"cond[x{v}={s}]", condition_on_vertex(nu, v, s)))
    return out


def check_t1(
    model: MarkovTreeModel,
    mus: list[tuple[str, ExactMeasure]] | None = None,
    label: str = "",
) -> InequalityReport:
    """Transportation-entropy bound: dbar(mu, nu) <= (Delta/n) sqrt(D/2),
    with both sides exact (flow solver / log-sum)."""
    n = model.n
    if n > _T1_GUARD:
        raise ValueError(f"transportation check guarded at n <= {_T1_GUARD}, got {n}")
    b = model_contraction(model)
    big_delta = delta_profile(model.tree, b).big_delta
    nu = exact_measure(model)
    if mus is None:
        mus = default_t1_family(nu)

    tracker = _SlackTracker()
    vacuous = 0
    for mu_label, mu in mus:
        div = relative_entropy(mu, nu)
        if math.isinf(div):
            vacuous += 1
            tracker.add(math.inf, {"instance": label, "mu": mu_label, "vacuous": True})
            continue
        dist, _ = wasserstein(mu, nu)
        rhs = (big_delta / n) * math.sqrt(div / 2.0)
        tracker.add(
            rhs - dist,
            {"instance": label, "mu": mu_label, "dbar": dist,
             "entropy": div, "bound": rhs},
        )
    report = tracker.report("transportation_entropy")
    report.witness.setdefault("vacuous_instances", vacuous)
    return report


def check_tail(
    model: MarkovTreeModel,
    epsilons=DEFAULT_EPSILONS,
    label: str = "",
    mc_samples: int = 0,
    seed: int = 0,
) -> InequalityReport:
    """Two-sided tail of the density of ones against 2 exp(-2 n^2 eps^2 /
    Delta^2); tails are exact from the counting DP.  Optional Monte Carlo
    tail estimates ride along as advisory data only."""
    n = model.n
    b = model_contraction(model)
    delta_sq = delta_profile(model.tree, b).delta_sq
    pgf = magnetization_distribution(model)
    empirical = {}
    if mc_samples > 0:
        draws = sample(model, mc_samples, seed)
        dev = np.abs(draws.sum(axis=1) / n - pgf.mean_count() / n)
        for eps in epsilons:
            empirical[eps] = float((dev >= eps - 1e-15).mean())

    tracker = _SlackTracker()
    for eps in epsilons:
        exact = pgf.tail_probability(eps)
        bound = 2.0 * math.exp(-2.0 * n * n * eps * eps / delta_sq)
        witness = {"instance": label, "eps": eps, "tail": exact, "bound": bound}
        if empirical:
            witness["monte_carlo_tail"] = empirical[eps]
        tracker.add(bound - exact, witness)
    return tracker.report("tail_bound")


def check_optimality_chain(tree: RootedTree, p: float, label: str = "") -> InequalityReport:
    """Sharpness chain for the flip model: the pair sum S satisfies
    4 n^2 Var = S (identity, 1e-10 budget, folded x10 into the slack) and
    S >= (1 - b^2) Delta^2, and the implied lower constant never exceeds
    the upper constant."""
    model = IsingModel(tree, p)
    b = model.b
    n = tree.n
    s = pair_distance_sum(tree, b, method="fast")
    prof = delta_profile(tree, b)
    tracker = _SlackTracker()

    _, exact_var = variance_magnetization(model)
    if exact_var is not None:
        defect = abs(4.0 * n * n * exact_var - s)
        tracker.add(
            -IDENTITY_SCALE * defect,
            {"instance": label, "check": "variance_identity", "defect": defect},
        )
    slack_lower = s - (1.0 - b * b) * prof.delta_sq
    tracker.add(
        slack_lower,
        {"instance": label, "check": "pair_sum_lower_bound", "S": s,
         "scaled_delta_sq": (1.0 - b * b) * prof.delta_sq},
    )
    c_lower = prof.big_delta * math.sqrt(1.0 - b * b) / 2.0
    tracker.add(
        prof.big_delta - c_lower,
        {"instance": label, "check": "constant_gap", "lower": c_lower,
         "upper": prof.big_delta},
    )
    return tracker.report("optimality_chain")


def check_mixing_corollary(
    tree: RootedTree, b: float, label: str = "", n_orders: int = 3, seed: int = 0
) -> InequalityReport:
    """Mixing-matrix identities: the max row sum equals the largest
    per-vertex profile value, the l2 norm of the row-sum vector equals the
    aggregate profile norm, and the normalized aggregate never exceeds the
    l2 operator norm; repeated under random breadth-first orders."""
    if tree.n > 4096:
        raise ValueError("mixing corollary check guarded at n <= 4096")
    prof = delta_profile(tree, b)
    rng = np.random.default_rng(seed)
    orders = [None] + [breadth_first_order(tree, rng) for _ in range(n_orders)]
    tracker = _SlackTracker()
    for which, order in enumerate(orders):
        norms = mixing_norms(mixing_matrix(tree, b, order=order))
        order_label = "canonical" if order is None else f"shuffled[{which - 1}]"
        tracker.add(
            -abs(norms.inf_norm - prof.delta.max()),
            {"instance": label, "order": order_label, "check": "row_sum_identity"},
        )
        tracker.add(
            -abs(float(np.linalg.norm(norms.row_sums)) - prof.big_delta),
            {"instance": label, "order": order_label, "check": "ones_image_identity"},
        )
        tracker.add(
            norms.two_norm - prof.big_delta / math.sqrt(tree.n),
            {"instance": label, "order": order_label, "check": "two_norm_dominates"},
        )
    return tracker.report("mixing_corollary")


# -------------------------------------------------------------------- #
# Corpus and driver                                                      #
# -------------------------------------------------------------------- #


def _random_tree(n: int, rng: np.random.Generator) -> RootedTree:
    parent = np.empty(n, dtype=np.int64)
    parent[0] = -1
    for i in range(1, n):
        parent[i] = rng.integers(0, i)
    return RootedTree(parent)


def verification_corpus(seed: int = 0) -> list[tuple[str, RootedTree]]:
    """The shipped instance set: named small trees plus seeded random ones."""
    rng = np.random.default_rng(seed)
    corpus: list[tuple[str, RootedTree]] = [
        ("single", generate(GeneratorSpec("path", length=0))),
        ("edge", generate(GeneratorSpec("path", length=1))),
        ("path4", generate(GeneratorSpec("path", length=4))),
        ("star2", RootedTree(np.array([-1, 0, 0]))),
        ("star5", RootedTree(np.array([-1, 0, 0, 0, 0, 0]))),
        ("binary2", generate(GeneratorSpec("dary", degree=2, depth=2))),
        ("threeone2", generate(GeneratorSpec("threeone", depth=2))),
        ("ternary1", generate(GeneratorSpec("dary", degree=3, depth=1))),
    ]
    for i, n in enumerate((6, 8, 10, 12, 40, 120)):
        corpus.append((f"random{n}", _random_tree(n, rng)))
    return corpus


def run_all_checks(seed: int = 0) -> list[InequalityReport]:
    """Every checker over the shipped corpus; deterministic given seed."""
    corpus = verification_corpus(seed)
    reports: list[InequalityReport] = []

    exp_tracker = _SlackTracker()
    t1_tracker = _SlackTracker()
    tail_tracker = _SlackTracker()
    chain_tracker = _SlackTracker()
    mixing_tracker = _SlackTracker()

    for name, tree in corpus:
        if tree.n <= 12:
            for p in (0.25, 0.4):
                exp_tracker.merge(
                    check_exp_moment(IsingModel(tree, p), label=f"{name},p={p}", seed=seed)
                )
        if tree.n <= _T1_GUARD:
            t1_tracker.merge(check_t1(IsingModel(tree, 0.25), label=f"{name},p=0.25"))
        for p in (0.1, 0.25, 0.5):
            tail_tracker.merge(check_tail(IsingModel(tree, p), label=f"{name},p={p}"))
        for p in (0.05, 0.25, 0.5):
            chain_tracker.merge(check_optimality_chain(tree, p, label=f"{name},p={p}"))
        for b in (0.3, 0.6, 0.9):
            mixing_tracker.merge(
                check_mixing_corollary(tree, b, label=f"{name},b={b}", seed=seed)
            )

    reports.append(exp_tracker.report("exp_moment"))
    reports.append(t1_tracker.report("transportation_entropy"))
    reports.append(tail_tracker.report("tail_bound"))
    reports.append(chain_tracker.report("optimality_chain"))
    reports.append(mixing_tracker.report("mixing_corollary"))
    return reports

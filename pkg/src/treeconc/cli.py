"""Command-line surface.

Every command binds one library operation and serializes its result with
fixed, locale-independent formatting (12 significant digits, LF line
endings), so identical invocations produce byte-identical files.
TREECONC_THREADS is honored as an upper bound on worker parallelism; the
current implementation runs sequentially, which trivially respects any
cap and keeps outputs independent of the setting.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from treeconc.broadcast import IsingModel, exact_measure, parse_model, sample
from treeconc.delta import (
    DeltaSeries,
    dary_delta_series,
    delta_profile,
    delta_series,
    threeone_delta_series,
)
from treeconc.spectral import mixing_matrix, mixing_norms, q_power_norm_exact, q_power_norm_iterative
from treeconc.transport import WeightedHamming, wasserstein_from_probs
from treeconc.tree import GeneratorSpec, RootedTree, generate
from treeconc.verify import run_all_checks

_FIGURE1_B_TOKENS = ("0.5", "isqrt3", "0.6", "isqrt2", "0.75")
_FIGURE1_KMAX = {"threeone": 25, "dary2": 30}


def fmt(x) -> str:
    """12 significant digits, locale independent."""
    return f"{float(x):.12g}"


def parse_b_token(token: str) -> float:
    """Decimal or one of the symbolic tokens isqrt2 / isqrt3."""
    symbolic = {"isqrt2": 1.0 / math.sqrt(2.0), "isqrt3": 1.0 / math.sqrt(3.0)}
    if token in symbolic:
        return symbolic[token]
    try:
        return float(token)
    except ValueError as exc:
        raise ValueError(f"bad b token {token!r}; use a decimal, isqrt2 or isqrt3") from exc


def thread_cap() -> int:
    """Parallelism cap from TREECONC_THREADS (>= 1); outputs never depend
    on it."""
    raw = os.environ.get("TREECONC_THREADS")
    if raw is None:
        return 1
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"TREECONC_THREADS must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ValueError(f"TREECONC_THREADS must be >= 1, got {cap}")
    return cap


def _sanitize(obj):
    """Clamp floats to 12 significant digits for stable JSON bytes."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return float(fmt(obj))
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    return obj


def emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def emit_json(obj, out: str | None) -> None:
    emit(json.dumps(_sanitize(obj), indent=2) + "\n", out)


def load_tree_file(path: str) -> RootedTree:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ValueError(f"{path}: {exc.strerror}") from exc
    try:
        return RootedTree.from_text(text)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def resolve_tree(args) -> RootedTree:
    if getattr(args, "tree", None):
        return load_tree_file(args.tree)
    if getattr(args, "gen", None):
        return generate(GeneratorSpec.parse(args.gen))
    raise ValueError("supply a tree via --tree FILE or --gen SPEC")


def resolve_b(args) -> float:
    has_b = getattr(args, "b", None) is not None
    has_p = getattr(args, "p", None) is not None
    if has_b == has_p:
        raise ValueError("supply exactly one of --b or --p")
    if has_b:
        return parse_b_token(args.b)
    p = float(args.p)
    if not 0.0 < p <= 0.5:
        raise ValueError(f"flip probability must lie in (0, 1/2], got {p}")
    return 1.0 - 2.0 * p


# -------------------------------------------------------------------- #
# Commands                                                              #
# -------------------------------------------------------------------- #


def cmd_gen_tree(args) -> int:
    tree = generate(GeneratorSpec.parse(args.gen))
    emit(tree.to_text(), args.out)
    return 0


def cmd_delta(args) -> int:
    tree = resolve_tree(args)
    b = resolve_b(args)
    prof = delta_profile(tree, b)
    payload = {
        "n": tree.n,
        "b": b,
        "big_delta": prof.big_delta,
        "delta_sq": prof.delta_sq,
        "delta_root": float(prof.delta[0]),
        "delta_max": float(prof.delta.max()),
    }
    if tree.n <= 10_000:
        payload["delta"] = prof.delta
    emit_json(payload, args.out)
    return 0


def _series_csv(series: DeltaSeries) -> str:
    lines = ["k,n_vertices,delta,delta_sq_over_n"]
    ratios = series.ratios
    deltas = series.deltas
    for i, k in enumerate(series.ks):
        lines.append(
            f"{int(k)},{int(series.vertex_counts[i])},{fmt(deltas[i])},{fmt(ratios[i])}"
        )
    return "\n".join(lines) + "\n"


def cmd_delta_series(args) -> int:
    tree = resolve_tree(args)
    b = resolve_b(args)
    k_max = args.kmax if args.kmax is not None else tree.depth_max
    series = delta_series(tree, b, min(k_max, tree.depth_max))
    if args.format == "json":
        emit_json(
            {
                "b": b,
                "k": series.ks,
                "n_vertices": series.vertex_counts,
                "delta": series.deltas,
                "delta_sq_over_n": series.ratios,
            },
            args.out,
        )
    else:
        emit(_series_csv(series), args.out)
    return 0


def cmd_spectral(args) -> int:
    tree = resolve_tree(args)
    payload = {
        "j": args.j,
        "exact": q_power_norm_exact(tree, args.j),
        "iterative": q_power_norm_iterative(tree, args.j, seed=args.seed),
    }
    emit_json(payload, args.out)
    return 0


def cmd_mixing(args) -> int:
    tree = resolve_tree(args)
    b = resolve_b(args)
    norms = mixing_norms(mixing_matrix(tree, b))
    prof = delta_profile(tree, b)
    emit_json(
        {
            "n": tree.n,
            "b": b,
            "inf_norm": norms.inf_norm,
            "two_norm": norms.two_norm,
            "row_sums_l2": float(np.linalg.norm(norms.row_sums)),
            "delta_max": float(prof.delta.max()),
            "big_delta": prof.big_delta,
        },
        args.out,
    )
    return 0


def cmd_sample(args) -> int:
    if args.model:
        with open(args.model) as fh:
            model = parse_model(fh.read(), load_tree_file)
    else:
        tree = resolve_tree(args)
        model = IsingModel(tree, float(args.p))
    draws = sample(model, args.count, args.seed)
    if model.space.size > 10:
        raise ValueError("line-per-configuration output supports at most 10 states")
    lines = ["".join(str(int(s)) for s in row) for row in draws]
    emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_exact(args) -> int:
    if args.model:
        with open(args.model) as fh:
            model = parse_model(fh.read(), load_tree_file)
    else:
        tree = resolve_tree(args)
        model = IsingModel(tree, float(args.p))
    mu = exact_measure(model)
    lines = ["rank,probability"]
    lines += [f"{r},{fmt(p)}" for r, p in enumerate(mu.probs)]
    emit("\n".join(lines) + "\n", args.out)
    return 0


def _read_measure_csv(path: str) -> np.ndarray:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ValueError(f"{path}: {exc.strerror}") from exc
    if not lines or lines[0] != "rank,probability":
        raise ValueError(f"{path}: line 1: expected header 'rank,probability'")
    pairs = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        try:
            rank_s, prob_s = line.split(",")
            pairs.append((int(rank_s), float(prob_s)))
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: {exc}") from exc
    size = max(r for r, _ in pairs) + 1
    probs = np.zeros(size)
    for r, p in pairs:
        probs[r] = p
    return probs


def cmd_wasserstein(args) -> int:
    mu = _read_measure_csv(args.mu)
    nu = _read_measure_csv(args.nu)
    size = max(mu.size, nu.size)
    n = args.n if args.n is not None else max(1, int(round(math.log2(size))))
    if 2**n < size:
        raise ValueError(f"measures have {size} ranks; --n {n} gives only {2**n}")
    mu = np.pad(mu, (0, 2**n - mu.size))
    nu = np.pad(nu, (0, 2**n - nu.size))
    if abs(mu.sum() - 1.0) > 1e-9 or abs(nu.sum() - 1.0) > 1e-9:
        raise ValueError("measure files must each sum to 1 (1e-9)")
    metric = WeightedHamming.uniform(n, 1.0 - np.eye(2))
    dist, plan = wasserstein_from_probs(mu, nu, n, 2, metric)
    emit_json(
        {
            "distance": dist,
            "n": n,
            "support_mu": int(plan.mu_support.size),
            "support_nu": int(plan.nu_support.size),
            "dual_feasibility_slack": plan.dual_feasibility_slack,
            "slackness_gap": plan.slackness_gap,
            "certified": plan.certified,
        },
        args.out,
    )
    return 0


def cmd_verify(args) -> int:
    reports = run_all_checks(seed=args.seed)
    if args.which != "all":
        reports = [r for r in reports if r.name == args.which]
        if not reports:
            raise ValueError(f"unknown check {args.which!r}")
    emit_json([r.to_dict() for r in reports], args.out)
    return 0 if all(r.passed for r in reports) else 1


def cmd_figure1(args) -> int:
    family = args.family
    k_cap = _FIGURE1_KMAX[family]
    k_max = args.kmax if args.kmax is not None else k_cap
    if k_max > k_cap:
        est = 2 ** (k_max + 1) - 1
        raise ValueError(
            f"{family} capped at depth {k_cap}; depth {k_max} needs about {est} vertices"
        )
    tokens = args.b.split(",") if args.b else list(_FIGURE1_B_TOKENS)
    bs = [parse_b_token(t) for t in tokens]
    columns = []
    for tok, b in zip(tokens, bs):
        if family == "threeone":
            series = threeone_delta_series(b, k_max)
        else:
            series = dary_delta_series(2, b, k_max)
        columns.append((tok, series))
    counts = columns[0][1].vertex_counts
    lines = ["k,n_vertices," + ",".join(f"b={tok}" for tok, _ in columns)]
    for i in range(k_max + 1):
        ratios = ",".join(fmt(series.ratios[i]) for _, series in columns)
        lines.append(f"{i},{int(counts[i])},{ratios}")
    emit("\n".join(lines) + "\n", args.out)
    return 0


# -------------------------------------------------------------------- #
# Parser                                                                #
# -------------------------------------------------------------------- #


def _add_tree_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tree", help="tree text file")
    p.add_argument("--gen", help="generator spec, e.g. dary:2:5 or threeone:4")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treeconc",
        description="Concentration parameters of broadcast models on rooted trees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-tree", help="write a generated tree in the text format")
    p.add_argument("--gen", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_tree)

    p = sub.add_parser("delta", help="descendant profile aggregate values")
    _add_tree_source(p)
    p.add_argument("--b")
    p.add_argument("--p", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("delta-series", help="profile norms over truncations")
    _add_tree_source(p)
    p.add_argument("--b")
    p.add_argument("--p", type=float)
    p.add_argument("--kmax", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_delta_series)

    p = sub.add_parser("spectral", help="operator power norms (exact and iterative)")
    _add_tree_source(p)
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("mixing", help="mixing matrix norms")
    _add_tree_source(p)
    p.add_argument("--b")
    p.add_argument("--p", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mixing)

    p = sub.add_parser("sample", help="ancestral samples, one configuration per line")
    _add_tree_source(p)
    p.add_argument("--model", help="model text file (alternative to --tree/--p)")
    p.add_argument("--p", type=float)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("exact", help="full configuration measure as rank,probability CSV")
    _add_tree_source(p)
    p.add_argument("--model")
    p.add_argument("--p", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("wasserstein", help="exact transport distance between measure files")
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--n", type=int, help="coordinate count (default: log2 of rank span)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_wasserstein)

    p = sub.add_parser("verify", help="run inequality checkers; nonzero exit on failure")
    p.add_argument(
        "which",
        nargs="?",
        default="all",
        choices=("all", "exp_moment", "transportation_entropy", "tail_bound",
                 "optimality_chain", "mixing_corollary"),
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("figure1", help="growth-rate ratio CSV for one tree family")
    p.add_argument("--family", choices=("threeone", "dary2"), required=True)
    p.add_argument("--b", help="comma-separated b tokens (decimals, isqrt2, isqrt3)")
    p.add_argument("--kmax", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_figure1)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        thread_cap()  # validate the env var up front
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

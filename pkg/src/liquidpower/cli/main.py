"""``liquidpower`` command: compute | experiment | gen.

Exit codes: 0 success, 2 invalid input or engine/topology mismatch,
3 the brute-force enumeration budget was exceeded.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from ..core import BehaviorModel, WeightedVotingGame, as_fraction
from ..ld_exact import LDSolver
from ..netgen import FAMILIES, NetworkSpec
from ..oracle import DEFAULT_BUDGET, EnumerationBudgetExceeded, MeasureReport, exact_measure_bruteforce
from ..pv_exact import ProxyInstance, pv_measures, pvr_measures
from ..sampler import DEFAULT_DELTA, SamplingPlan, estimate_measures
from .instance import Instance, InstanceError, dumps_instance, format_edge_list, load_instance, parse_rational
from .output import render_experiment, render_result
from .presets import PRESETS, run_preset

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3
ENGINES = ("brute", "pv", "pvr", "ld", "sample")
DEFAULT_EPSILON = 0.05


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _proxy(inst: Instance, p_d) -> ProxyInstance:
    vv = inst.delegatees or inst.graph.proxy_delegatees()
    if vv is None or inst.graph.proxy_delegatees() != tuple(vv):
        raise InstanceError(
            "engine needs a proxy-voting instance: a complete bipartite graph from delegators to delegatees "
            "(declare 'delegatees' in the instance)"
        )
    return ProxyInstance(inst.game, vv, p_d)


def _common_pd(inst: Instance, engine: str) -> Fraction:
    p = inst.constant_pd()
    if p is None:
        raise InstanceError(f"engine {engine} needs one delegation probability for all voters; pass --pd")
    return p


def compute(
    inst: Instance,
    engine: str,
    p_d=None,
    epsilon: Optional[float] = None,
    delta: float = DEFAULT_DELTA,
    k: Optional[int] = None,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    complete: bool = False,
) -> tuple[MeasureReport, Optional[Fraction]]:
    """Dispatch to one engine; returns the report and the p_d used (None if per-voter)."""
    if engine not in ENGINES:
        raise InstanceError(f"unknown engine {engine!r}")
    if complete and not inst.graph.is_complete():
        inst = inst.with_complete_graph()
    if p_d is not None:
        pd = as_fraction(p_d)
        if not 0 <= pd <= 1:
            raise InstanceError("--pd must lie in [0, 1]")
        inst = inst.with_pd(pd)

    if engine == "brute":
        return exact_measure_bruteforce(inst.graph, inst.game, inst.behavior, budget), inst.constant_pd()
    if engine == "pvr":
        values = pvr_measures(_proxy(inst, 0))
        return MeasureReport(tuple(values), engine="pvr"), None
    if engine == "pv":
        pd = _common_pd(inst, engine)
        return MeasureReport(tuple(pv_measures(_proxy(inst, pd))), engine="pv"), pd
    if engine == "ld":
        if not inst.graph.is_complete():
            raise InstanceError("engine ld needs a complete delegation graph; use --complete to ignore the edges")
        pd = _common_pd(inst, engine)
        return MeasureReport(tuple(LDSolver(inst.game, pd).measures()), engine="ld"), pd

    if k is not None:
        plan = SamplingPlan.fixed(inst.n, k, seed, delta)
    else:
        plan = SamplingPlan.hoeffding(inst.n, epsilon or DEFAULT_EPSILON, delta, seed)
    return estimate_measures(inst.graph, inst.game, inst.behavior, plan), inst.constant_pd()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_compute(args) -> int:
    inst = load_instance(args.instance)
    pd = parse_rational(args.pd, "--pd") if args.pd is not None else None
    effective = pd if pd is not None else inst.constant_pd()
    if effective == 1 and args.engine != "pvr":
        _warn(
            "p_d = 1: every other voter delegates, so on a complete graph the measured voter, forced "
            "to vote, is the only one turning out and is always critical"
        )
    report, used = compute(
        inst, args.engine, pd, args.epsilon, args.delta, args.k, args.seed, args.budget, args.complete
    )
    _emit(render_result(inst, report, used, args.format, args.round), args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    rows = run_preset(args.preset, full=args.full, seed=args.seed, k=args.k)
    _emit(render_experiment(args.preset, rows, args.format, args.full, args.seed, args.round), args.out)
    return EXIT_OK


def _network_spec(args) -> NetworkSpec:
    fam = args.family
    if fam == "gnp":
        params = {"p": args.p}
    elif fam == "pref_attach":
        params = {"m": args.m}
    elif fam == "small_world":
        params = {"k": args.k, "rewire_p": args.rewire}
    elif fam == "spatial":
        params = {"k": args.k, "dist": args.dist}
    else:
        params = {"layers": args.layers, "layer_size": args.size}
    if any(v is None for v in params.values()):
        missing = [k for k, v in params.items() if v is None]
        raise InstanceError(f"family {fam} needs {', '.join('--' + m.replace('_', '-') for m in missing)}")
    n = args.layers * args.size if fam == "k_layers" else args.n
    if n is None:
        raise InstanceError(f"family {fam} needs --n")
    return NetworkSpec(fam, n, params, None if fam == "k_layers" else args.seed)


def cmd_gen(args) -> int:
    try:
        spec = _network_spec(args)
        graph = spec.build()
    except ValueError as exc:
        raise InstanceError(str(exc)) from None
    _emit(format_edge_list(graph), args.out)
    if args.instance:
        skeleton = Instance(
            WeightedVotingGame((1,) * graph.n),
            graph,
            BehaviorModel.global_uniformity(graph),
            ("global_uniformity",),
            network=spec,
        )
        Path(args.instance).write_text(dumps_instance(skeleton))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liquidpower", description="A priori voting power under delegation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def output_flags(p):
        p.add_argument("--out", help="write here instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--round", type=int, metavar="DIGITS", help="round displayed values")

    c = sub.add_parser("compute", help="measure every voter of an instance")
    c.add_argument("instance", help="instance JSON path, or builtin:table1 / builtin:table2 / builtin:example1")
    c.add_argument("--engine", choices=ENGINES, default="brute")
    c.add_argument("--pd", help="delegation probability for every voter that can delegate (e.g. 0.5 or 1/2)")
    c.add_argument("--epsilon", type=float, help=f"sampler accuracy (default {DEFAULT_EPSILON})")
    c.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="sampler failure probability")
    c.add_argument("--k", type=int, help="fixed sample count (overrides --epsilon)")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="brute-force partition budget")
    c.add_argument("--complete", action="store_true", help="ignore the edges and use the complete digraph")
    output_flags(c)
    c.set_defaults(func=cmd_compute)

    e = sub.add_parser("experiment", help="reproduce a published table or figure series")
    e.add_argument("preset", choices=tuple(PRESETS))
    e.add_argument("--full", action="store_true", help="full published grid instead of the reduced one")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--k", type=int, help="override the sample count of sampled presets")
    output_flags(e)
    e.set_defaults(func=cmd_experiment)

    g = sub.add_parser("gen", help="generate a network as an edge list")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--p", type=float)
    g.add_argument("--m", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--rewire", type=float, default=0.2)
    g.add_argument("--dist", choices=("uniform", "gaussian"), default="uniform")
    g.add_argument("--layers", type=int)
    g.add_argument("--size", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="edge-list path (stdout if omitted)")
    g.add_argument("--instance", help="also write an instance skeleton here")
    g.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "epsilon", None) is not None and not 0 < args.epsilon < 1:
        print("error: --epsilon must lie in (0, 1)", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except EnumerationBudgetExceeded as exc:
        print(f"error: {exc}; use --budget or a faster engine", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

"""Experiment presets: the published instances, grids and sample counts.

Every preset returns long-format rows (preset, panel, x_name, x, series, y,
engine, k). The default grids are reduced to three points (two networks per
family for the network presets); ``full=True`` runs the published sweeps.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from ..core import BehaviorModel, DelegationGraph, WeightedVotingGame
from ..ld_exact import LDSolver
from ..netgen import layer_of, tuned_spec
from ..pv_exact import ProxyInstance, pv_measures, pvr_measures
from ..sampler import SamplingPlan, estimate_measures

TABLE_LABELS = tuple("abcdefghijklm")
TABLE_WEIGHTS = (3, 2, 1, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1)
TABLE_DELEGATEES = (0, 1, 2)
TABLE_PD = (Fraction(0), Fraction(1, 2), Fraction(9, 10))

FIG3_N = 100
FIG3_SIZES = (20, 50)
FIG3_SAMPLES = 100_000
FIG4_WEIGHTS = (1,) * 50 + (2,) * 30 + (5,) * 20
FIG4_SAMPLES = 10_000
FIG5_N = 100
FIG5_PD = Fraction(1, 2)
FIG5_FULL_SIZES = (1, 2, 3, 4) + tuple(range(5, 101, 5))
FIG5_REDUCED_SIZES = (5, 20, 50)
NETWORK_N = 100
NETWORK_SAMPLES = 5_000
NETWORK_FAMILIES = (
    ("gnp", "gnp", None),
    ("pref_attach", "pref_attach", None),
    ("small_world", "small_world", None),
    ("spatial_uniform", "spatial", "uniform"),
    ("spatial_gaussian", "spatial", "gaussian"),
    ("k_layers", "k_layers", None),
)
LAYER_SIZE = 10


def _row(preset, panel, x_name, x, series, y, engine, k=None) -> dict:
    return {
        "preset": preset,
        "panel": panel,
        "x_name": x_name,
        "x": None if x is None else float(x),
        "series": series,
        "y": float(y),
        "engine": engine,
        "k": k,
    }


def _pd_grid(full: bool, top: int) -> tuple[Fraction, ...]:
    """p_d = 0, 0.1, ..., top/10 in full, else the two ends and the middle."""
    if full:
        return tuple(Fraction(j, 10) for j in range(top + 1))
    return (Fraction(0), Fraction(1, 2), Fraction(top, 10))


def table1(full: bool = False, seed: int = 0, k: Optional[int] = None) -> list[dict]:
    game = WeightedVotingGame(TABLE_WEIGHTS)
    rows = []
    for p in TABLE_PD:
        values = pv_measures(ProxyInstance(game, TABLE_DELEGATEES, p))
        rows += [_row("table1", "pv", "p_d", p, lab, v, "pv") for lab, v in zip(TABLE_LABELS, values)]
    return rows


def table2(full: bool = False, seed: int = 0, k: Optional[int] = None) -> list[dict]:
    game = WeightedVotingGame(TABLE_WEIGHTS)
    rows = []
    for p in TABLE_PD:
        values = LDSolver(game, p).measures()
        rows += [_row("table2", "ld", "p_d", p, lab, v, "ld") for lab, v in zip(TABLE_LABELS, values)]
    return rows


def _class_means(measure, classes: dict) -> dict:
    m = np.asarray(measure)
    return {name: float(m[list(ids)].mean()) for name, ids in classes.items() if ids}


def fig3(full: bool = False, seed: int = 0, k: Optional[int] = None) -> list[dict]:
    k = k or FIG3_SAMPLES
    game = WeightedVotingGame((1,) * FIG3_N)
    rows = []
    for n_v in FIG3_SIZES:
        classes = {"delegatee": range(n_v), "delegator": range(n_v, FIG3_N)}
        for p in _pd_grid(full, 10):
            inst = ProxyInstance(game, tuple(range(n_v)), p)
            rep = estimate_measures(inst.graph(), game, inst.behavior(), SamplingPlan.fixed(FIG3_N, k, seed))
            for name, y in _class_means(rep.measure, classes).items():
                rows.append(_row("fig3", f"n_v={n_v}", "p_d", p, name, y, "sample", k))
    return rows


def fig4(full: bool = False, seed: int = 0, k: Optional[int] = None) -> list[dict]:
    k = k or FIG4_SAMPLES
    n = len(FIG4_WEIGHTS)
    game = WeightedVotingGame(FIG4_WEIGHTS)
    graph = DelegationGraph.complete(n)
    classes = {f"w{w}": [i for i, x in enumerate(FIG4_WEIGHTS) if x == w] for w in sorted(set(FIG4_WEIGHTS))}
    rows = []
    for p in _pd_grid(full, 9):
        rep = estimate_measures(graph, game, BehaviorModel.constant(graph, p), SamplingPlan.fixed(n, k, seed))
        for name, y in _class_means(rep.measure, classes).items():
            rows.append(_row("fig4", "complete", "p_d", p, name, y, "sample", k))
    return rows


def fig5_pvr(full: bool = False, seed: int = 0, k: Optional[int] = None) -> list[dict]:
    game = WeightedVotingGame((1,) * FIG5_N)
    rows = []
    for n_v in FIG5_FULL_SIZES if full else FIG5_REDUCED_SIZES:
        inst = ProxyInstance(game, tuple(range(n_v)), FIG5_PD)
        for panel, fn in (("pv", pv_measures), ("pvr", pvr_measures)):
            m = fn(inst)
            rows.append(_row("fig5_pvr", panel, "n_v", n_v, "delegatee", m[0], panel))
            if n_v < FIG5_N:
                rows.append(_row("fig5_pvr", panel, "n_v", n_v, "delegator", m[-1], panel))
    return rows


def network_seed(seed: int, j: int) -> int:
    return seed * 1000 + j


def network_runs(family: str, seeds: int, seed: int = 0, k: Optional[int] = None) -> list[tuple]:
    """(graph, measures) for ``seeds`` networks of one family under global uniformity."""
    k = k or NETWORK_SAMPLES
    _, gen_family, dist = next(f for f in NETWORK_FAMILIES if f[0] == family)
    runs = []
    for j in range(seeds):
        s = network_seed(seed, j)
        spec = tuned_spec(gen_family, NETWORK_N, 10, s, dist or "uniform")
        graph = spec.build()
        game = WeightedVotingGame((1,) * graph.n)
        rep = estimate_measures(graph, game, BehaviorModel.global_uniformity(graph), SamplingPlan.fixed(graph.n, k, s))
        runs.append((graph, np.asarray(rep.measure)))
    return runs


def _seeds(full: bool) -> int:
    return 5 if full else 2


def fig6_networks(full: bool = False, seed: int = 0, k: Optional[int] = None) -> list[dict]:
    kk = k or NETWORK_SAMPLES
    rows = []
    for family, _, _ in NETWORK_FAMILIES:
        runs = network_runs(family, _seeds(full), seed, kk)
        crit = np.mean([np.sort(m)[::-1] for _, m in runs], axis=0)
        deg = np.mean([np.sort(g.in_degrees)[::-1] for g, _ in runs], axis=0)
        pct = 100.0 * np.arange(1, NETWORK_N + 1) / NETWORK_N
        rows += [_row("fig6_networks", "criticality", "percent_of_voters", x, family, y, "sample", kk) for x, y in zip(pct, crit)]
        rows += [_row("fig6_networks", "in_degree", "percent_of_voters", x, family, y, "sample", kk) for x, y in zip(pct, deg)]
    return rows


def fig7_correlation(full: bool = False, seed: int = 0, k: Optional[int] = None) -> list[dict]:
    kk = k or NETWORK_SAMPLES
    rows = []
    for family, _, _ in NETWORK_FAMILIES:
        runs = network_runs(family, _seeds(full), seed, kk)
        xs, ys = [], []
        if family == "k_layers":
            layers = np.array([layer_of(i, LAYER_SIZE) for i in range(NETWORK_N)])
            mean = np.mean([m for _, m in runs], axis=0)
            for layer in range(layers.max() + 1):
                rows.append(_row("fig7_correlation", family, "layer", layer, "mean", mean[layers == layer].mean(), "sample", kk))
            xs, ys = [layers] * len(runs), [m for _, m in runs]
        else:
            for j, (g, m) in enumerate(runs):
                deg = np.asarray(g.in_degrees)
                xs.append(deg)
                ys.append(m)
                rows += [_row("fig7_correlation", family, "in_degree", d, f"network{j}", y, "sample", kk) for d, y in zip(deg, m)]
        r = np.corrcoef(np.concatenate(xs), np.concatenate(ys))[0, 1]
        rows.append(_row("fig7_correlation", family, "pearson", None, "correlation", r, "sample", kk))
    return rows


PRESETS: dict[str, Callable[..., list[dict]]] = {
    "table1": table1,
    "table2": table2,
    "fig3": fig3,
    "fig4": fig4,
    "fig5_pvr": fig5_pvr,
    "fig6_networks": fig6_networks,
    "fig7_correlation": fig7_correlation,
}


def run_preset(name: str, full: bool = False, seed: int = 0, k: Optional[int] = None) -> list[dict]:
    if name not in PRESETS:
        raise KeyError(name)
    return PRESETS[name](full=full, seed=seed, k=k)

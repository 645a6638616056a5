"""Instance files: JSON parsing, validation, serialization and edge lists."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import jsonschema

from ..core import BehaviorModel, DelegationGraph, WeightedVotingGame, as_fraction
from ..netgen import NetworkSpec

BUILTIN_PREFIX = "builtin:"


class InstanceError(ValueError):
    """Invalid instance or option; the message names the offending field or line."""


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("liquidpower.cli").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate_document(doc, name: str) -> None:
    """Raise InstanceError naming the first failing field."""
    validator = jsonschema.Draft202012Validator(load_schema(name))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise InstanceError(f"field {where}: {err.message}")


def parse_rational(value, field: str) -> Fraction:
    try:
        if isinstance(value, str):
            return Fraction(value.replace(" ", ""))
        return as_fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise InstanceError(f"field {field}: cannot read {value!r} as a rational ({exc})") from None


def rational_text(x: Fraction) -> str:
    return str(Fraction(x))


# Edge lists: one "u v" pair per line, 0-based; blank lines and '#' comments ignored.


def parse_edge_list(text: str, source: str = "<edge list>") -> list[tuple[int, int]]:
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InstanceError(f"{source} line {lineno}: expected 'u v', got {raw.strip()!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise InstanceError(f"{source} line {lineno}: voter ids must be integers") from None
        edges.append((u, v))
    return edges


def format_edge_list(graph: DelegationGraph) -> str:
    return "".join(f"{u} {v}\n" for u, v in graph.edges())


@dataclass(frozen=True)
class Instance:
    """Parsed instance: game, graph and behavior model plus what is needed to write it back."""

    game: WeightedVotingGame
    graph: DelegationGraph
    behavior: BehaviorModel
    behavior_spec: tuple  # ("global_uniformity",) | ("constant_pd", p) | ("per_voter", (p, ...))
    labels: Optional[tuple[str, ...]] = None
    delegatees: Optional[tuple[int, ...]] = None
    network: Optional[NetworkSpec] = None
    complete: bool = False

    @property
    def n(self) -> int:
        return self.game.n

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)

    def constant_pd(self) -> Optional[Fraction]:
        """The common delegation probability, when the behavior spec has one."""
        kind = self.behavior_spec[0]
        if kind == "constant_pd":
            return self.behavior_spec[1]
        probs = {p for p, d in zip(self.behavior.delegation_prob, self.graph.out_degrees) if d}
        return probs.pop() if len(probs) == 1 else None

    def with_pd(self, p_d) -> "Instance":
        p = as_fraction(p_d)
        return Instance(
            self.game, self.graph, BehaviorModel.constant(self.graph, p), ("constant_pd", p),
            self.labels, self.delegatees, self.network, self.complete,
        )

    def with_complete_graph(self) -> "Instance":
        graph = DelegationGraph.complete(self.n)
        return Instance(
            self.game, graph, _behavior(self.behavior_spec, graph), self.behavior_spec,
            self.labels, self.delegatees, None, True,
        )


def _behavior(spec: tuple, graph: DelegationGraph) -> BehaviorModel:
    if spec[0] == "global_uniformity":
        return BehaviorModel.global_uniformity(graph)
    if spec[0] == "constant_pd":
        return BehaviorModel.constant(graph, spec[1])
    return BehaviorModel.per_voter(graph, spec[1])


def _voter_id(ref, labels: Optional[dict], n: int, field: str) -> int:
    if isinstance(ref, str):
        if labels is None or ref not in labels:
            raise InstanceError(f"field {field}: unknown voter label {ref!r}")
        return labels[ref]
    if not 0 <= ref < n:
        raise InstanceError(f"field {field}: voter id {ref} outside [0, {n})")
    return ref


def parse_instance(doc: dict, base_dir: Optional[Path] = None) -> Instance:
    validate_document(doc, "instance")
    voters = doc["voters"]
    labels = tuple(voters) if isinstance(voters, list) else None
    n = len(labels) if labels else voters
    weights = tuple(doc["weights"])
    if len(weights) != n:
        raise InstanceError(f"field weights: {len(weights)} weights for {n} voters")
    quota = parse_rational(doc.get("quota", "1/2"), "quota")
    try:
        game = WeightedVotingGame(weights, quota)
    except ValueError as exc:
        raise InstanceError(f"field quota: {exc}") from None
    index = {lab: i for i, lab in enumerate(labels)} if labels else None

    delegatees = None
    if "delegatees" in doc:
        delegatees = tuple(sorted({_voter_id(r, index, n, f"delegatees/{k}") for k, r in enumerate(doc["delegatees"])}))

    network = None
    complete = bool(doc.get("complete", False))
    try:
        if "edges" in doc:
            edges = [
                (_voter_id(u, index, n, f"edges/{k}/0"), _voter_id(v, index, n, f"edges/{k}/1"))
                for k, (u, v) in enumerate(doc["edges"])
            ]
            graph = DelegationGraph.from_edges(n, edges)
        elif "edge_list" in doc:
            path = Path(doc["edge_list"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            try:
                text = path.read_text()
            except OSError as exc:
                raise InstanceError(f"field edge_list: cannot read {path} ({exc.strerror})") from None
            graph = DelegationGraph.from_edges(n, parse_edge_list(text, str(path)))
        elif "network" in doc:
            network = NetworkSpec.from_dict({"n": n, **doc["network"]})
            if network.n != n:
                raise InstanceError(f"field network/n: network has {network.n} nodes for {n} voters")
            graph = network.build()
        elif complete:
            graph = DelegationGraph.complete(n)
        elif delegatees is not None:
            graph = DelegationGraph.bipartite(n, delegatees)
        else:
            graph = DelegationGraph.empty(n)
    except InstanceError:
        raise
    except (ValueError, KeyError) as exc:
        field = "edges" if "edges" in doc else "edge_list" if "edge_list" in doc else "network"
        raise InstanceError(f"field {field}: {exc}") from None

    if delegatees is not None and graph.proxy_delegatees() != delegatees:
        raise InstanceError("field delegatees: the graph is not complete bipartite from delegators to these delegatees")

    raw = doc.get("behavior", "global_uniformity")
    if raw == "global_uniformity" or (isinstance(raw, dict) and "global_uniformity" in raw):
        spec: tuple = ("global_uniformity",)
    elif "constant_pd" in raw:
        spec = ("constant_pd", parse_rational(raw["constant_pd"], "behavior/constant_pd"))
    else:
        probs = tuple(parse_rational(p, f"behavior/per_voter/{k}") for k, p in enumerate(raw["per_voter"]))
        spec = ("per_voter", probs)
    try:
        behavior = _behavior(spec, graph)
    except ValueError as exc:
        raise InstanceError(f"field behavior: {exc}") from None
    return Instance(game, graph, behavior, spec, labels, delegatees, network, complete)


def load_instance(source: Union[str, Path]) -> Instance:
    """Read an instance file, or a shipped one named ``builtin:<name>``."""
    source = str(source)
    if source.startswith(BUILTIN_PREFIX):
        name = source[len(BUILTIN_PREFIX):]
        res = resources.files("liquidpower.cli").joinpath("instances", f"{name}.json")
        if not res.is_file():
            raise InstanceError(f"no builtin instance named {name!r}")
        return loads_instance(res.read_text(), source)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read instance {path}: {exc.strerror}") from None
    return loads_instance(text, str(path), path.parent)


def loads_instance(text: str, source: str = "<instance>", base_dir: Optional[Path] = None) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{source} line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_instance(doc, base_dir)


def instance_to_dict(inst: Instance) -> dict:
    doc: dict = {
        "voters": list(inst.labels) if inst.labels else inst.n,
        "weights": list(inst.game.weights),
        "quota": rational_text(inst.game.quota),
    }
    if inst.network is not None:
        doc["network"] = inst.network.to_dict()
    elif inst.complete:
        doc["complete"] = True
    elif inst.delegatees is not None and inst.graph == DelegationGraph.bipartite(inst.n, inst.delegatees):
        pass
    else:
        doc["edges"] = [list(e) for e in inst.graph.edges()]
    if inst.delegatees is not None:
        doc["delegatees"] = list(inst.delegatees)
    kind = inst.behavior_spec[0]
    if kind == "global_uniformity":
        doc["behavior"] = "global_uniformity"
    elif kind == "constant_pd":
        doc["behavior"] = {"constant_pd": rational_text(inst.behavior_spec[1])}
    else:
        doc["behavior"] = {"per_voter": [rational_text(p) for p in inst.behavior_spec[1]]}
    return doc


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2) + "\n"

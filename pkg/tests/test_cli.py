import csv
import io
import json
from fractions import Fraction

import jsonschema
import pytest

from liquidpower.cli import main
from liquidpower.cli.instance import (
    InstanceError,
    dumps_instance,
    load_instance,
    load_schema,
    loads_instance,
    parse_edge_list,
    parse_rational,
)
from liquidpower.cli.output import CSV_COLUMNS


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_table1_pv(capsys):
    code, out, _ = run(capsys, "compute", "builtin:table1", "--engine", "pv", "--pd", "0.5", "--round", "3")
    assert code == 0
    r = rows(out)
    assert list(r[0]) == list(CSV_COLUMNS)
    assert [float(x["measure"]) for x in r[:5]] == [0.552, 0.395, 0.303, 0.206, 0.098]
    assert [x["label"] for x in r] == list("abcdefghijklm")


def test_table2_ld(capsys):
    code, out, _ = run(capsys, "compute", "builtin:table2", "--engine", "ld", "--pd", "0.9", "--round", "3")
    assert code == 0
    m = [float(x["measure"]) for x in rows(out)]
    assert (m[0], m[1], m[2]) == (0.696, 0.638, 0.568)


def test_ld_on_incomplete_graph_needs_flag(capsys):
    code, _, err = run(capsys, "compute", "builtin:example1", "--engine", "ld", "--pd", "1/2")
    assert code == 2 and "complete" in err
    code, out, _ = run(capsys, "compute", "builtin:example1", "--engine", "ld", "--pd", "1/2", "--complete")
    assert code == 0 and len(rows(out)) == 13


def test_pv_needs_proxy_instance(capsys):
    code, _, err = run(capsys, "compute", "builtin:example1", "--engine", "pv", "--pd", "0.5")
    assert code == 2 and "proxy" in err


def test_sampler_output_is_reproducible(capsys):
    argv = ("compute", "builtin:example1", "--engine", "sample", "--epsilon", "0.05", "--delta", "0.05", "--seed", "7")
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second and first[0] == 0
    r = rows(first[1])
    assert all(x["engine"] == "sample" and x["k"] and x["epsilon"] == "0.05" for x in r)


def test_budget_refusal_exit_code(capsys):
    code, _, err = run(capsys, "compute", "builtin:table2", "--engine", "brute", "--budget", "1000")
    assert code == 3 and "budget" in err


def test_invalid_instance_reports_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"voters": 2, "weights": [1, 0], "behavior": "global_uniformity"}))
    code, _, err = run(capsys, "compute", str(bad))
    assert code == 2 and "weights/1" in err
    bad.write_text('{"voters": 2,\n  "weights": [1 1]}')
    code, _, err = run(capsys, "compute", str(bad))
    assert code == 2 and "line 2" in err


def test_edge_and_count_mismatches_are_rejected():
    with pytest.raises(InstanceError):
        loads_instance(json.dumps({"voters": 2, "weights": [1], "behavior": "global_uniformity"}))
    with pytest.raises(InstanceError):
        loads_instance(json.dumps({"voters": 2, "weights": [1, 1], "edges": [[0, 5]], "behavior": "global_uniformity"}))
    with pytest.raises(InstanceError):
        loads_instance(json.dumps({"voters": 2, "weights": [1, 1], "edges": [[0, 1]], "complete": True, "behavior": "global_uniformity"}))


def test_full_delegation_warning(capsys):
    code, out, err = run(capsys, "compute", "builtin:table2", "--engine", "ld", "--pd", "1")
    assert code == 0 and "warning" in err
    assert [float(x["measure"]) for x in rows(out)] == pytest.approx([1.0] * 13, abs=1e-12)


def test_rational_parsing():
    assert parse_rational("1/2", "q") == Fraction(1, 2)
    assert parse_rational("0.1", "q") == Fraction(1, 10)
    assert parse_rational(0.25, "q") == Fraction(1, 4)
    with pytest.raises(InstanceError):
        parse_rational("half", "q")


@pytest.mark.parametrize("name", ["table1", "table2", "example1"])
def test_builtin_instances_roundtrip(name):
    inst = load_instance(f"builtin:{name}")
    again = loads_instance(dumps_instance(inst))
    assert again == inst
    assert again.behavior == inst.behavior


def test_custom_instance_roundtrip(tmp_path):
    doc = {
        "voters": 4,
        "weights": [2, 1, 1, 3],
        "quota": "2/3",
        "edges": [[0, 1], [1, 2], [2, 0], [3, 0]],
        "behavior": {"per_voter": ["1/3", "0.5", 1, 0]},
    }
    inst = loads_instance(json.dumps(doc))
    assert inst.game.quota == Fraction(2, 3)
    assert inst.behavior.delegation_prob == (Fraction(1, 3), Fraction(1, 2), Fraction(1), Fraction(0))
    assert loads_instance(dumps_instance(inst)) == inst
    edges = tmp_path / "g.txt"
    edges.write_text("# arcs\n0 1\n1 2\n\n2 0\n3 0\n")
    via_file = loads_instance(json.dumps({**{k: v for k, v in doc.items() if k != "edges"}, "edge_list": "g.txt"}), base_dir=tmp_path)
    assert via_file.graph == inst.graph


def test_edge_list_errors_cite_line():
    assert parse_edge_list("0 1\n2 3\n") == [(0, 1), (2, 3)]
    with pytest.raises(InstanceError, match="line 2"):
        parse_edge_list("0 1\n2 x\n")


def test_json_result_validates_against_schema(capsys):
    schema = load_schema("result")
    for argv in (
        ("compute", "builtin:table1", "--engine", "pv", "--pd", "1/2", "--format", "json"),
        ("compute", "builtin:table1", "--engine", "pvr", "--format", "json"),
        ("compute", "builtin:example1", "--engine", "sample", "--k", "2000", "--format", "json"),
    ):
        code, out, _ = run(capsys, *argv)
        assert code == 0
        doc = json.loads(out)
        jsonschema.validate(doc, schema)
        assert len(doc["rows"]) == 13


def test_experiment_outputs(capsys):
    code, out, _ = run(capsys, "experiment", "table1", "--round", "3")
    assert code == 0
    r = rows(out)
    assert len(r) == 39
    a = [x for x in r if x["series"] == "a"]
    assert [float(x["y"]) for x in a] == [0.511, 0.552, 0.542]
    code, out, _ = run(capsys, "experiment", "fig5_pvr", "--format", "json")
    assert code == 0
    jsonschema.validate(json.loads(out), load_schema("experiment"))


def test_gen_k_layers(tmp_path, capsys):
    code, out, _ = run(capsys, "gen", "--family", "k_layers", "--layers", "10", "--size", "10")
    assert code == 0 and len(out.splitlines()) == 900
    skeleton = tmp_path / "inst.json"
    code, _, _ = run(capsys, "gen", "--family", "k_layers", "--layers", "3", "--size", "2", "--instance", str(skeleton))
    inst = load_instance(skeleton)
    assert inst.n == 6 and inst.graph.num_arcs == 8


def test_gen_empty_and_deterministic(tmp_path, capsys):
    code, out, _ = run(capsys, "gen", "--family", "gnp", "--n", "10", "--p", "0")
    assert code == 0 and out == ""
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for path in (a, b):
        assert run(capsys, "gen", "--family", "pref_attach", "--n", "40", "--m", "3", "--seed", "9", "--out", str(path))[0] == 0
    assert a.read_text() == b.read_text() != ""


def test_gen_invalid_parameters(capsys):
    assert run(capsys, "gen", "--family", "small_world", "--n", "10", "--k", "3")[0] == 2
    assert run(capsys, "gen", "--family", "gnp", "--n", "10")[0] == 2


def test_generated_instance_computes(tmp_path, capsys):
    inst = tmp_path / "net.json"
    run(capsys, "gen", "--family", "spatial", "--n", "12", "--k", "3", "--seed", "1", "--out", str(tmp_path / "e.txt"), "--instance", str(inst))
    code, out, _ = run(capsys, "compute", str(inst), "--engine", "sample", "--k", "500")
    assert code == 0
    assert [int(x["out_degree"]) for x in rows(out)] == [3] * 12

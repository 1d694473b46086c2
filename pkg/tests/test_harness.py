"""Batch evaluation: records, accuracy curves, and exit codes."""

import json
from fractions import Fraction

import pytest

from bincert.bitspace import Label
from bincert.certify import Abstain, certified_perturbation_size
from bincert.harness import (
    EXIT_OK,
    EXIT_PARSE,
    EXIT_RUNTIME,
    CertifyConfig,
    certified_accuracy_curve,
    make_record,
    run_certify_command,
    write_curve_csv,
    write_records,
)

B7 = Fraction(7, 10)


def _cert(label_id, k, n=8):
    return certified_perturbation_size(
        n, B7, Fraction(19, 20), Fraction(1, 20), label=Label(label_id)
    )


def test_make_record_marks_matches_correct():
    cert = _cert(1, 3)
    assert make_record(0, 1, cert).correct
    assert not make_record(0, 0, cert).correct
    assert not make_record(0, None, cert).correct


def test_abstains_are_never_correct():
    abstain = Abstain(reason="no separation", label=Label(1))
    assert not make_record(0, 1, abstain).correct


def test_curve_counts_certified_at_least_k():
    records = [
        make_record(0, 1, _cert(1, 0)),
        make_record(1, 1, _cert(1, 0)),
        make_record(2, 0, _cert(1, 0)),  # wrong label
        make_record(3, 1, Abstain(reason="x", label=Label(1))),
    ]
    curve = certified_accuracy_curve(records, sizes=range(0, 6))
    assert curve[0] == (0, 0.5)
    # every certificate here has the same certified size; beyond it the
    # curve must drop to zero
    k_cert = _cert(1, 0).k_certified
    for size, acc in curve:
        assert acc == (0.5 if size <= k_cert else 0.0)


def test_curve_is_nonincreasing():
    records = [make_record(i, 1, _cert(1, 0, n=6 + i)) for i in range(4)]
    curve = certified_accuracy_curve(records, sizes=range(0, 10))
    accs = [a for _, a in curve]
    assert accs == sorted(accs, reverse=True)


def test_curve_rejects_empty_input():
    with pytest.raises(ValueError):
        certified_accuracy_curve([], sizes=range(3))


def test_written_records_are_sorted_and_stable(tmp_path):
    records = [
        make_record(3, 1, _cert(1, 0)),
        make_record(0, 0, _cert(1, 0)),
    ]
    out = tmp_path / "records.jsonl"
    write_records(records, str(out))
    lines = out.read_text().splitlines()
    assert [json.loads(line)["item"] for line in lines] == [0, 3]
    again = tmp_path / "records2.jsonl"
    write_records(records, str(again))
    assert out.read_bytes() == again.read_bytes()


def test_curve_csv_format(tmp_path):
    out = tmp_path / "curve.csv"
    write_curve_csv([(0, 1.0), (1, 0.25)], str(out))
    assert out.read_text() == "size,certified_accuracy\n0,1.0\n1,0.25\n"


@pytest.fixture
def small_graph(tmp_path):
    labels = tmp_path / "labels.txt"
    labels.write_text("".join(f"{u} {int(u % 2 == 0)}\n" for u in range(8)))
    graph = tmp_path / "graph.txt"
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (4, 5), (5, 6), (6, 7), (3, 4)]
    graph.write_text(
        "# nodes 8\n# labels labels.txt\n"
        + "".join(f"{u} {v}\n" for u, v in edges)
    )
    return str(graph)


def _config(graph_path, out_dir, **overrides):
    args = dict(
        graph=graph_path,
        out=str(out_dir),
        classifier="degree-threshold:2",
        beta="0.8",
        alpha=0.01,
        samples=200,
        seed=7,
    )
    args.update(overrides)
    return CertifyConfig(**args)


class TestRunCertify:
    def test_end_to_end_writes_records_and_curve(self, small_graph, tmp_path):
        out = tmp_path / "out"
        assert run_certify_command(_config(small_graph, out)) == EXIT_OK
        lines = (out / "records.jsonl").read_text().splitlines()
        assert len(lines) == 8
        rec = json.loads(lines[0])
        assert rec["item"] == 0
        assert rec["n"] == 7
        assert rec["outcome"] in ("certificate", "abstain")
        curve = (out / "curve.csv").read_text().splitlines()
        assert curve[0] == "size,certified_accuracy"
        assert len(curve) == 2 + 7  # sizes 0..7

    def test_reruns_are_byte_identical(self, small_graph, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run_certify_command(_config(small_graph, out1)) == EXIT_OK
        assert run_certify_command(_config(small_graph, out2)) == EXIT_OK
        assert (out1 / "records.jsonl").read_bytes() == (
            out2 / "records.jsonl"
        ).read_bytes()
        assert (out1 / "curve.csv").read_bytes() == (out2 / "curve.csv").read_bytes()

    def test_node_selection_file(self, small_graph, tmp_path):
        nodes = tmp_path / "nodes.txt"
        nodes.write_text("1\n5\n")
        out = tmp_path / "out"
        cfg = _config(small_graph, out, nodes=str(nodes))
        assert run_certify_command(cfg) == EXIT_OK
        lines = (out / "records.jsonl").read_text().splitlines()
        assert [json.loads(l)["item"] for l in lines] == [1, 5]

    def test_missing_graph_is_a_parse_error(self, tmp_path):
        cfg = _config(str(tmp_path / "nope.txt"), tmp_path / "out")
        assert run_certify_command(cfg) == EXIT_PARSE

    def test_bad_beta_is_a_parse_error(self, small_graph, tmp_path):
        cfg = _config(small_graph, tmp_path / "out", beta="1.5")
        assert run_certify_command(cfg) == EXIT_PARSE

    def test_unknown_classifier_is_a_parse_error(self, small_graph, tmp_path):
        cfg = _config(small_graph, tmp_path / "out", classifier="psychic")
        assert run_certify_command(cfg) == EXIT_PARSE

    def test_empty_node_file_is_a_parse_error(self, small_graph, tmp_path):
        nodes = tmp_path / "nodes.txt"
        nodes.write_text("\n")
        cfg = _config(small_graph, tmp_path / "out", nodes=str(nodes))
        assert run_certify_command(cfg) == EXIT_PARSE

    def test_dead_protocol_child_is_a_runtime_error(self, small_graph, tmp_path):
        cfg = _config(
            small_graph, tmp_path / "out", classifier="proto:false"
        )
        assert run_certify_command(cfg) == EXIT_RUNTIME

    def test_graph_task_certifies_the_whole_edge_set(self, small_graph, tmp_path):
        out = tmp_path / "out"
        cfg = _config(
            small_graph,
            out,
            task="graph",
            classifier="parity",
            samples=150,
        )
        assert run_certify_command(cfg) == EXIT_OK
        rec = json.loads((out / "records.jsonl").read_text().splitlines()[0])
        assert rec["n"] == 8 * 7 // 2

    def test_majority_label_classifier_uses_ground_truth_context(
        self, small_graph, tmp_path
    ):
        out = tmp_path / "out"
        cfg = _config(
            small_graph, out, classifier="majority-neighbor-label", samples=150
        )
        assert run_certify_command(cfg) == EXIT_OK
        assert len((out / "records.jsonl").read_text().splitlines()) == 8

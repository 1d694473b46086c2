"""Batch certification over graph files and the accuracy-curve metric.

The flow: read a graph, turn each test item into a structure vector,
run the Monte-Carlo certification pipeline per item, then summarize as
a certified-accuracy curve. Records go out as one self-describing JSON
line per item (the same record style the classifier protocol uses) and
the curve as a two-column CSV.

Exit codes separate blame: 2 means the inputs could not be parsed or
validated, 3 means the run itself failed. Outputs are byte-identical
for identical inputs and seed; nothing time-dependent is written.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .bitspace import NoiseSpec, StructureVector
from .certify import Abstain, Certificate
from .classifiers import ClassifierContext, build_classifier
from .graphs import (
    Graph,
    GraphFormatError,
    load_graph,
    load_labels,
    neighbor_order,
    structure_vector_for_graph,
    structure_vector_for_node,
)
from .numerics import resolve_backend
from .smoothing import BaseClassifier, certify_example

__all__ = [
    "CertifyConfig",
    "EvaluationRecord",
    "EXIT_OK",
    "EXIT_PARSE",
    "EXIT_RUNTIME",
    "certified_accuracy_curve",
    "make_record",
    "run_certify_command",
    "write_curve_csv",
    "write_records",
]

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_RUNTIME = 3


@dataclass(frozen=True)
class EvaluationRecord:
    """One certified item: who it was, the outcome, and whether it counts.

    An item counts as correct only when it produced a certificate whose
    label matches the recorded truth. Abstentions and items without a
    recorded truth count as incorrect; the curve stays conservative.
    """

    item_id: int
    true_label: Optional[int]
    outcome: Union[Certificate, Abstain]
    correct: bool


def make_record(
    item_id: int, true_label: Optional[int], outcome: Union[Certificate, Abstain]
) -> EvaluationRecord:
    correct = (
        isinstance(outcome, Certificate)
        and true_label is not None
        and outcome.label is not None
        and outcome.label.id == true_label
    )
    return EvaluationRecord(
        item_id=item_id, true_label=true_label, outcome=outcome, correct=correct
    )


def certified_accuracy_curve(
    records: Sequence[EvaluationRecord], sizes: Iterable[int]
) -> List[Tuple[int, float]]:
    """Fraction of items correct with certified size at least k, per k."""
    if not records:
        raise ValueError("cannot summarize an empty record list")
    total = len(records)
    certified_sizes = [
        rec.outcome.k_certified
        for rec in records
        if rec.correct and isinstance(rec.outcome, Certificate)
    ]
    rows: List[Tuple[int, float]] = []
    for k in sizes:
        if k < 0:
            raise ValueError(f"perturbation size must be non-negative, got {k}")
        hits = sum(1 for kc in certified_sizes if kc >= k)
        rows.append((k, hits / total))
    return rows


@dataclass(frozen=True)
class CertifyConfig:
    graph: str
    out: str
    task: str = "node"
    classifier: str = "degree-threshold:1"
    beta: str = "0.7"
    alpha: float = 0.001
    samples: int = 10_000
    seed: int = 0
    backend: str = "auto"
    labels: Optional[str] = None
    nodes: Optional[str] = None
    batch_size: int = 128
    num_labels: int = 2
    timeout: float = 30.0


def _read_id_list(path: str) -> List[int]:
    ids: List[int] = []
    try:
        handle = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise GraphFormatError(f"{path}: cannot open id list: {exc}") from exc
    with handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                ids.append(int(line))
            except ValueError as exc:
                raise GraphFormatError(
                    f"{path}:{lineno}: expected an integer id, got {raw.strip()!r}"
                ) from exc
    return ids


@dataclass(frozen=True)
class _PreparedRun:
    graph: Graph
    spec: NoiseSpec
    items: Tuple[int, ...]
    truth: Dict[int, int]
    num_labels: int


def _prepare(config: CertifyConfig) -> _PreparedRun:
    """Everything that can fail before any sampling starts."""
    if config.task not in ("node", "graph"):
        raise ValueError(f"task must be 'node' or 'graph', got {config.task!r}")
    if not 0.0 < config.alpha < 1.0:
        raise ValueError(f"alpha must lie strictly in (0, 1), got {config.alpha}")
    if config.samples < 1:
        raise ValueError(f"samples must be positive, got {config.samples}")
    if config.num_labels < 1:
        raise ValueError(f"num_labels must be positive, got {config.num_labels}")

    graph = load_graph(config.graph)
    spec = NoiseSpec.from_string(config.beta)

    truth: Dict[int, int] = dict(graph.labels or {})
    if config.labels is not None:
        truth.update(load_labels(config.labels))

    if config.task == "node":
        if config.nodes is not None:
            items = _read_id_list(config.nodes)
            if not items:
                raise ValueError(f"{config.nodes}: no test ids")
            for u in items:
                if not 0 <= u < graph.num_nodes:
                    raise ValueError(
                        f"test node {u} outside graph of {graph.num_nodes} nodes"
                    )
        else:
            items = list(range(graph.num_nodes))
    else:
        items = [0]

    num_labels = config.num_labels
    if truth:
        num_labels = max(num_labels, max(truth.values()) + 1)

    # fail now on an unknown classifier name, not mid-run
    if not config.classifier.startswith("proto:"):
        probe_context = ClassifierContext(
            neighbor_labels=[0] * max(graph.num_nodes - 1, 1),
            label_count=num_labels,
        )
        build_classifier(config.classifier, probe_context)

    return _PreparedRun(
        graph=graph,
        spec=spec,
        items=tuple(items),
        truth=truth,
        num_labels=num_labels,
    )


def _item_vector(graph: Graph, task: str, item: int) -> StructureVector:
    if task == "node":
        return structure_vector_for_node(graph, item)
    return structure_vector_for_graph(graph)


def _item_classifier(
    config: CertifyConfig,
    prepared: _PreparedRun,
    item: int,
    shared: Optional[BaseClassifier],
) -> BaseClassifier:
    if shared is not None:
        return shared
    # only majority-neighbor-label lands here: its context is per item
    labels = prepared.truth
    order = neighbor_order(prepared.graph, item)
    context = ClassifierContext(
        neighbor_labels=[labels.get(v, 0) for v in order],
        label_count=prepared.num_labels,
    )
    return build_classifier(config.classifier, context)


def record_to_json_dict(record: EvaluationRecord) -> dict:
    payload = record.outcome.to_record()
    payload["item"] = record.item_id
    payload["true_label"] = record.true_label
    payload["correct"] = record.correct
    return payload


def write_records(records: Sequence[EvaluationRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for rec in sorted(records, key=lambda r: r.item_id):
            handle.write(json.dumps(record_to_json_dict(rec), sort_keys=True))
            handle.write("\n")


def write_curve_csv(rows: Sequence[Tuple[int, float]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("size,certified_accuracy\n")
        for k, acc in rows:
            handle.write(f"{k},{acc!r}\n")


def run_certify_command(config: CertifyConfig) -> int:
    """Full batch run; returns a process exit code rather than raising."""
    try:
        prepared = _prepare(config)
    except (GraphFormatError, ValueError, TypeError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    shared: Optional[BaseClassifier] = None
    proto = None
    try:
        if config.classifier.startswith("proto:"):
            from .protocol import ProtocolClassifier

            command = config.classifier[len("proto:") :]
            proto = ProtocolClassifier(
                command, label_count=prepared.num_labels, timeout=config.timeout
            )
            shared = proto
        elif not config.classifier.startswith("majority-neighbor-label"):
            shared = build_classifier(
                config.classifier,
                ClassifierContext(label_count=prepared.num_labels),
            )

        records: List[EvaluationRecord] = []
        max_n = 0
        for item in prepared.items:
            s = _item_vector(prepared.graph, config.task, item)
            max_n = max(max_n, s.n)
            base = _item_classifier(config, prepared, item, shared)
            backend = resolve_backend(config.backend, s.n)
            outcome = certify_example(
                base,
                s,
                prepared.spec,
                d=config.samples,
                alpha=config.alpha,
                backend=backend,
                seed=(config.seed, item),
                batch_size=config.batch_size,
            )
            records.append(make_record(item, prepared.truth.get(item), outcome))

        os.makedirs(config.out, exist_ok=True)
        write_records(records, os.path.join(config.out, "records.jsonl"))
        rows = certified_accuracy_curve(records, range(0, max_n + 1))
        write_curve_csv(rows, os.path.join(config.out, "curve.csv"))
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        if proto is not None:
            proto.close()

    print(
        f"certified {len(records)} items; "
        f"records and curve written to {config.out}"
    )
    return EXIT_OK

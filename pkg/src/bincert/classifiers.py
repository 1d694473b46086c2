"""Built-in toy base classifiers.

Desk-scale stand-ins for real models: cheap, deterministic, and varied
enough to exercise every code path (constant for saturation, first-bit
and parity for sharp sensitivity, degree-threshold for something
monotone, majority-neighbor-label for a node task that actually uses
graph structure). Each is an ordinary object satisfying the
BaseClassifier protocol.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

from .bitspace import Label, StructureVector

__all__ = [
    "ClassifierContext",
    "Constant",
    "DegreeThreshold",
    "FirstBit",
    "MajorityNeighborLabel",
    "Parity",
    "build_classifier",
    "toy_classifiers",
]


@dataclass
class Constant:
    label: int = 0
    label_count: int = 2

    def classify(self, batch: Sequence[StructureVector]) -> List[Label]:
        return [Label(self.label) for _ in batch]


@dataclass
class FirstBit:
    """Label equals coordinate 0."""

    label_count: int = 2

    def classify(self, batch: Sequence[StructureVector]) -> List[Label]:
        return [Label(s.bit(0)) for s in batch]


@dataclass
class Parity:
    label_count: int = 2

    def classify(self, batch: Sequence[StructureVector]) -> List[Label]:
        return [Label(s.weight & 1) for s in batch]


@dataclass
class DegreeThreshold:
    """Label 1 iff at least `threshold` bits are set."""

    threshold: int = 1
    label_count: int = 2

    def classify(self, batch: Sequence[StructureVector]) -> List[Label]:
        return [Label(1 if s.weight >= self.threshold else 0) for s in batch]


@dataclass
class MajorityNeighborLabel:
    """Majority label among the neighbors a node-task vector selects.

    neighbor_labels[j] is the label of the j-th candidate neighbor, in
    the same coordinate order the structure vector uses. No neighbors,
    or a tied vote, resolves to the smallest label id among the winners
    (label 0 when the neighborhood is empty).
    """

    neighbor_labels: Sequence[int]
    label_count: int = 2

    def classify(self, batch: Sequence[StructureVector]) -> List[Label]:
        out: List[Label] = []
        for s in batch:
            if s.n != len(self.neighbor_labels):
                raise ValueError(
                    f"vector dimension {s.n} does not match "
                    f"{len(self.neighbor_labels)} neighbor labels"
                )
            votes = [0] * self.label_count
            for j in s.support():
                votes[self.neighbor_labels[j]] += 1
            best = max(votes) if votes else 0
            out.append(Label(votes.index(best) if best > 0 else 0))
        return out


@dataclass(frozen=True)
class ClassifierContext:
    """Side information some classifiers need; plain vectors do not carry it."""

    neighbor_labels: Optional[Sequence[int]] = None
    label_count: int = 2


def toy_classifiers() -> Dict[str, Callable[..., object]]:
    """Name -> factory for every built-in classifier."""
    return {
        "constant": Constant,
        "first-bit": FirstBit,
        "parity": Parity,
        "degree-threshold": DegreeThreshold,
        "majority-neighbor-label": MajorityNeighborLabel,
    }


def build_classifier(name: str, context: Optional[ClassifierContext] = None):
    """Instantiate a toy classifier from "name" or "name:arg" syntax.

    "constant:1" fixes the constant label, "degree-threshold:3" the
    threshold. majority-neighbor-label pulls its neighbor labels from
    the context. External protocol classifiers ("proto:...") are not
    handled here; they need process plumbing the harness owns.
    """
    context = context or ClassifierContext()
    base, _, arg = name.partition(":")
    registry = toy_classifiers()
    if base not in registry:
        known = ", ".join(sorted(registry))
        raise ValueError(f"unknown classifier {base!r}; known: {known}")
    if base == "constant":
        label = int(arg) if arg else 0
        if not 0 <= label < context.label_count:
            raise ValueError(f"constant label {label} outside the label set")
        return Constant(label=label, label_count=context.label_count)
    if base == "degree-threshold":
        threshold = int(arg) if arg else 1
        if threshold < 0:
            raise ValueError("threshold must be non-negative")
        return DegreeThreshold(threshold=threshold, label_count=context.label_count)
    if base == "majority-neighbor-label":
        if context.neighbor_labels is None:
            raise ValueError(
                "majority-neighbor-label needs neighbor labels from the task context"
            )
        return MajorityNeighborLabel(
            neighbor_labels=tuple(context.neighbor_labels),
            label_count=context.label_count,
        )
    if arg:
        raise ValueError(f"classifier {base!r} takes no argument")
    return registry[base](label_count=context.label_count)

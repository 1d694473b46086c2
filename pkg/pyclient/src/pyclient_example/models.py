"""Built-in classify functions.

parity is the conformance workhorse: tiny, stateless, and maximally
sensitive to single-bit noise. label propagation is the shape a real
model plugs in with - state built once up front (here a label per
candidate neighbor), then a pure function of the reconstructed vector.
"""

from __future__ import annotations

from typing import Sequence

from .session import ClassifyFn

__all__ = ["label_propagation_classifier", "parity_classifier"]


def parity_classifier() -> ClassifyFn:
    """Label = number of set coordinates mod 2."""

    def classify(vector):
        return sum(vector) & 1

    return classify


def label_propagation_classifier(
    neighbor_labels: Sequence[int], label_count: int
) -> ClassifyFn:
    """One propagation round over the reconstructed neighborhood row.

    Coordinate j of the vector selects candidate neighbor j, whose label
    is neighbor_labels[j]; the node takes the majority label among the
    selected neighbors. Ties and empty neighborhoods fall to the
    smallest label id.
    """
    if label_count < 1:
        raise ValueError("label_count must be positive")
    labels = tuple(int(v) for v in neighbor_labels)
    for j, lab in enumerate(labels):
        if not 0 <= lab < label_count:
            raise ValueError(f"neighbor {j} has label {lab} outside [0, {label_count})")

    def classify(vector):
        if len(vector) != len(labels):
            raise ValueError(
                f"vector has {len(vector)} coordinates, expected {len(labels)}"
            )
        votes = [0] * label_count
        for j, on in enumerate(vector):
            if on:
                votes[labels[j]] += 1
        best = max(votes)
        return votes.index(best) if best else 0

    return classify

"""Shared test helpers.

The table classifier used by the enumeration tests lives here because
both the oracle tests and the acceptance suite draw random classifiers
the same way: a full lookup table over {0,1}^n, which is the most
general classifier there is at small n.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from bincert.bitspace import Label, StructureVector


@dataclass(frozen=True)
class TableClassifier:
    """Arbitrary classifier given by a label per point of {0,1}^n."""

    table: Tuple[int, ...]
    label_count: int

    def classify(self, batch: Sequence[StructureVector]) -> Sequence[Label]:
        return [Label(self.table[x.bits]) for x in batch]


def random_table_classifier(n: int, num_labels: int, seed: int) -> TableClassifier:
    rng = np.random.default_rng(seed)
    table = tuple(int(v) for v in rng.integers(0, num_labels, size=1 << n))
    return TableClassifier(table=table, label_count=num_labels)

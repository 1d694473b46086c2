"""Command-line entry: pick a built-in classifier and serve standard I/O.

The certification engine runs this as a child process, e.g.

    bincert certify --classifier "proto:python3 -m pyclient_example parity" ...

label-prop needs a labels file ("index label" per line, one entry per
vector coordinate); indices missing from the file default to label 0.
"""

from __future__ import annotations

import argparse
import sys
from typing import List

from .models import label_propagation_classifier, parity_classifier
from .session import serve


def _load_neighbor_labels(path: str) -> List[int]:
    entries = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'index label'")
            entries[int(parts[0])] = int(parts[1])
    if not entries:
        raise ValueError(f"{path}: no label entries")
    size = max(entries) + 1
    return [entries.get(j, 0) for j in range(size)]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pyclient-example",
        description="stdio classifier worker for the certification engine",
    )
    sub = parser.add_subparsers(dest="model", required=True)
    sub.add_parser("parity", help="label = popcount mod 2")
    prop = sub.add_parser("label-prop", help="majority label among selected neighbors")
    prop.add_argument("--labels", required=True, help="'index label' per line")
    prop.add_argument("--num-labels", type=int, default=2)
    args = parser.parse_args(argv)

    if args.model == "parity":
        fn = parity_classifier()
    else:
        try:
            neighbor_labels = _load_neighbor_labels(args.labels)
            fn = label_propagation_classifier(neighbor_labels, args.num_labels)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    return serve(fn)


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Generate a synthetic random graph and certify every node on it.

Writes the graph, the label file, and the certification outputs into
one directory so a run can be inspected or re-run byte-for-byte later.
"""

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from bincert.harness import CertifyConfig, run_certify_command


def write_random_graph(out_dir: str, num_nodes: int, edge_prob: float,
                       num_labels: int, seed: int) -> str:
    rng = np.random.default_rng(seed)
    graph_path = os.path.join(out_dir, "graph.txt")
    labels_path = os.path.join(out_dir, "labels.txt")

    with open(labels_path, "w", encoding="utf-8") as handle:
        for u in range(num_nodes):
            handle.write(f"{u} {int(rng.integers(num_labels))}\n")

    with open(graph_path, "w", encoding="utf-8") as handle:
        handle.write(f"# nodes {num_nodes}\n")
        handle.write("# labels labels.txt\n")
        for i in range(num_nodes):
            for j in range(i + 1, num_nodes):
                if rng.random() < edge_prob:
                    handle.write(f"{i} {j}\n")
    return graph_path


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--nodes", type=int, default=50)
    parser.add_argument("--edge-prob", type=float, default=0.12)
    parser.add_argument("--classifier", default="degree-threshold:4")
    parser.add_argument("--beta", default="0.9")
    parser.add_argument("--alpha", type=float, default=0.001)
    parser.add_argument("--samples", type=int, default=10_000)
    parser.add_argument("--num-labels", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    os.makedirs(args.out, exist_ok=True)
    graph_path = write_random_graph(
        args.out, args.nodes, args.edge_prob, args.num_labels, args.seed)

    config = CertifyConfig(
        graph=graph_path,
        out=args.out,
        classifier=args.classifier,
        beta=args.beta,
        alpha=args.alpha,
        samples=args.samples,
        seed=args.seed,
        num_labels=args.num_labels,
    )
    return run_certify_command(config)


if __name__ == "__main__":
    raise SystemExit(main())

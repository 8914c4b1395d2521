#!/usr/bin/env python3
"""Convert public node-classification releases into the hetrewire dataset layout.

Two raw formats are understood:

  wiki/webkb  out1_node_feature_label.txt + out1_graph_edges.txt
              (Chameleon, Squirrel, Texas, Cornell, Wisconsin, Actor)
  planetoid   ind.<name>.{x,tx,allx,y,ty,ally,graph,test.index}
              (Cora, Citeseer, Pubmed)

Splits come from `<name>_split_*_<i>.npz` files holding train/val/test
boolean masks; without them, --random-splits draws 60/20/20 splits.

Output: edges.tsv, features.csv, labels.csv, splits.json, meta.json.
"""

import argparse
import json
import pickle
import re
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def read_wiki_webkb(raw: Path):
    feats, labels = {}, {}
    with open(raw / "out1_node_feature_label.txt") as f:
        next(f)
        for line in f:
            node, feat, label = line.rstrip("\n").split("\t")
            feats[int(node)] = np.array(feat.split(","), dtype=np.float64)
            labels[int(node)] = int(label)
    n = len(feats)
    if sorted(feats) != list(range(n)):
        raise SystemExit("node ids are not contiguous 0..N-1")
    x = np.stack([feats[i] for i in range(n)])
    y = np.array([labels[i] for i in range(n)], dtype=np.int64)
    edges = []
    with open(raw / "out1_graph_edges.txt") as f:
        next(f)
        for line in f:
            src, dst = line.split()
            edges.append((int(src), int(dst)))
    return x, y, edges


def _load_pickle(path: Path):
    with open(path, "rb") as f:
        return pickle.load(f, encoding="latin1")


def read_planetoid(raw: Path, name: str):
    part = {key: _load_pickle(raw / f"ind.{name}.{key}") for key in ("x", "tx", "allx", "y", "ty", "ally", "graph")}
    test_index = [int(line) for line in open(raw / f"ind.{name}.test.index") if line.strip()]
    test_sorted = np.sort(test_index)
    tx, ty = part["tx"], part["ty"]
    full_range = np.arange(test_sorted.min(), test_sorted.max() + 1)
    if len(full_range) != len(test_sorted):
        # Isolated test nodes are missing from tx/ty; pad them with zero rows.
        tx_ext = sp.lil_matrix((len(full_range), tx.shape[1]))
        tx_ext[test_sorted - test_sorted.min(), :] = tx
        ty_ext = np.zeros((len(full_range), ty.shape[1]))
        ty_ext[test_sorted - test_sorted.min(), :] = ty
        tx, ty = tx_ext, ty_ext
    x = sp.vstack((part["allx"], tx)).tolil()
    y = np.vstack((part["ally"], ty))
    x[test_index, :] = x[test_sorted, :]
    y[test_index, :] = y[test_sorted, :]
    graph = part["graph"]
    n = x.shape[0]
    edges = sorted({(int(s), int(d)) for s, nbrs in graph.items() for d in nbrs if int(s) != int(d) and int(d) < n})
    return np.asarray(x.todense(), dtype=np.float64), y.argmax(axis=1).astype(np.int64), edges


def read_split_files(split_dir: Path, name: str, n: int):
    found = []
    for path in split_dir.glob(f"{name}_split_*.npz"):
        m = re.search(r"_(\d+)\.npz$", path.name)
        if m:
            found.append((int(m.group(1)), path))
    splits = {}
    for index, path in sorted(found):
        masks = np.load(path)
        split = {}
        for key in ("train", "val", "test"):
            mask = np.asarray(masks[f"{key}_mask"]).astype(bool)
            if mask.shape[0] != n:
                raise SystemExit(f"{path}: mask covers {mask.shape[0]} nodes, dataset has {n}")
            split[key] = np.flatnonzero(mask).tolist()
        splits[str(index)] = split
    return splits


def random_splits(n: int, count: int, seed: int):
    rng = np.random.default_rng(seed)
    splits = {}
    for i in range(count):
        perm = rng.permutation(n)
        a, b = int(0.6 * n), int(0.8 * n)
        splits[str(i)] = {
            "train": sorted(perm[:a].tolist()),
            "val": sorted(perm[a:b].tolist()),
            "test": sorted(perm[b:].tolist()),
        }
    return splits


def write_dataset(out: Path, x, y, edges, splits, undirected: bool):
    out.mkdir(parents=True, exist_ok=True)
    n = x.shape[0]
    with open(out / "edges.tsv", "w") as f:
        for s, d in edges:
            f.write(f"{s}\t{d}\n")
    with open(out / "features.csv", "w") as f:
        for row in x:
            f.write(",".join(f"{v:g}" for v in row) + "\n")
    with open(out / "labels.csv", "w") as f:
        for label in y:
            f.write(f"{int(label)}\n")
    with open(out / "splits.json", "w") as f:
        json.dump({"splits": splits}, f)
    with open(out / "meta.json", "w") as f:
        json.dump({"num_nodes": n, "num_classes": int(y.max()) + 1, "undirected": undirected}, f, indent=2)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--format", choices=["wiki-webkb", "planetoid"], required=True)
    ap.add_argument("--raw", type=Path, required=True, help="directory with the raw files")
    ap.add_argument("--name", required=True, help="dataset name used in raw and split file names")
    ap.add_argument("--splits", type=Path, help="directory with <name>_split_*_<i>.npz files")
    ap.add_argument("--random-splits", type=int, default=0, help="draw this many 60/20/20 splits instead")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--directed", action="store_true", help="keep edge direction (default: undirected)")
    ap.add_argument("--out", type=Path, required=True)
    args = ap.parse_args(argv)

    if args.format == "wiki-webkb":
        x, y, edges = read_wiki_webkb(args.raw)
    else:
        x, y, edges = read_planetoid(args.raw, args.name)
    n = x.shape[0]
    bad = [(s, d) for s, d in edges if not (0 <= s < n and 0 <= d < n)]
    if bad:
        raise SystemExit(f"edge {bad[0]} references a node outside 0..{n - 1}")
    edges = sorted({(s, d) for s, d in edges if s != d})

    if args.splits:
        splits = read_split_files(args.splits, args.name, n)
        if not splits:
            raise SystemExit(f"no {args.name}_split_*.npz files in {args.splits}")
    elif args.random_splits > 0:
        splits = random_splits(n, args.random_splits, args.seed)
    else:
        raise SystemExit("give --splits or --random-splits")

    write_dataset(args.out, x, y, edges, splits, undirected=not args.directed)
    print(f"{args.name}: {n} nodes, {len(edges)} edges, {x.shape[1]} features, "
          f"{int(y.max()) + 1} classes, {len(splits)} splits -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Convert public graph benchmark distributions into the engine's dataset layout.

Supported source formats:

  webkb   Directories with out1_node_feature_label.txt (node_id, comma-separated
          0/1 features, integer label; header line) and out1_graph_edges.txt
          (node_id pairs; header line). Used by the Cornell / Texas / Wisconsin
          web page datasets.

  linqs   Directories with <name>.content (paper_id, tab-separated 0/1 features,
          class string) and <name>.cites (cited_id -> citing_id pairs). Used by
          the Cora / Citeseer citation datasets.

Output layout (see README): meta.json, edges.tsv, features.tsv, labels.tsv.
Splits are not converted; generate them with `hoggcn splits`.

Usage:
  convert_public.py webkb <src_dir> <out_dir> --name texas
  convert_public.py linqs <src_dir> <out_dir> --name cora
"""

import argparse
import json
import pathlib
import sys


def write_dataset(out_dir, name, features, labels, edges, classes):
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = len(features)
    f = len(features[0])
    meta = {"n": n, "f": f, "C": classes, "name": name}
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    with open(out / "features.tsv", "w") as fh:
        for row in features:
            fh.write("\t".join(row) + "\n")
    with open(out / "labels.tsv", "w") as fh:
        for y in labels:
            fh.write(f"{y}\n")
    with open(out / "edges.tsv", "w") as fh:
        for u, v in edges:
            fh.write(f"{u}\t{v}\n")
    print(f"wrote {name}: n={n} f={f} C={classes} edge_lines={len(edges)} -> {out}")


def convert_webkb(src_dir, out_dir, name):
    src = pathlib.Path(src_dir)
    features, labels = [], []
    with open(src / "out1_node_feature_label.txt") as fh:
        header = fh.readline()
        assert "node_id" in header, "unexpected header"
        rows = []
        for line in fh:
            node_id, feat, label = line.rstrip("\n").split("\t")
            rows.append((int(node_id), feat.split(","), int(label)))
    rows.sort()
    for i, (node_id, feat, label) in enumerate(rows):
        assert node_id == i, f"non-contiguous node id {node_id}"
        features.append(feat)
        labels.append(label)
    edges = []
    with open(src / "out1_graph_edges.txt") as fh:
        fh.readline()  # header
        for line in fh:
            u, v = line.split()
            edges.append((int(u), int(v)))
    write_dataset(out_dir, name, features, labels, edges, max(labels) + 1)


def convert_linqs(src_dir, out_dir, name):
    src = pathlib.Path(src_dir)
    content = src / f"{name}.content"
    cites = src / f"{name}.cites"
    ids, features, label_names = [], [], []
    with open(content) as fh:
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            ids.append(parts[0])
            features.append(parts[1:-1])
            label_names.append(parts[-1])
    classes = sorted(set(label_names))
    class_index = {c: i for i, c in enumerate(classes)}
    labels = [class_index[c] for c in label_names]
    node_index = {pid: i for i, pid in enumerate(ids)}
    edges, skipped = [], 0
    with open(cites) as fh:
        for line in fh:
            a, b = line.split()
            if a in node_index and b in node_index:
                edges.append((node_index[a], node_index[b]))
            else:
                skipped += 1
    if skipped:
        print(f"note: skipped {skipped} citation lines referencing unknown ids", file=sys.stderr)
    write_dataset(out_dir, name, features, labels, edges, len(classes))


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("format", choices=["webkb", "linqs"])
    ap.add_argument("src_dir")
    ap.add_argument("out_dir")
    ap.add_argument("--name", required=True, help="dataset name (linqs: file prefix)")
    args = ap.parse_args()
    if args.format == "webkb":
        convert_webkb(args.src_dir, args.out_dir, args.name)
    else:
        convert_linqs(args.src_dir, args.out_dir, args.name)


if __name__ == "__main__":
    main()

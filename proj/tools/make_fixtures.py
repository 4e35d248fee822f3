#!/usr/bin/env python3
"""Regenerates the small on-disk fixtures used by the test suite.

Outputs
  data/fixtures/k3/            generic format, triangle graph
  data/fixtures/gradcheck12/   generic format, the bundled gradient-check graph
  tests/fixtures/planetoid_*/  a 13-node Planetoid file set ("tiny") pickled four ways:
                                 py2  - protocol 2 with Python 2 str payloads and module names
                                 py3  - Python 3 default protocol
                                 p0   - protocol 0 (text opcodes)
                                 p5   - protocol 5 (in-band numpy buffers)
                               plus expected.json from the reference numpy/scipy/networkx
                               preprocessing
  tests/fixtures/ego/          ego network 9 in the Facebook file layout

Requires numpy, scipy and networkx. Output is deterministic.
"""

import collections
import io
import json
import pathlib
import pickle
import struct

import networkx as nx
import numpy as np
import scipy.sparse as sp

ROOT = pathlib.Path(__file__).resolve().parent.parent


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# ---------------------------------------------------------------- generic format

def generic_fixtures():
    k3 = ROOT / "data/fixtures/k3"
    write(k3 / "edges.txt", "# triangle\na b\nb c\na c\n")
    write(k3 / "features.csv", "a,1\nb,1\nc,1\n")
    write(k3 / "labels.csv", "a,x\nb,y\nc,x\n")

    # Must match gradcheck_fixture() in include/mgcmn/gradcheck.hpp.
    edges = [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5), (5, 6),
             (6, 7), (7, 8), (6, 8), (8, 9), (9, 10), (2, 9), (1, 10), (10, 11)]
    gc = ROOT / "data/fixtures/gradcheck12"
    write(gc / "edges.txt", "".join(f"{u} {v}\n" for u, v in edges))
    rows = []
    for v in range(12):
        vals = [((v * 7 + f * 3) % 5) / 4.0 for f in range(5)]
        rows.append(",".join([str(v)] + [repr(x) for x in vals]))
    write(gc / "features.csv", "\n".join(rows) + "\n")
    write(gc / "labels.csv", "".join(f"{v},{v % 3}\n" for v in range(12)))


# ---------------------------------------------------------------- Planetoid

class Py2Pickler(pickle._Pickler):
    """Protocol-2 pickler that writes str/bytes as Python 2 byte strings and
    uses the module names of Python 2-era numpy/scipy."""

    RENAMES = {
        "numpy._core.multiarray": "numpy.core.multiarray",
        "builtins": "__builtin__",
        "copyreg": "copy_reg",
        "scipy.sparse._csr": "scipy.sparse.csr",
    }

    dispatch = pickle._Pickler.dispatch.copy()

    def save_py2_str(self, obj):
        data = obj if isinstance(obj, bytes) else obj.encode("latin1")
        if len(data) < 256:
            self.write(pickle.SHORT_BINSTRING + bytes([len(data)]) + data)
        else:
            self.write(pickle.BINSTRING + struct.pack("<i", len(data)) + data)
        self.memoize(obj)

    dispatch[bytes] = save_py2_str
    dispatch[str] = save_py2_str

    def save_global(self, obj, name=None):
        module = getattr(obj, "__module__", None)
        name = name or obj.__qualname__
        module = self.RENAMES.get(module, module)
        self.write(pickle.GLOBAL + module.encode() + b"\n" + name.encode() + b"\n")
        self.memoize(obj)

    dispatch[type] = save_global


def dump(obj, path, style):
    path.parent.mkdir(parents=True, exist_ok=True)
    if style == "py2":
        buf = io.BytesIO()
        Py2Pickler(buf, protocol=2).dump(obj)
        path.write_bytes(buf.getvalue())
    else:
        protocol = {"py3": pickle.DEFAULT_PROTOCOL, "p0": 0, "p5": 5}[style]
        path.write_bytes(pickle.dumps(obj, protocol=protocol))


def tiny_planetoid():
    rng = np.random.default_rng(5)
    n_all, n_train, n_feat, n_cls = 8, 3, 4, 3
    test_index = [12, 8, 10, 11]  # file order; 9 is a gap (padding node)

    allx_dense = (rng.random((n_all, n_feat)) < 0.5).astype(np.float32)
    allx_dense[6] = 0.0  # a featureless node
    tx_dense = (rng.random((len(test_index), n_feat)) < 0.5).astype(np.float32)
    ally = np.eye(n_cls)[rng.integers(0, n_cls, n_all)]
    ty = np.eye(n_cls)[rng.integers(0, n_cls, len(test_index))]

    allx = sp.csr_matrix(allx_dense)
    tx = sp.csr_matrix(tx_dense)
    x = sp.csr_matrix(allx_dense[:n_train])
    y = ally[:n_train]

    graph = collections.defaultdict(list)
    links = [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7),
             (7, 8), (8, 10), (10, 11), (11, 12), (12, 0), (3, 10)]
    for u, v in links:
        graph[u].append(v)
        graph[v].append(u)
    graph[4].append(5)   # duplicate citation record
    graph[7].append(7)   # self-citation

    objects = {"x": x, "y": y, "tx": tx, "ty": ty, "allx": allx, "ally": ally, "graph": graph}
    for style in ("py2", "py3", "p0", "p5"):
        d = ROOT / f"tests/fixtures/planetoid_{style}"
        for key, obj in objects.items():
            dump(obj, d / f"ind.tiny.{key}", style)
        write(d / "ind.tiny.test.index", "".join(f"{i}\n" for i in test_index))

    # Reference preprocessing, written out in the usual numpy/scipy idiom.
    test_idx_reorder = test_index
    test_idx_range = np.sort(test_idx_reorder)
    full = range(min(test_idx_reorder), max(test_idx_reorder) + 1)
    tx_ext = sp.lil_matrix((len(full), x.shape[1]))
    tx_ext[test_idx_range - min(test_idx_range), :] = tx
    ty_ext = np.zeros((len(full), y.shape[1]))
    ty_ext[test_idx_range - min(test_idx_range), :] = ty
    features = sp.vstack((allx, tx_ext)).tolil()
    features[test_idx_reorder, :] = features[test_idx_range, :]
    labels = np.vstack((ally, ty_ext))
    labels[test_idx_reorder, :] = labels[test_idx_range, :]
    g = nx.from_dict_of_lists(graph)
    edges = sorted((min(u, v), max(u, v)) for u, v in g.edges() if u != v)
    label_ids = [int(np.argmax(r)) if r.max() > 0 else -1 for r in labels]
    expected = {
        "nodes": features.shape[0],
        "features": features.toarray().tolist(),
        "labels": label_ids,
        "edges": edges,
        "train": list(range(len(y))),
        "validation": list(range(len(y), len(y) + 3)),
        "test": [int(i) for i in test_idx_range],
        "raw_list_entries": sum(len(v) for v in graph.values()),
    }
    for style in ("py2", "py3", "p0", "p5"):
        write(ROOT / f"tests/fixtures/planetoid_{style}/expected.json", json.dumps(expected, indent=1) + "\n")


# ---------------------------------------------------------------- ego network

def ego_fixture():
    d = ROOT / "tests/fixtures/ego"
    feats = {1: "1 0 1", 2: "0 1 1", 3: "1 1 0", 4: "0 0 1", 5: "1 0 0",
             6: "0 1 0", 7: "1 1 1", 8: "0 0 0", 10: "1 0 1"}
    write(d / "9.feat", "".join(f"{k} {v}\n" for k, v in feats.items()))
    write(d / "9.egofeat", "1 1 0\n")
    write(d / "9.featnames", "0 a;anonymized feature 0\n1 b;anonymized feature 1\n2 c;anonymized feature 2\n")
    edges = ["1 2", "2 1", "2 3", "3 1", "3 4", "4 5", "5 6", "6 4", "7 8", "8 1",
             "1 10", "10 2", "11 3", "4 4"]
    write(d / "9.edges", "\n".join(edges) + "\n")
    write(d / "9.circles", "circle0\t1\t2\t3\ncircle1\t3\t4\t5\t6\ncircle2\t7\t8\ncircle3\t11\n")


if __name__ == "__main__":
    generic_fixtures()
    tiny_planetoid()
    ego_fixture()

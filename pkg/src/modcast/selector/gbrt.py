"""Least-squares gradient-boosted regression trees with a JSON node-table format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import InvalidInputError

FORMAT_NAME = "modcast-gbrt"
FORMAT_VERSION = 1
LEAF = -1


@dataclass
class RegressionTree:
    """Flat node table; ``feature[i] == LEAF`` marks a leaf holding ``value[i]``."""

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)

    def _add(self, feature=LEAF, threshold=0.0, value=0.0) -> int:
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        return len(self.feature) - 1

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(len(X), dtype=np.int64)
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left, right = np.asarray(self.left), np.asarray(self.right)
        active = feature[node] != LEAF
        while active.any():
            rows = np.nonzero(active)[0]
            n = node[rows]
            go_left = X[rows, feature[n]] <= threshold[n]
            node[rows] = np.where(go_left, left[n], right[n])
            active = feature[node] != LEAF
        return np.asarray(self.value)[node]

    def to_dict(self) -> dict:
        return {k: list(getattr(self, k)) for k in ("feature", "threshold", "left", "right", "value")}

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        return cls(**{k: list(d[k]) for k in ("feature", "threshold", "left", "right", "value")})


@dataclass(frozen=True)
class BinnedFeatures:
    """Each feature's sorted distinct values and every row's bin code, laid end to end."""

    codes: np.ndarray  # [N, F] flat bin index (feature offset included)
    values: np.ndarray  # distinct value of each flat bin
    feature: np.ndarray  # feature of each flat bin
    starts: np.ndarray  # first flat bin of each feature

    @classmethod
    def from_matrix(cls, X: np.ndarray) -> "BinnedFeatures":
        codes, values, feature, starts = [], [], [], []
        offset = 0
        for f in range(X.shape[1]):
            uniq, inv = np.unique(X[:, f], return_inverse=True)
            codes.append(inv + offset)
            values.append(uniq)
            feature.append(np.full(len(uniq), f))
            starts.append(offset)
            offset += len(uniq)
        return cls(np.stack(codes, axis=1), np.concatenate(values), np.concatenate(feature), np.array(starts))


def _best_split(binned: BinnedFeatures, r: np.ndarray, rows: np.ndarray):
    """Best (gain, feature, threshold) for ``rows``; ties go to the lowest feature, then threshold."""
    n = len(rows)
    n_bins = len(binned.values)
    flat = binned.codes[rows].ravel()
    weights = np.repeat(r[rows], binned.codes.shape[1])
    sums = np.bincount(flat, weights=weights, minlength=n_bins)
    counts = np.bincount(flat, minlength=n_bins).astype(np.float64)
    seg = binned.starts[binned.feature]
    cs, cc = np.cumsum(sums), np.cumsum(counts)
    base_s = np.where(seg > 0, cs[seg - 1], 0.0)
    base_c = np.where(seg > 0, cc[seg - 1], 0.0)
    s_left, n_left = cs - base_s, cc - base_c
    total = r[rows].sum()
    valid = (counts > 0) & (n_left > 0) & (n_left < n)
    if not valid.any():
        return 0.0, LEAF, 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = s_left**2 / n_left + (total - s_left) ** 2 / (n - n_left) - total * total / n
    gain = np.where(valid, gain, -np.inf)
    i = int(np.argmax(gain))
    if not gain[i] > 1e-12 * max(1.0, total * total / n):
        return 0.0, LEAF, 0.0
    f = int(binned.feature[i])
    end = binned.starts[f + 1] if f + 1 < len(binned.starts) else n_bins
    nxt = i + 1 + int(np.nonzero(counts[i + 1 : end] > 0)[0][0])
    return float(gain[i]), f, 0.5 * (binned.values[i] + binned.values[nxt])


def fit_tree(X: np.ndarray, residual: np.ndarray, depth: int, binned: BinnedFeatures | None = None, min_leaf: int = 1) -> RegressionTree:
    """Greedy variance-reduction tree of at most ``depth`` levels with mean-residual leaves.

    Candidate thresholds are midpoints between consecutive distinct values
    present in the node, so the search is exact.
    """
    X = np.asarray(X, dtype=np.float64)
    binned = binned or BinnedFeatures.from_matrix(X)
    tree = RegressionTree()

    def grow(rows, level):
        node = tree._add(value=float(residual[rows].mean()))
        if level >= depth or len(rows) < 2 * min_leaf:
            return node
        gain, f, thr = _best_split(binned, residual, rows)
        if f == LEAF:
            return node
        mask = X[rows, f] <= thr
        if mask.sum() < min_leaf or (~mask).sum() < min_leaf:
            return node
        tree.feature[node], tree.threshold[node] = f, float(thr)
        tree.left[node] = grow(rows[mask], level + 1)
        tree.right[node] = grow(rows[~mask], level + 1)
        return node

    grow(np.arange(len(X)), 0)
    return tree


@dataclass
class BoostedEnsemble:
    trees: list[RegressionTree]
    shrinkage: float
    base_score: float
    n_features: int
    feature_names: tuple[str, ...] = ()
    loss_trace: list[float] = field(default_factory=list)

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise InvalidInputError(f"expected [N, {self.n_features}] features, got {X.shape}")
        out = np.full(len(X), self.base_score)
        for tree in self.trees:
            out += self.shrinkage * tree.predict(X)
        return out

    def to_json(self) -> str:
        doc = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "base_score": self.base_score,
            "shrinkage": self.shrinkage,
            "n_features": self.n_features,
            "feature_names": list(self.feature_names),
            "trees": [t.to_dict() for t in self.trees],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "BoostedEnsemble":
        doc = json.loads(text)
        if doc.get("format") != FORMAT_NAME:
            raise InvalidInputError("not a boosted-tree model document")
        if doc.get("version") != FORMAT_VERSION:
            raise InvalidInputError(f"unsupported model version {doc.get('version')}")
        trees = [RegressionTree.from_dict(t) for t in doc["trees"]]
        n = int(doc["n_features"])
        for t in trees:
            if any(f != LEAF and not 0 <= f < n for f in t.feature):
                raise InvalidInputError("tree references an invalid feature index")
        return cls(trees, float(doc["shrinkage"]), float(doc["base_score"]), n, tuple(doc.get("feature_names", ())))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "BoostedEnsemble":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def fit_boosted_trees(
    X,
    y,
    n_trees: int = 200,
    depth: int = 3,
    shrinkage: float = 0.1,
    feature_names=(),
) -> BoostedEnsemble:
    """Each round fits a tree to the current residuals and adds it scaled by ``shrinkage``."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y) or len(y) == 0:
        raise InvalidInputError("X must be [N, F] with N matching y")
    if not (0.0 < shrinkage <= 1.0) or n_trees < 0 or depth < 1:
        raise InvalidInputError("need 0 < shrinkage <= 1, n_trees >= 0, depth >= 1")
    base = float(y.mean())
    ens = BoostedEnsemble([], float(shrinkage), base, X.shape[1], tuple(feature_names))
    pred = np.full(len(y), base)
    ens.loss_trace.append(float(np.mean((y - pred) ** 2)))
    if np.all(y == y[0]):
        ens.base_score = float(y[0])
        return ens
    binned = BinnedFeatures.from_matrix(X)
    for _ in range(n_trees):
        tree = fit_tree(X, y - pred, depth, binned)
        pred = pred + shrinkage * tree.predict(X)
        ens.trees.append(tree)
        ens.loss_trace.append(float(np.mean((y - pred) ** 2)))
    return ens

"""
Random-forest surrogate with SMAC-style uncertainty.

Each tree is grown on a bootstrap resample. At every node, ceil(d/2) random
coordinates are tried with a handful of random thresholds each and the split
with the largest reduction in squared error wins. Predictive variance is the
spread of the per-tree predictions.
"""

import math
from dataclasses import dataclass, field

import numpy as np

_MIN_GAIN = 1e-12


@dataclass(frozen=True)
class RegressionTree:
    """Flat node arrays; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @classmethod
    def leaf(cls, value: float) -> "RegressionTree":
        return cls(
            feature=np.array([-1]),
            threshold=np.array([0.0]),
            left=np.array([-1]),
            right=np.array([-1]),
            value=np.array([float(value)]),
        )

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row of ``X``."""
        node = np.zeros(len(X), dtype=int)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.nonzero(active)[0]
            cur = node[idx]
            go_left = X[idx, self.feature[cur]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] >= 0
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


@dataclass(frozen=True)
class RFModel:
    trees: list[RegressionTree]
    min_leaf_size: int = 3
    # all trees packed into one node table; child indices are global
    _feature: np.ndarray = field(init=False, repr=False, compare=False)
    _threshold: np.ndarray = field(init=False, repr=False, compare=False)
    _left: np.ndarray = field(init=False, repr=False, compare=False)
    _right: np.ndarray = field(init=False, repr=False, compare=False)
    _value: np.ndarray = field(init=False, repr=False, compare=False)
    _roots: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sizes = [len(t.value) for t in self.trees]
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)

        def shift(children, offset):
            return np.where(children >= 0, children + offset, -1)

        object.__setattr__(self, "_feature", np.concatenate([t.feature for t in self.trees]))
        object.__setattr__(self, "_threshold", np.concatenate([t.threshold for t in self.trees]))
        object.__setattr__(self, "_left", np.concatenate([shift(t.left, o) for t, o in zip(self.trees, offsets)]))
        object.__setattr__(self, "_right", np.concatenate([shift(t.right, o) for t, o in zip(self.trees, offsets)]))
        object.__setattr__(self, "_value", np.concatenate([t.value for t in self.trees]))
        object.__setattr__(self, "_roots", offsets)

    @property
    def tree_count(self) -> int:
        return len(self.trees)

    def per_tree(self, Xq) -> np.ndarray:
        """Leaf value of every tree at every query, shape (tree_count, len(Xq))."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        node = np.repeat(self._roots[:, None], len(Xq), axis=1)
        cols = np.broadcast_to(np.arange(len(Xq)), node.shape)
        active = self._feature[node] >= 0
        while active.any():
            cur = node[active]
            go_left = Xq[cols[active], self._feature[cur]] <= self._threshold[cur]
            node[active] = np.where(go_left, self._left[cur], self._right[cur])
            active = self._feature[node] >= 0
        return self._value[node]

    def predict(self, Xq) -> tuple[np.ndarray, np.ndarray]:
        per_tree = self.per_tree(Xq)
        return per_tree.mean(axis=0), per_tree.var(axis=0)


class _TreeBuilder:
    def __init__(self, X, z, rng, min_leaf_size: int, n_thresholds: int):
        self.X = X
        self.z = z
        self.rng = rng
        self.min_leaf_size = min_leaf_size
        self.n_thresholds = n_thresholds
        self.n_candidates = math.ceil(X.shape[1] / 2)
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _new_node(self, idx: np.ndarray) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(self.z[idx].mean()))
        return len(self.value) - 1

    def _best_split(self, idx: np.ndarray):
        """
        Score every (coordinate, threshold) candidate at once; the first
        candidate with the largest positive gain wins.
        """
        X, z = self.X[idx], self.z[idx]
        n = len(idx)
        zc = z - z.mean()
        base_sse = float(zc @ zc)

        coords = self.rng.choice(X.shape[1], size=self.n_candidates, replace=False)
        cols = X[:, coords]
        lo, hi = cols.min(axis=0), cols.max(axis=0)
        thresholds = np.stack([
            self.rng.uniform(lo[k], hi[k], size=self.n_thresholds) for k in range(len(coords))
        ])

        masks = (cols[:, :, None] <= thresholds[None, :, :]).astype(float)  # (n, coord, threshold)
        n_left = masks.sum(axis=0)
        n_right = n - n_left
        sum_left = np.tensordot(zc, masks, axes=1)
        sq_left = np.tensordot(zc * zc, masks, axes=1)
        # zc sums to zero, so the right-hand sum is -sum_left
        with np.errstate(divide="ignore", invalid="ignore"):
            sse = (sq_left - sum_left**2 / n_left) + ((base_sse - sq_left) - sum_left**2 / n_right)
            gain = base_sse - sse
            valid = (
                (n_left >= self.min_leaf_size)
                & (n_right >= self.min_leaf_size)
                & (hi > lo)[:, None]
                & (gain > _MIN_GAIN * base_sse)
            )
        if not valid.any():
            return None
        k, m = np.unravel_index(np.argmax(np.where(valid, gain, -np.inf)), gain.shape)
        j, t = int(coords[k]), float(thresholds[k, m])
        return j, t, X[:, j] <= t

    def build(self) -> RegressionTree:
        n = len(self.z)
        root_idx = self.rng.integers(0, n, size=n)  # bootstrap resample
        stack = [(self._new_node(root_idx), root_idx)]
        while stack:
            node, idx = stack.pop()
            if len(idx) < 2 * self.min_leaf_size or np.ptp(self.z[idx]) == 0:
                continue
            split = self._best_split(idx)
            if split is None:
                continue
            j, t, mask = split
            self.feature[node] = j
            self.threshold[node] = t
            left_idx, right_idx = idx[mask], idx[~mask]
            self.left[node] = self._new_node(left_idx)
            self.right[node] = self._new_node(right_idx)
            stack.append((self.right[node], right_idx))
            stack.append((self.left[node], left_idx))
        return RegressionTree(
            feature=np.array(self.feature, dtype=int),
            threshold=np.array(self.threshold, dtype=float),
            left=np.array(self.left, dtype=int),
            right=np.array(self.right, dtype=int),
            value=np.array(self.value, dtype=float),
        )


def fit_rf(
    X,
    z,
    rng: np.random.Generator,
    n_trees: int = 64,
    min_leaf_size: int = 3,
    n_thresholds: int = 10,
) -> RFModel:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    z = np.asarray(z, dtype=float)
    if len(z) < 1:
        raise ValueError("a forest needs at least one training point")
    trees = [
        _TreeBuilder(X, z, rng, min_leaf_size, n_thresholds).build()
        for _ in range(n_trees)
    ]
    return RFModel(trees=trees, min_leaf_size=min_leaf_size)


def predict_rf(model: RFModel, x) -> tuple[float, float]:
    mean, var = model.predict(np.asarray(x, dtype=float)[None, :])
    return float(mean[0]), float(var[0])

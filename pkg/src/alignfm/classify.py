"""Linear SVM stand-in, AUC and grid-searched cross-validation."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .errors import ContractError, InputFormatError

DEFAULT_BETAS = (1.0, 10.0, 100.0, 1000.0, 10000.0)
DEFAULT_CS = (0.001, 0.01, 0.1, 1.0, 10.0, 100.0)


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    C: float
    epochs: int
    seed: int
    objective: list[float] = field(default_factory=list)

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.weights.size:
            raise ContractError(f"expected {self.weights.size} features, got shape {X.shape}")
        return X @ self.weights + self.bias

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(np.int64)

    def save(self, path) -> None:
        from .formats import format_number

        lines = [str(self.weights.size), format_number(self.bias)]
        lines.append(" ".join(format_number(w) for w in self.weights))
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> LinearModel:
        lines = Path(path).read_text().split("\n")
        try:
            D = int(lines[0])
            bias = float(lines[1])
            w = np.array([float(t) for t in lines[2].split()])
        except (IndexError, ValueError) as exc:
            raise InputFormatError(f"malformed model file ({exc})", path) from None
        if w.size != D:
            raise InputFormatError(f"model declares {D} weights but has {w.size}", path)
        return cls(w, bias, C=float("nan"), epochs=0, seed=0)


def _check_labels(labels) -> np.ndarray:
    y = np.asarray(labels)
    if y.ndim != 1:
        raise ContractError("labels must be 1-d")
    if not np.isin(y, (0, 1)).all():
        raise ContractError("labels must be 0 or 1")
    if y.min() == y.max():
        raise ContractError("both classes must be present")
    return y.astype(np.int64)


def _objective(w, b, X, ys, C) -> float:
    margins = ys * (X @ w + b)
    return 0.5 * float(w @ w + b * b) + C * float(np.maximum(0.0, 1.0 - margins).sum())


def train_linear(
    features, labels, C: float = 1.0, epochs: int = 20, seed: int = 0, batch_size: int = 16
) -> LinearModel:
    """L2-regularised hinge loss ``0.5 |w|^2 + C * sum(hinge)`` by mini-batch Pegasos.

    The bias is learned as the weight of a constant feature (regularised, as
    in LIBLINEAR with ``-B 1``). Step size is ``1 / (lambda t)`` with
    ``lambda = 1 / (C N)``. Iterates are averaged over each epoch; the returned
    model is the epoch average with the lowest objective, and ``objective``
    records the best-so-far value after every epoch.
    """
    X = np.asarray(features, dtype=np.float64)
    y = _check_labels(labels)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ContractError("features must be an (N, D) array matching the labels")
    if not C > 0:
        raise ContractError("C must be positive")
    n, D = X.shape
    ys = 2.0 * y - 1.0
    Xb = np.hstack([X, np.ones((n, 1))])
    lam = 1.0 / (C * n)
    rng = np.random.default_rng(seed)
    w = np.zeros(D + 1)
    best_w, best_obj = w.copy(), _objective(w[:-1], w[-1], X, ys, C)
    history = []
    t = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        avg = np.zeros_like(w)
        steps = 0
        for start in range(0, n, batch_size):
            t += 1
            idx = order[start : start + batch_size]
            eta = 1.0 / (lam * t)
            viol = idx[ys[idx] * (Xb[idx] @ w) < 1.0]
            w *= 1.0 - eta * lam
            if viol.size:
                w += (eta / idx.size) * (ys[viol] @ Xb[viol])
            norm = math.sqrt(float(w @ w))
            if norm > 1.0 / math.sqrt(lam):
                w *= 1.0 / (math.sqrt(lam) * norm)
            steps += 1
            avg += (w - avg) / steps
        obj = _objective(avg[:-1], avg[-1], X, ys, C)
        if obj < best_obj:
            best_w, best_obj = avg.copy(), obj
        history.append(best_obj)
    return LinearModel(best_w[:-1].copy(), float(best_w[-1]), float(C), int(epochs), int(seed), history)


def auc(scores, labels) -> float:
    """Normalised Mann-Whitney U; tied scores count one half."""
    s = np.asarray(scores, dtype=np.float64)
    y = _check_labels(labels)
    if s.shape != y.shape:
        raise ContractError("scores and labels must have the same length")
    ranks = rankdata(s)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def stratified_folds(labels, folds: int, seed: int) -> np.ndarray:
    """Fold id per example; each class is shuffled and dealt round-robin."""
    y = np.asarray(labels)
    if folds < 2:
        raise ContractError("need at least two folds")
    if y.size < folds:
        raise ContractError(f"{y.size} examples cannot fill {folds} folds")
    rng = np.random.default_rng(seed)
    assign = np.empty(y.size, dtype=np.int64)
    offset = 0
    for cls in (0, 1):
        members = rng.permutation(np.flatnonzero(y == cls))
        assign[members] = (np.arange(members.size) + offset) % folds
        offset += members.size
    for f in range(folds):
        test = y[assign == f]
        if test.size == 0 or test.min() == test.max():
            raise ContractError(f"fold {f} does not contain both classes")
    return assign


@dataclass(frozen=True)
class CVResult:
    beta: float
    C: float
    auc: float
    table: tuple[tuple[float, float, float], ...]  # (beta, C, mean AUC)


def cross_validate(
    featurize: Callable[[float], np.ndarray],
    labels,
    folds: int = 3,
    betas: Sequence[float] = DEFAULT_BETAS,
    Cs: Sequence[float] = DEFAULT_CS,
    epochs: int = 20,
    seed: int = 0,
) -> CVResult:
    """Grid search over ``(beta, C)`` by mean held-out AUC.

    ``featurize(beta)`` returns the (N, D) feature matrix for a bandwidth;
    it is called once per beta. Ties keep the first grid point.
    """
    y = _check_labels(labels)
    assign = stratified_folds(y, folds, seed)
    table = []
    best = None
    for beta in betas:
        X = np.asarray(featurize(beta))
        if X.shape[0] != y.size:
            raise ContractError("featurize returned the wrong number of rows")
        for C in Cs:
            scores = []
            for f in range(folds):
                train, test = assign != f, assign == f
                model = train_linear(X[train], y[train], C=C, epochs=epochs, seed=seed + f)
                scores.append(auc(model.decision_function(X[test]), y[test]))
            mean = float(np.mean(scores))
            table.append((float(beta), float(C), mean))
            if best is None or mean > best[2]:
                best = table[-1]
    return CVResult(best[0], best[1], best[2], tuple(table))

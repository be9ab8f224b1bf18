import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from alignfm.classify import (
    DEFAULT_BETAS,
    DEFAULT_CS,
    LinearModel,
    auc,
    cross_validate,
    stratified_folds,
    train_linear,
)
from alignfm.errors import ContractError, InputFormatError


def toy(n=200, seed=0, sep=3.0):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    X = rng.normal(size=(n, 2))
    X[:, 0] += np.where(y == 1, sep, -sep)
    return X, y


def test_auc_examples():
    y = np.array([0, 0, 1, 1])
    assert auc([0.1, 0.2, 0.3, 0.4], y) == 1.0
    assert auc([0.4, 0.3, 0.2, 0.1], y) == 0.0
    assert auc([1, 1, 1, 1], y) == 0.5
    with pytest.raises(ContractError):
        auc([1, 2], [1, 1])


@given(st.lists(st.integers(-100, 100), min_size=4, max_size=40), st.integers(0, 10**6))
def test_auc_monotone_invariant(scores, seed):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, len(scores))
    y[0], y[1] = 0, 1
    s = np.array(scores, dtype=float)
    assert auc(s, y) == auc(s**3 + 2 * s + 1, y)
    # brute-force pair count
    pos, neg = s[y == 1], s[y == 0]
    ref = np.mean([(p > q) + 0.5 * (p == q) for p in pos for q in neg])
    assert auc(s, y) == pytest.approx(ref)


def test_separable_training_accuracy():
    X, y = toy(sep=5.0)
    m = train_linear(X, y, C=10, epochs=30, seed=1)
    assert (m.predict(X) == y).all()
    assert all(a >= b for a, b in zip(m.objective, m.objective[1:]))


def test_deterministic():
    X, y = toy()
    a, b = train_linear(X, y, seed=3), train_linear(X, y, seed=3)
    assert np.array_equal(a.weights, b.weights) and a.bias == b.bias


def test_chance_level_on_noise():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(4000, 10))
    y = rng.integers(0, 2, 4000)
    m = train_linear(X[:2000], y[:2000], C=1, seed=0)
    assert abs(auc(m.decision_function(X[2000:]), y[2000:]) - 0.5) < 0.05


def test_duplicated_dataset_same_decisions():
    X, y = toy(sep=2.0)
    a = train_linear(X, y, C=1, epochs=40, seed=0)
    b = train_linear(np.vstack([X, X]), np.concatenate([y, y]), C=0.5, epochs=20, seed=0)
    probe = np.random.default_rng(1).normal(scale=3, size=(500, 2))
    agree = np.mean(np.sign(a.decision_function(probe)) == np.sign(b.decision_function(probe)))
    assert agree > 0.97


def test_training_rejects_bad_input():
    X, y = toy()
    with pytest.raises(ContractError):
        train_linear(X, np.zeros_like(y))
    with pytest.raises(ContractError):
        train_linear(X, y + 1)
    with pytest.raises(ContractError):
        train_linear(X[:-1], y)
    with pytest.raises(ContractError):
        train_linear(X, y, C=0)


def test_model_roundtrip(tmp_path):
    X, y = toy()
    m = train_linear(X, y, seed=2)
    path = tmp_path / "m.txt"
    m.save(path)
    back = LinearModel.load(path)
    assert np.array_equal(back.weights, m.weights) and back.bias == m.bias
    with pytest.raises(ContractError):
        back.decision_function(np.zeros((3, 5)))
    path.write_text("3\n0\n1 2\n")
    with pytest.raises(InputFormatError):
        LinearModel.load(path)


def test_folds():
    y = np.array([0] * 30 + [1] * 12)
    a = stratified_folds(y, 3, 5)
    assert np.array_equal(a, stratified_folds(y, 3, 5))
    for f in range(3):
        assert (y[a == f] == 1).sum() == 4
    with pytest.raises(ContractError):
        stratified_folds(np.array([0, 0, 0, 0, 1]), 3, 0)
    with pytest.raises(ContractError):
        stratified_folds(y, 1, 0)


def test_grid_defaults():
    assert DEFAULT_BETAS == (1, 10, 100, 1000, 10000)
    assert DEFAULT_CS == (0.001, 0.01, 0.1, 1, 10, 100)


def test_cross_validate_single_point():
    X, y = toy()
    calls = []

    def featurize(beta):
        calls.append(beta)
        return X

    res = cross_validate(featurize, y, 3, betas=[5.0], Cs=[2.0], seed=1)
    assert (res.beta, res.C) == (5.0, 2.0) and calls == [5.0]
    assert res.auc > 0.95 and len(res.table) == 1


def test_cross_validate_picks_informative_beta():
    X, y = toy(sep=1.5)
    noise = np.random.default_rng(0).normal(size=X.shape)
    res = cross_validate(lambda b: X if b == 2 else noise, y, 3, betas=[1, 2, 3], Cs=[1.0], seed=0)
    assert res.beta == 2

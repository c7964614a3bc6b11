"""Classical classifiers on TF-IDF vectors: multinomial NB, logistic
regression, and a primal (Pegasos-style) linear SVM, plus grid-search tuning.

Conventions shared by all three model families:
  * the positive class is Bullying (class id 0 in CLASS_ORDER); the binary
    encodings are y=1 / y=+1 for Bullying and y=0 / y=-1 for Non-bullying;
  * score ties break toward the class with the lower id (Bullying);
  * training is deterministic: logistic regression is full-batch, the SVM
    shuffles with the pinned PRNG under its seed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .corpus import CLASS_ORDER, Label
from .features import (
    SparseVector,
    TfidfConfig,
    fit_tfidf,
    transform,
    transform_all,
)
from .metrics import MetricsReport, evaluate
from .rng import Rng


class TrainingError(Exception):
    """Invalid training request or diverged optimization."""


def _to_csr(vectors: list[SparseVector], n_features: int) -> sp.csr_matrix:
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for vec in vectors:
        indices.extend(vec.indices)
        data.extend(vec.values)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64),
         np.asarray(indptr, dtype=np.int64)),
        shape=(len(vectors), n_features),
    )


# ----------------------------------------------------------------------------
# multinomial Naive Bayes
# ----------------------------------------------------------------------------

@dataclass
class NaiveBayesModel:
    log_prior: np.ndarray       # shape (2,), indexed by class id
    log_likelihood: np.ndarray  # shape (2, V)
    alpha: float

    @property
    def n_features(self) -> int:
        return self.log_likelihood.shape[1]


def train_nb(
    vectors: list[SparseVector],
    labels: list[Label],
    alpha: float = 1.0,
    n_features: int | None = None,
) -> NaiveBayesModel:
    """Multinomial NB over (possibly fractional) TF-IDF term masses.

    log_likelihood[c][t] = ln((alpha + m_ct) / (alpha*V + m_c)) where m_ct is
    the total mass of term t in class c and m_c its row sum, so each class's
    likelihoods exponentiate to a proper distribution over the vocabulary.
    """
    if len(vectors) != len(labels):
        raise TrainingError("vectors and labels must align")
    if alpha <= 0:
        raise TrainingError(f"alpha must be positive, got {alpha}")
    if n_features is None:
        n_features = max((max(v.indices) + 1 for v in vectors if v.indices), default=0)
    if n_features == 0:
        raise TrainingError("cannot train on an empty feature space")
    mass = np.zeros((2, n_features), dtype=np.float64)
    counts = [0, 0]
    for vec, label in zip(vectors, labels):
        c = label.index
        counts[c] += 1
        for i, v in zip(vec.indices, vec.values):
            mass[c, i] += v
    for label in CLASS_ORDER:
        if counts[label.index] == 0:
            raise TrainingError(f"class {label.value} has no training documents")
    total = mass.sum(axis=1, keepdims=True)
    log_likelihood = np.log(alpha + mass) - np.log(alpha * n_features + total)
    n = len(vectors)
    log_prior = np.log(np.asarray(counts, dtype=np.float64) / n)
    return NaiveBayesModel(log_prior=log_prior, log_likelihood=log_likelihood, alpha=alpha)


def nb_log_scores(vector: SparseVector, model: NaiveBayesModel) -> np.ndarray:
    scores = model.log_prior.copy()
    for i, v in zip(vector.indices, vector.values):
        scores += v * model.log_likelihood[:, i]
    return scores


def predict_nb(vector: SparseVector, model: NaiveBayesModel) -> tuple[Label, np.ndarray]:
    scores = nb_log_scores(vector, model)
    return CLASS_ORDER[int(np.argmax(scores))], scores


# ----------------------------------------------------------------------------
# logistic regression (full-batch gradient descent)
# ----------------------------------------------------------------------------

@dataclass
class LogisticRegressionModel:
    weights: np.ndarray
    bias: float
    l2_lambda: float
    loss_history: list[float] = field(default_factory=list, repr=False)

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]


def lr_loss_grad(
    X: sp.csr_matrix,
    y_signed: np.ndarray,
    weights: np.ndarray,
    bias: float,
    l2_lambda: float,
) -> tuple[float, np.ndarray, float]:
    """Objective and gradient of the regularized logistic loss.

    J = (1/N) sum log(1 + exp(-y (Xw + b))) + (lambda/2) ||w||^2 with
    y in {-1, +1}; the bias is unregularized.
    """
    n = X.shape[0]
    z = X @ weights + bias
    margins = y_signed * z
    loss = float(np.logaddexp(0.0, -margins).mean() + 0.5 * l2_lambda * weights @ weights)
    # d/dz log(1+exp(-m)) = -y * sigmoid(-m)
    coef = -y_signed * _sigmoid(-margins) / n
    grad_w = np.asarray(X.T @ coef) + l2_lambda * weights
    grad_b = float(coef.sum())
    return loss, grad_w, grad_b


def _sigmoid(z: np.ndarray | float):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def train_lr(
    vectors: list[SparseVector],
    labels01: list[int],
    l2_lambda: float = 1e-3,
    lr: float = 0.1,
    epochs: int = 500,
    n_features: int | None = None,
    grad_tol: float = 1e-6,
) -> LogisticRegressionModel:
    """Full-batch gradient descent from zero weights.

    Runs exactly `epochs` iterations or stops early once the gradient's
    infinity norm falls below grad_tol. The step size is capped at 1/lambda,
    which keeps descent monotone for arbitrarily strong regularization
    (grid searches deliberately probe degenerate lambdas).
    """
    if lr <= 0:
        raise TrainingError(f"learning rate must be positive, got {lr}")
    if l2_lambda < 0:
        raise TrainingError(f"l2_lambda must be non-negative, got {l2_lambda}")
    if l2_lambda > 0:
        lr = min(lr, 1.0 / l2_lambda)
    if n_features is None:
        n_features = max((max(v.indices) + 1 for v in vectors if v.indices), default=1)
    X = _to_csr(vectors, n_features)
    y_signed = np.asarray([1.0 if y == 1 else -1.0 for y in labels01])
    weights = np.zeros(n_features, dtype=np.float64)
    bias = 0.0
    history = []
    for it in range(epochs):
        loss, grad_w, grad_b = lr_loss_grad(X, y_signed, weights, bias, l2_lambda)
        if not math.isfinite(loss):
            raise TrainingError(f"non-finite loss at iteration {it}")
        history.append(loss)
        if max(np.abs(grad_w).max(initial=0.0), abs(grad_b)) < grad_tol:
            break
        weights -= lr * grad_w
        bias -= lr * grad_b
    return LogisticRegressionModel(
        weights=weights, bias=bias, l2_lambda=l2_lambda, loss_history=history,
    )


def predict_lr(
    vector: SparseVector,
    model: LogisticRegressionModel,
    threshold: float = 0.5,
) -> tuple[Label, float]:
    """p = sigma(w.x + b) is the probability of the positive (Bullying) class."""
    p = float(_sigmoid(vector.dot_dense(model.weights) + model.bias))
    label = Label.BULLYING if p >= threshold else Label.NON_BULLYING
    return label, p


# ----------------------------------------------------------------------------
# linear SVM (Pegasos stochastic subgradient)
# ----------------------------------------------------------------------------

@dataclass
class LinearSvmModel:
    weights: np.ndarray
    bias: float
    reg_lambda: float

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]


def svm_objective(
    vectors: list[SparseVector],
    labels_signed: list[int],
    weights: np.ndarray,
    bias: float,
    reg_lambda: float,
) -> float:
    """(lambda/2)||w||^2 + mean hinge loss."""
    hinge = 0.0
    for vec, y in zip(vectors, labels_signed):
        hinge += max(0.0, 1.0 - y * (vec.dot_dense(weights) + bias))
    return 0.5 * reg_lambda * float(weights @ weights) + hinge / len(vectors)


def train_svm(
    vectors: list[SparseVector],
    labels_signed: list[int],
    reg_lambda: float = 1e-3,
    epochs: int = 200,
    seed: int = 42,
    n_features: int | None = None,
) -> LinearSvmModel:
    """Pegasos: step size 1/(lambda*t), example order reshuffled per epoch
    with the pinned PRNG. The bias follows the subgradient without
    regularization shrinkage.
    """
    if reg_lambda <= 0:
        raise TrainingError(f"reg_lambda must be positive, got {reg_lambda}")
    if not vectors:
        raise TrainingError("cannot train on an empty dataset")
    if n_features is None:
        n_features = max((max(v.indices) + 1 for v in vectors if v.indices), default=1)
    rng = Rng(seed)
    weights = np.zeros(n_features, dtype=np.float64)
    bias = 0.0
    t = 0
    order = list(range(len(vectors)))
    for _ in range(epochs):
        rng.shuffle(order)
        for idx in order:
            t += 1
            eta = 1.0 / (reg_lambda * t)
            vec = vectors[idx]
            y = labels_signed[idx]
            margin = y * (vec.dot_dense(weights) + bias)
            weights *= 1.0 - eta * reg_lambda
            if margin < 1.0:
                for i, v in zip(vec.indices, vec.values):
                    weights[i] += eta * y * v
                bias += eta * y
    return LinearSvmModel(weights=weights, bias=bias, reg_lambda=reg_lambda)


def predict_svm(vector: SparseVector, model: LinearSvmModel) -> tuple[Label, float]:
    """sign(w.x + b); a score of exactly 0 goes to the positive class."""
    score = float(vector.dot_dense(model.weights) + model.bias)
    label = Label.BULLYING if score >= 0.0 else Label.NON_BULLYING
    return label, score


# ----------------------------------------------------------------------------
# grid search
# ----------------------------------------------------------------------------

KNOWN_FAMILIES = ("nb", "lr", "svm", "majority")


@dataclass
class GridSearchResult:
    best_params: dict
    best_score: float
    per_candidate: list[tuple[dict, list[float]]]


def train_family(
    family: str,
    vectors: list[SparseVector],
    labels: list[Label],
    params: dict,
    n_features: int,
    seed: int = 42,
):
    """Dispatch to the family trainer with Label lists as the common input."""
    if family == "nb":
        return train_nb(vectors, labels, alpha=params.get("alpha", 1.0), n_features=n_features)
    if family == "lr":
        y01 = [1 if lab is Label.BULLYING else 0 for lab in labels]
        return train_lr(
            vectors, y01,
            l2_lambda=params.get("l2_lambda", 1e-3),
            lr=params.get("lr", 0.1),
            epochs=params.get("epochs", 500),
            n_features=n_features,
        )
    if family == "svm":
        ysign = [1 if lab is Label.BULLYING else -1 for lab in labels]
        return train_svm(
            vectors, ysign,
            reg_lambda=params.get("reg_lambda", 1e-3),
            epochs=params.get("epochs", 200),
            seed=params.get("seed", seed),
            n_features=n_features,
        )
    if family == "majority":
        counts = [0, 0]
        for lab in labels:
            counts[lab.index] += 1
        return MajorityModel(label=CLASS_ORDER[int(np.argmax(counts))])
    raise TrainingError(f"unknown model family {family!r}")


@dataclass
class MajorityModel:
    """Constant-prediction baseline: training-set majority class."""
    label: Label


def predict_family(family: str, model, vector: SparseVector) -> Label:
    if family == "nb":
        return predict_nb(vector, model)[0]
    if family == "lr":
        return predict_lr(vector, model)[0]
    if family == "svm":
        return predict_svm(vector, model)[0]
    if family == "majority":
        return model.label
    raise TrainingError(f"unknown model family {family!r}")


def _objective_value(report: MetricsReport, objective: str) -> float:
    values = {
        "f1_weighted": report.weighted_f1,
        "f1_macro": report.macro_f1,
        "accuracy": report.accuracy,
    }
    try:
        return values[objective]
    except KeyError:
        raise TrainingError(f"unknown objective {objective!r}") from None


def expand_grid(param_grid: dict[str, list]) -> list[dict]:
    """Cartesian product in key order, values in listed order."""
    if not param_grid:
        raise TrainingError("parameter grid must be non-empty")
    keys = list(param_grid)
    combos = []
    for values in itertools.product(*(param_grid[k] for k in keys)):
        combos.append(dict(zip(keys, values)))
    return combos


def grid_search(
    family: str,
    param_grid: dict[str, list],
    token_lists: list[list[str]],
    labels: list[Label],
    k: int,
    seed: int,
    objective: str = "f1_weighted",
    tfidf_config: TfidfConfig | None = None,
) -> GridSearchResult:
    """Exhaustive search over the grid, scored by k-fold cross validation.

    The TF-IDF model is fitted on each fold's training documents only; the
    held-out fold is transformed with that model, never fitted on. Candidates
    are evaluated in grid order and ties keep the earliest candidate.
    """
    if family not in KNOWN_FAMILIES:
        raise TrainingError(f"unknown model family {family!r}")
    if k < 2:
        raise TrainingError(f"k must be at least 2, got {k}")
    candidates = expand_grid(param_grid)
    folds = _label_kfold(labels, k, seed)
    per_candidate: list[tuple[dict, list[float]]] = []
    for params in candidates:
        scores = []
        for train_idx, test_idx in folds:
            train_tokens = [token_lists[i] for i in train_idx]
            train_labels = [labels[i] for i in train_idx]
            tfidf = fit_tfidf(train_tokens, tfidf_config)
            Xtr = transform_all(train_tokens, tfidf)
            model = train_family(family, Xtr, train_labels, params, tfidf.n_features, seed)
            y_true = [labels[i] for i in test_idx]
            y_pred = [
                predict_family(family, model, transform(token_lists[i], tfidf))
                for i in test_idx
            ]
            scores.append(_objective_value(evaluate(y_true, y_pred), objective))
        per_candidate.append((params, scores))
    means = [sum(scores) / len(scores) for _, scores in per_candidate]
    best = int(np.argmax(means))  # argmax keeps the earliest maximum
    return GridSearchResult(
        best_params=per_candidate[best][0],
        best_score=means[best],
        per_candidate=per_candidate,
    )


def _label_kfold(labels: list[Label], k: int, seed: int) -> list[tuple[list[int], list[int]]]:
    """Stratified k-fold over label positions (corpus.kfold_split on labels)."""
    from .corpus import kfold_split, CommentRecord

    placeholders = [
        CommentRecord(index=i + 1, commenter_handle="x", text=f"t{i}",
                      label=lab, posted_date="2024-01-01", target_handle="y")
        for i, lab in enumerate(labels)
    ]
    return kfold_split(placeholders, k, seed, stratified=True)

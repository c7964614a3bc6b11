"""Cross-validation orchestration and the full benchmark.

The benchmark mirrors the study design: the three TF-IDF models are tuned by
grid search and scored with stratified k-fold cross validation on the
training portion (fold featurizers fitted on fold-training documents only),
while the two neural models use the static 80/10/10 split with early stopping
on the validation part and are scored once on the test part.

Report rendering is fully deterministic for a given seed: wall-clock timing
is kept on the in-memory report but never written into the rendered tables or
the machine-readable document.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import CLASS_ORDER, CommentRecord, Label, SplitSpec, kfold_split, stratified_split
from .features import TfidfConfig, fit_tfidf, transform, transform_all
from .linear_models import (
    GridSearchResult,
    TrainingError,
    grid_search,
    predict_family,
    train_family,
)
from .metrics import MetricsReport, evaluate
from .neural import (
    TrainConfig,
    TrainTrace,
    build_neural_vocab,
    encode_batch,
    predict_batch,
    train,
)
from .preprocess import (
    NormalizationLexicon,
    PipelineConfig,
    StemmerRules,
    preprocess_corpus,
)

ML_FAMILIES = ("nb", "lr", "svm")
ML_ROW_NAMES = {"nb": "Naive Bayes", "lr": "Logistic Regression", "svm": "SVM"}
DL_ROW_NAMES = {False: "BiLSTM", True: "BiLSTM+Attention"}

DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "nb": {"alpha": [0.1, 0.5, 1.0, 2.0]},
    "lr": {"l2_lambda": [1e-4, 1e-3, 1e-2]},
    "svm": {"reg_lambda": [1e-4, 1e-3, 1e-2]},
}

AGGREGATE_METRICS = (
    "accuracy",
    "precision_weighted",
    "recall_weighted",
    "f1_weighted",
    "precision_macro",
    "recall_macro",
    "f1_macro",
)


@dataclass(frozen=True)
class ModelSpec:
    family: str
    params: dict = field(default_factory=dict)
    tfidf: TfidfConfig = field(default_factory=TfidfConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)


@dataclass
class CrossValResult:
    fold_reports: list[MetricsReport]
    mean: dict[str, float]
    std: dict[str, float]


def _report_values(report: MetricsReport) -> dict[str, float]:
    return {
        "accuracy": report.accuracy,
        "precision_weighted": report.weighted_precision,
        "recall_weighted": report.weighted_recall,
        "f1_weighted": report.weighted_f1,
        "precision_macro": report.macro_precision,
        "recall_macro": report.macro_recall,
        "f1_macro": report.macro_f1,
    }


def _aggregate(reports: list[MetricsReport]) -> tuple[dict[str, float], dict[str, float]]:
    values = [_report_values(r) for r in reports]
    mean = {k: statistics.fmean(v[k] for v in values) for k in AGGREGATE_METRICS}
    if len(values) > 1:
        std = {k: statistics.stdev(v[k] for v in values) for k in AGGREGATE_METRICS}
    else:
        std = {k: 0.0 for k in AGGREGATE_METRICS}
    return mean, std


def cross_validate(
    model_spec: ModelSpec,
    records: list[CommentRecord],
    k: int,
    seed: int,
    lexicon: NormalizationLexicon,
    rules: StemmerRules,
) -> CrossValResult:
    """Stratified k-fold CV of one classical model spec.

    Per fold: featurizer fitted on the fold-training documents only, model
    trained there, metrics computed on the held-out fold.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    token_lists = preprocess_corpus(
        [rec.text for rec in records], model_spec.pipeline, lexicon, rules,
    )
    labels = [rec.label for rec in records]
    folds = kfold_split(records, k, seed, stratified=True)
    reports = []
    for train_idx, test_idx in folds:
        train_tokens = [token_lists[i] for i in train_idx]
        train_labels = [labels[i] for i in train_idx]
        tfidf = fit_tfidf(train_tokens, model_spec.tfidf)
        vectors = transform_all(train_tokens, tfidf)
        model = train_family(
            model_spec.family, vectors, train_labels,
            model_spec.params, tfidf.n_features, seed,
        )
        y_true = [labels[i] for i in test_idx]
        y_pred = [
            predict_family(model_spec.family, model, transform(token_lists[i], tfidf))
            for i in test_idx
        ]
        reports.append(evaluate(y_true, y_pred))
    mean, std = _aggregate(reports)
    return CrossValResult(fold_reports=reports, mean=mean, std=std)


# ----------------------------------------------------------------------------
# benchmark
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class BenchmarkConfig:
    folds: int = 5
    seed: int = 42
    split: SplitSpec | None = None          # defaults to 80/10/10 at `seed`
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    tfidf: TfidfConfig = field(default_factory=TfidfConfig)
    grids: dict[str, dict[str, list]] = field(default_factory=lambda: DEFAULT_GRIDS)
    objective: str = "f1_weighted"
    neural: TrainConfig | None = None       # defaults to TrainConfig(seed=seed)
    neural_keep_function_words: bool = False  # skip stopword/stem stages for the DL track
    neural_min_freq: int = 1
    neural_max_len_cap: int = 40

    def resolved_split(self) -> SplitSpec:
        return self.split or SplitSpec(0.8, 0.1, 0.1, seed=self.seed, stratified=True)

    def resolved_neural(self) -> TrainConfig:
        return self.neural or TrainConfig(seed=self.seed)


@dataclass
class MlBenchRow:
    name: str
    family: str
    best_params: dict
    grid: GridSearchResult
    cv: CrossValResult


@dataclass
class DlBenchRow:
    name: str
    use_attention: bool
    report: MetricsReport
    trace: TrainTrace
    n_dropped_train: int
    n_dropped_val: int
    n_empty_test: int


@dataclass
class BenchmarkReport:
    ml_rows: list[MlBenchRow]
    dl_rows: list[DlBenchRow]
    config_echo: dict
    elapsed_seconds: float  # informational only; never rendered


def run_benchmark(
    records: list[CommentRecord],
    config: BenchmarkConfig,
    lexicon: NormalizationLexicon,
    rules: StemmerRules,
) -> BenchmarkReport:
    started = time.perf_counter()
    split = config.resolved_split()
    train_recs, val_recs, test_recs = stratified_split(records, split)

    # classical track: grid search + k-fold CV on the training portion
    train_tokens = preprocess_corpus(
        [rec.text for rec in train_recs], config.pipeline, lexicon, rules,
    )
    train_labels = [rec.label for rec in train_recs]
    ml_rows = []
    for family in ML_FAMILIES:
        grid = grid_search(
            family, config.grids[family], train_tokens, train_labels,
            k=config.folds, seed=config.seed, objective=config.objective,
            tfidf_config=config.tfidf,
        )
        spec = ModelSpec(
            family=family, params=grid.best_params,
            tfidf=config.tfidf, pipeline=config.pipeline,
        )
        cv = cross_validate(spec, train_recs, config.folds, config.seed, lexicon, rules)
        ml_rows.append(MlBenchRow(
            name=ML_ROW_NAMES[family], family=family,
            best_params=grid.best_params, grid=grid, cv=cv,
        ))

    # neural track: static split, early stopping on validation, scored on test
    dl_pipeline = config.pipeline
    if config.neural_keep_function_words:
        dl_pipeline = replace(dl_pipeline, remove_stopwords=False, stem=False)
    neural_cfg = config.resolved_neural()

    def tokens_of(recs):
        return preprocess_corpus([r.text for r in recs], dl_pipeline, lexicon, rules)

    tr_tok, va_tok, te_tok = tokens_of(train_recs), tokens_of(val_recs), tokens_of(test_recs)
    tr_keep = [i for i, toks in enumerate(tr_tok) if toks]
    va_keep = [i for i, toks in enumerate(va_tok) if toks]
    if not tr_keep or not va_keep:
        raise TrainingError("neural track has no non-empty training or validation documents")
    tr_tok_kept = [tr_tok[i] for i in tr_keep]
    vocab = build_neural_vocab(tr_tok_kept, config.neural_min_freq, config.neural_max_len_cap)
    tr_ids, tr_lens = encode_batch(tr_tok_kept, vocab)
    tr_y = np.asarray([train_recs[i].label.index for i in tr_keep], dtype=np.int64)
    va_ids, va_lens = encode_batch([va_tok[i] for i in va_keep], vocab)
    va_y = np.asarray([val_recs[i].label.index for i in va_keep], dtype=np.int64)

    majority = CLASS_ORDER[int(np.argmax(np.bincount(tr_y, minlength=2)))]
    test_labels = [rec.label for rec in test_recs]
    te_nonempty = [i for i, toks in enumerate(te_tok) if toks]
    te_ids, te_lens = encode_batch([te_tok[i] for i in te_nonempty], vocab)

    dl_rows = []
    for use_attention in (False, True):
        params, trace = train(
            use_attention,
            (tr_ids, tr_lens, tr_y),
            (va_ids, va_lens, va_y),
            neural_cfg,
            vocab.size,
        )
        y_pred: list[Label] = [majority] * len(test_recs)
        if te_nonempty:
            pred_ids, _ = predict_batch(params, te_ids, te_lens, neural_cfg.batch_size)
            for pos, cls in zip(te_nonempty, pred_ids):
                y_pred[pos] = CLASS_ORDER[int(cls)]
        dl_rows.append(DlBenchRow(
            name=DL_ROW_NAMES[use_attention],
            use_attention=use_attention,
            report=evaluate(test_labels, y_pred),
            trace=trace,
            n_dropped_train=len(tr_tok) - len(tr_keep),
            n_dropped_val=len(va_tok) - len(va_keep),
            n_empty_test=len(te_tok) - len(te_nonempty),
        ))

    echo = {
        "folds": config.folds,
        "seed": config.seed,
        "split": {
            "train": split.train_fraction,
            "val": split.val_fraction,
            "test": split.test_fraction,
            "stratified": split.stratified,
        },
        "objective": config.objective,
        "grids": config.grids,
        "tfidf": {
            "sublinear_tf": config.tfidf.sublinear_tf,
            "l2_normalize": config.tfidf.l2_normalize,
            "min_df": config.tfidf.min_df,
        },
        "pipeline": {
            "case_fold": config.pipeline.case_fold,
            "clean": config.pipeline.clean,
            "normalize": config.pipeline.normalize,
            "remove_stopwords": config.pipeline.remove_stopwords,
            "stem": config.pipeline.stem,
            "tokenize": config.pipeline.tokenize,
            "elongation_min_run": config.pipeline.elongation_min_run,
        },
        "neural": {
            "batch_size": neural_cfg.batch_size,
            "embedding_dim": neural_cfg.embedding_dim,
            "hidden_dim": neural_cfg.hidden_dim,
            "attention_dim": neural_cfg.attention_dim,
            "learning_rate": neural_cfg.learning_rate,
            "max_epochs": neural_cfg.max_epochs,
            "patience": neural_cfg.patience,
            "min_improvement": neural_cfg.min_improvement,
            "seed": neural_cfg.seed,
            "keep_function_words": config.neural_keep_function_words,
            "min_freq": config.neural_min_freq,
            "max_len_cap": config.neural_max_len_cap,
            "vocab_size": vocab.size,
            "max_seq_len": vocab.max_seq_len,
        },
        "n_records": len(records),
        "n_train": len(train_recs),
        "n_val": len(val_recs),
        "n_test": len(test_recs),
    }
    return BenchmarkReport(
        ml_rows=ml_rows,
        dl_rows=dl_rows,
        config_echo=echo,
        elapsed_seconds=time.perf_counter() - started,
    )


# ----------------------------------------------------------------------------
# rendering
# ----------------------------------------------------------------------------

def _format_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def fmt(cells):
        return "  ".join(cell.ljust(w) for cell, w in zip(cells, widths)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines)


def render_benchmark_tables(report: BenchmarkReport) -> str:
    ml_rows = [
        [
            row.name,
            f"{row.cv.mean['accuracy']:.4f}",
            f"{row.cv.mean['precision_weighted']:.4f}",
            f"{row.cv.mean['recall_weighted']:.4f}",
            f"{row.cv.mean['f1_weighted']:.4f}",
        ]
        for row in report.ml_rows
    ]
    dl_rows = [
        [
            row.name,
            f"{row.report.accuracy:.4f}",
            f"{row.report.macro_f1:.4f}",
            f"{row.report.weighted_f1:.4f}",
        ]
        for row in report.dl_rows
    ]
    echo = report.config_echo
    parts = [
        "Classical model comparison "
        f"({echo['folds']}-fold cross validation on the training split, "
        "weighted averages, mean over folds)",
        _format_table(["Model", "Accuracy", "Precision", "Recall", "F1-Score"], ml_rows),
        "",
        "Neural model comparison (held-out test split)",
        _format_table(["Model", "Accuracy", "F1 Macro", "F1 Weighted"], dl_rows),
        "",
        f"seed: {echo['seed']}  folds: {echo['folds']}  "
        f"records: {echo['n_records']} "
        f"(train {echo['n_train']} / val {echo['n_val']} / test {echo['n_test']})",
    ]
    return "\n".join(parts) + "\n"


def benchmark_to_dict(report: BenchmarkReport) -> dict:
    """Machine-readable structure with full per-fold detail (timing excluded)."""
    return {
        "config": report.config_echo,
        "ml_models": [
            {
                "name": row.name,
                "family": row.family,
                "best_params": row.best_params,
                "grid": [
                    {"params": params, "fold_scores": scores}
                    for params, scores in row.grid.per_candidate
                ],
                "cv_mean": row.cv.mean,
                "cv_std": row.cv.std,
                "fold_reports": [r.to_dict() for r in row.cv.fold_reports],
            }
            for row in report.ml_rows
        ],
        "dl_models": [
            {
                "name": row.name,
                "use_attention": row.use_attention,
                "test_report": row.report.to_dict(),
                "train_losses": row.trace.train_losses,
                "val_losses": row.trace.val_losses,
                "val_accuracies": row.trace.val_accuracies,
                "stopped_epoch": row.trace.stopped_epoch,
                "best_epoch": row.trace.best_epoch,
                "dropped_empty_train": row.n_dropped_train,
                "dropped_empty_val": row.n_dropped_val,
                "empty_test_fallbacks": row.n_empty_test,
            }
            for row in report.dl_rows
        ],
    }

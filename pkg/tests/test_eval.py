import json

import pytest

from bullyguard.corpus import Label
from bullyguard.eval import (
    BenchmarkConfig,
    ModelSpec,
    benchmark_to_dict,
    cross_validate,
    render_benchmark_tables,
    run_benchmark,
)
from bullyguard.neural import TrainConfig
from conftest import balanced_records, make_record

B, N = Label.BULLYING, Label.NON_BULLYING


def separable_corpus(n_half=12):
    records = []
    for i in range(n_half):
        records.append(make_record(
            index=2 * i + 1, text=f"dasar jelek bego nomor{i % 4}", label=B))
        records.append(make_record(
            index=2 * i + 2, text=f"kamu keren bagus nomor{i % 4}", label=N))
    return records


FAST_NEURAL = TrainConfig(
    batch_size=8, embedding_dim=8, hidden_dim=4, attention_dim=4,
    learning_rate=0.05, max_epochs=3, patience=3, seed=42,
)


def test_cross_validate_dummy_base_rate(default_lexicon, default_rules):
    records = balanced_records(40)
    spec = ModelSpec(family="majority")
    result = cross_validate(spec, records, k=4, seed=42,
                            lexicon=default_lexicon, rules=default_rules)
    assert len(result.fold_reports) == 4
    assert result.mean["accuracy"] == pytest.approx(0.5, abs=0.11)


def test_cross_validate_structural_k2(default_lexicon, default_rules):
    records = separable_corpus(4)
    spec = ModelSpec(family="nb", params={"alpha": 1.0})
    result = cross_validate(spec, records, k=2, seed=1,
                            lexicon=default_lexicon, rules=default_rules)
    assert len(result.fold_reports) == 2
    for key in ("accuracy", "f1_weighted", "f1_macro"):
        assert key in result.mean and key in result.std


def test_cross_validate_lr_separable_perfect(default_lexicon, default_rules):
    records = separable_corpus(12)
    spec = ModelSpec(family="lr", params={"l2_lambda": 1e-4, "lr": 0.5, "epochs": 400})
    result = cross_validate(spec, records, k=3, seed=42,
                            lexicon=default_lexicon, rules=default_rules)
    assert result.mean["accuracy"] == pytest.approx(1.0)
    assert result.std["accuracy"] == pytest.approx(0.0, abs=1e-12)


def test_cross_validate_deterministic(default_lexicon, default_rules):
    records = separable_corpus(8)
    spec = ModelSpec(family="svm", params={"reg_lambda": 1e-3, "epochs": 30})
    r1 = cross_validate(spec, records, 2, 5, default_lexicon, default_rules)
    r2 = cross_validate(spec, records, 2, 5, default_lexicon, default_rules)
    assert r1.mean == r2.mean and r1.std == r2.std


def test_cross_validate_rejects_bad_k(default_lexicon, default_rules):
    with pytest.raises(ValueError):
        cross_validate(ModelSpec(family="nb"), separable_corpus(4), 1, 1,
                       default_lexicon, default_rules)


def fast_benchmark_config():
    return BenchmarkConfig(
        folds=2,
        seed=42,
        grids={
            "nb": {"alpha": [1.0]},
            "lr": {"l2_lambda": [1e-3]},
            "svm": {"reg_lambda": [1e-3]},
        },
        neural=FAST_NEURAL,
    )


def test_run_benchmark_structure(default_lexicon, default_rules):
    records = separable_corpus(20)
    report = run_benchmark(records, fast_benchmark_config(),
                           default_lexicon, default_rules)
    assert [row.name for row in report.ml_rows] == \
        ["Naive Bayes", "Logistic Regression", "SVM"]
    assert [row.name for row in report.dl_rows] == ["BiLSTM", "BiLSTM+Attention"]
    assert len(report.ml_rows) + len(report.dl_rows) == 5
    for row in report.ml_rows:
        assert len(row.cv.fold_reports) == 2
    assert report.elapsed_seconds > 0

    tables = render_benchmark_tables(report)
    assert "Naive Bayes" in tables and "BiLSTM+Attention" in tables
    assert "F1 Macro" in tables and "F1-Score" in tables
    # wall-clock timing never appears in rendered output
    assert "elapsed" not in tables and "seconds" not in tables

    payload = benchmark_to_dict(report)
    assert json.dumps(payload)  # JSON-serializable
    assert len(payload["ml_models"]) == 3 and len(payload["dl_models"]) == 2
    assert "elapsed" not in json.dumps(payload)


def test_run_benchmark_deterministic_rendering(default_lexicon, default_rules):
    records = separable_corpus(20)
    config = fast_benchmark_config()
    r1 = run_benchmark(records, config, default_lexicon, default_rules)
    r2 = run_benchmark(records, config, default_lexicon, default_rules)
    assert render_benchmark_tables(r1) == render_benchmark_tables(r2)
    assert json.dumps(benchmark_to_dict(r1), sort_keys=True) == \
        json.dumps(benchmark_to_dict(r2), sort_keys=True)


def test_run_benchmark_counts_empty_documents(default_lexicon, default_rules):
    records = separable_corpus(20)
    # texts that clean away entirely are dropped from neural training
    records[4] = make_record(index=995, text="!!! 123", label=B)
    records[7] = make_record(index=996, text="@seseorang 456", label=N)
    report = run_benchmark(records, fast_benchmark_config(),
                           default_lexicon, default_rules)
    dropped = sum(
        row.n_dropped_train + row.n_dropped_val + row.n_empty_test
        for row in report.dl_rows[:1]
    )
    assert dropped == 2

import json

import pytest

from bullyguard.cli import main
from bullyguard.corpus import Label, write_corpus
from conftest import make_record

B, N = Label.BULLYING, Label.NON_BULLYING


def write_fixture_corpus(tmp_path, n_half=10, name="corpus.csv"):
    records = []
    for i in range(n_half):
        records.append(make_record(
            index=2 * i + 1, text=f"dasar jelek bego nomor{i % 3}", label=B))
        records.append(make_record(
            index=2 * i + 2, text=f"kamu keren bagus nomor{i % 3}", label=N))
    path = tmp_path / name
    write_corpus(records, path)
    return path


FAST_MODEL_INI = """\
[model]
batch_size = 8
embedding_dim = 8
hidden_dim = 4
attention_dim = 4
learning_rate = 0.05
max_epochs = 2
patience = 2
epochs = 120

[split]
train_fraction = 0.7
val_fraction = 0.2
test_fraction = 0.1
"""


def write_config(tmp_path, content=FAST_MODEL_INI, name="run.ini"):
    path = tmp_path / name
    path.write_text(content, encoding="utf-8")
    return path


# ----------------------------------------------------------------------------
# stats
# ----------------------------------------------------------------------------

def test_stats_balanced(tmp_path, capsys):
    corpus = write_fixture_corpus(tmp_path)
    assert main(["stats", "--corpus", str(corpus)]) == 0
    out = capsys.readouterr().out
    assert "balanced: yes" in out
    assert "comments: 20" in out


def test_stats_json(tmp_path, capsys):
    corpus = write_fixture_corpus(tmp_path)
    assert main(["stats", "--corpus", str(corpus), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["validation"]["balanced"] is True
    assert payload["stats"]["n_total"] == 20


def test_stats_strict_duplicates_exit_2(tmp_path):
    records = [
        make_record(index=1, text="sama"),
        make_record(index=2, text="sama", label=N),
    ]
    path = tmp_path / "dup.csv"
    write_corpus(records, path)
    assert main(["stats", "--corpus", str(path)]) == 0
    assert main(["stats", "--corpus", str(path), "--strict"]) == 2


def test_stats_missing_corpus_exit_1(tmp_path):
    assert main(["stats", "--corpus", str(tmp_path / "none.csv")]) == 1


def test_malformed_corpus_exit_2(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("no;username;komentar;label;tanggal;akun_target\n1;u;x;Bullying\n",
                    encoding="utf-8")
    assert main(["stats", "--corpus", str(path)]) == 2


# ----------------------------------------------------------------------------
# preprocess
# ----------------------------------------------------------------------------

def test_preprocess_shows_slang_expansion(tmp_path, capsys):
    records = [make_record(index=1, text="Jelekkk bgt sih kamu")]
    path = tmp_path / "one.csv"
    write_corpus(records, path)
    assert main(["preprocess", "--corpus", str(path)]) == 0
    out = capsys.readouterr().out
    assert "banget" in out
    assert out.splitlines()[0] == "raw\tprocessed"


def test_preprocess_trace_six_columns(tmp_path, capsys):
    records = [make_record(index=1, text="Jelekkk bgt!!")]
    path = tmp_path / "one.csv"
    write_corpus(records, path)
    assert main(["preprocess", "--corpus", str(path), "--trace"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split("\t") == [
        "raw", "case_fold", "clean", "normalize", "stopwords", "stem", "tokenize",
    ]
    assert len(lines[1].split("\t")) == 7


def test_preprocess_clean_text_unchanged(tmp_path, capsys):
    records = [make_record(index=1, text="jelek")]
    path = tmp_path / "one.csv"
    write_corpus(records, path)
    main(["preprocess", "--corpus", str(path)])
    assert "jelek\tjelek" in capsys.readouterr().out


# ----------------------------------------------------------------------------
# train / tune / predict
# ----------------------------------------------------------------------------

@pytest.mark.parametrize("family", ["nb", "lr", "svm", "bilstm", "bilstm_attention"])
def test_train_and_predict_flow(tmp_path, capsys, family):
    corpus = write_fixture_corpus(tmp_path)
    config = write_config(tmp_path)
    model_path = tmp_path / "model.txt"
    assert main([
        "train", "--corpus", str(corpus), "--family", family,
        "--out", str(model_path), "--config", str(config), "--quiet",
    ]) == 0
    assert model_path.exists()

    lines = tmp_path / "input.txt"
    lines.write_text("dasar jelek banget\nkamu keren bagus\ndasar jelek banget\n",
                     encoding="utf-8")
    assert main([
        "predict", "--model", str(model_path), "--input", str(lines),
        "--config", str(config),
    ]) == 0
    out_lines = capsys.readouterr().out.strip().splitlines()
    assert len(out_lines) == 3
    assert out_lines[0] == out_lines[2]  # same input line, identical output
    for line in out_lines:
        label, score = line.split("\t")
        assert label in ("Bullying", "Non-bullying")
        float(score)


def test_train_deterministic_artifact_bytes(tmp_path):
    corpus = write_fixture_corpus(tmp_path)
    p1, p2 = tmp_path / "m1.txt", tmp_path / "m2.txt"
    for path in (p1, p2):
        assert main(["train", "--corpus", str(corpus), "--family", "lr",
                     "--out", str(path), "--seed", "42", "--quiet"]) == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_tune_single_candidate_matches_train(tmp_path, capsys):
    corpus = write_fixture_corpus(tmp_path)
    config = write_config(
        tmp_path,
        FAST_MODEL_INI + "\n[tune]\ngrid_l2_lambda = 0.001\n",
    )
    trained, tuned = tmp_path / "train.txt", tmp_path / "tune.txt"
    assert main(["train", "--corpus", str(corpus), "--family", "lr",
                 "--out", str(trained), "--config", str(config), "--quiet"]) == 0
    assert main(["tune", "--corpus", str(corpus), "--family", "lr",
                 "--out", str(tuned), "--config", str(config), "--folds", "2",
                 "--quiet"]) == 0
    assert trained.read_bytes() == tuned.read_bytes()


def test_tune_lists_all_candidates(tmp_path, capsys):
    corpus = write_fixture_corpus(tmp_path)
    config = write_config(
        tmp_path, FAST_MODEL_INI + "\n[tune]\ngrid_alpha = 0.5,1.0,2.0\n",
    )
    assert main(["tune", "--corpus", str(corpus), "--family", "nb",
                 "--out", str(tmp_path / "nb.txt"), "--config", str(config),
                 "--folds", "2"]) == 0
    out = capsys.readouterr().out
    assert out.count("folds") >= 3
    assert "best:" in out


def test_predict_empty_line_majority_warning(tmp_path, capsys):
    corpus = write_fixture_corpus(tmp_path)
    model_path = tmp_path / "model.txt"
    main(["train", "--corpus", str(corpus), "--family", "nb",
          "--out", str(model_path), "--quiet"])
    lines = tmp_path / "input.txt"
    lines.write_text("!!! 123\n", encoding="utf-8")
    assert main(["predict", "--model", str(model_path), "--input", str(lines)]) == 0
    captured = capsys.readouterr()
    assert "majority" in captured.err
    assert captured.out.startswith(("Bullying", "Non-bullying"))


def test_predict_fingerprint_mismatch(tmp_path, capsys):
    corpus = write_fixture_corpus(tmp_path)
    model_path = tmp_path / "model.txt"
    main(["train", "--corpus", str(corpus), "--family", "nb",
          "--out", str(model_path), "--quiet"])
    # retrain-time lexicon differs from predict-time lexicon
    slang = tmp_path / "slang.tsv"
    slang.write_text("zzz\tbanget\n", encoding="utf-8")
    config = write_config(
        tmp_path, f"[lexicons]\nslang = {slang}\n", name="altered.ini",
    )
    lines = tmp_path / "input.txt"
    lines.write_text("dasar jelek\n", encoding="utf-8")
    assert main(["predict", "--model", str(model_path), "--input", str(lines),
                 "--config", str(config)]) == 2
    assert main(["predict", "--model", str(model_path), "--input", str(lines),
                 "--config", str(config), "--force"]) == 0
    assert "mismatch" in capsys.readouterr().err


def test_missing_lexicon_path_exit_1(tmp_path):
    config = write_config(
        tmp_path, "[lexicons]\nslang = /nonexistent/slang.tsv\n", name="bad.ini",
    )
    corpus = write_fixture_corpus(tmp_path)
    assert main(["stats", "--corpus", str(corpus), "--config", str(config)]) == 1


def test_unknown_config_key_exit_1(tmp_path):
    config = write_config(tmp_path, "[model]\nbananas = 3\n", name="bad.ini")
    corpus = write_fixture_corpus(tmp_path)
    assert main(["stats", "--corpus", str(corpus), "--config", str(config)]) == 1


def test_usage_error_exit_1():
    with pytest.raises(SystemExit) as exc:
        main(["train", "--corpus", "x.csv"])  # --out missing
    assert exc.value.code == 1


def test_cli_flag_overrides_config_seed(tmp_path):
    corpus = write_fixture_corpus(tmp_path)
    config = write_config(tmp_path, "[split]\nseed = 7\n", name="seeded.ini")
    base, flagged, config_only = (tmp_path / n for n in ("a.txt", "b.txt", "c.txt"))
    main(["train", "--corpus", str(corpus), "--family", "svm",
          "--out", str(base), "--seed", "42", "--quiet"])
    main(["train", "--corpus", str(corpus), "--family", "svm",
          "--out", str(flagged), "--config", str(config), "--seed", "42", "--quiet"])
    main(["train", "--corpus", str(corpus), "--family", "svm",
          "--out", str(config_only), "--config", str(config), "--quiet"])
    assert base.read_bytes() == flagged.read_bytes()  # flag wins over config
    assert base.read_bytes() != config_only.read_bytes()  # config wins over default


def test_commands_never_mutate_inputs(tmp_path):
    corpus = write_fixture_corpus(tmp_path)
    before = corpus.read_bytes()
    main(["stats", "--corpus", str(corpus), "--quiet"])
    main(["preprocess", "--corpus", str(corpus), "--limit", "2"])
    main(["train", "--corpus", str(corpus), "--family", "nb",
          "--out", str(tmp_path / "m.txt"), "--quiet"])
    assert corpus.read_bytes() == before


# ----------------------------------------------------------------------------
# benchmark
# ----------------------------------------------------------------------------

def test_benchmark_writes_reports(tmp_path, capsys):
    corpus = write_fixture_corpus(tmp_path, n_half=20)
    config = write_config(
        tmp_path,
        FAST_MODEL_INI + "\n[tune]\ngrid_alpha = 1.0\n"
        "grid_l2_lambda = 0.001\ngrid_reg_lambda = 0.001\n",
    )
    out_dir = tmp_path / "reports"
    assert main([
        "benchmark", "--corpus", str(corpus), "--config", str(config),
        "--out-dir", str(out_dir), "--folds", "2", "--quiet",
    ]) == 0
    tables = (out_dir / "benchmark_tables.txt").read_text(encoding="utf-8")
    assert "Logistic Regression" in tables and "BiLSTM+Attention" in tables
    payload = json.loads((out_dir / "benchmark_report.json").read_text(encoding="utf-8"))
    assert len(payload["ml_models"]) == 3
    assert len(payload["dl_models"]) == 2
    assert payload["config"]["folds"] == 2

"""Portable text-based model persistence for all five model families.

A model artifact is a single self-describing UTF-8 text file with sectioned
blocks and decimal weights at 12 significant digits, so artifacts diff
cleanly, survive version control, and can be re-read by implementations in
other languages. Saving is deterministic: identical training inputs and seed
produce byte-identical files.

The artifact embeds two fingerprints: one over the preprocessing setup
(pipeline flags + lexicons + stemmer rules) and one over the training data.
Prediction refuses a model whose preprocessing fingerprint does not match the
live lexicons unless explicitly forced, because tokens would no longer mean
the same thing.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import CLASS_ORDER, CommentRecord, Label
from .features import TfidfConfig, TfidfModel, Vocabulary, transform
from .linear_models import (
    LinearSvmModel,
    LogisticRegressionModel,
    NaiveBayesModel,
    predict_lr,
    predict_nb,
    predict_svm,
)
from .neural import (
    LstmBlock,
    NeuralNetParams,
    NeuralVocab,
    encode_pad,
    forward_classify,
)
from .preprocess import (
    NormalizationLexicon,
    PipelineConfig,
    StemmerRules,
    run_pipeline,
)

FORMAT_VERSION = 1
MAGIC = "bullyguard-model"
FAMILIES = ("nb", "lr", "svm", "bilstm", "bilstm_attention")


class ArtifactError(Exception):
    """Unreadable, malformed, or incompatible model artifact."""


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _fmt_row(values) -> str:
    return " ".join(_fmt(v) for v in values)


def preprocessing_fingerprint(
    pipeline: PipelineConfig,
    lexicon: NormalizationLexicon,
    rules: StemmerRules,
) -> str:
    """SHA-256 over a canonical rendering of the preprocessing setup."""
    parts = [
        "pipeline:" + ",".join(
            f"{name}={int(flag)}" for name, flag in zip(
                ("case_fold", "clean", "normalize", "remove_stopwords", "stem", "tokenize"),
                pipeline.flags(),
            )
        ) + f",elongation_min_run={pipeline.elongation_min_run}",
        "slang:" + ";".join(f"{k}={v}" for k, v in sorted(lexicon.slang_map.items())),
        "stopwords:" + ";".join(sorted(lexicon.stopwords)),
        "roots:" + ";".join(sorted(lexicon.root_words)),
        "rules:inflectional=" + ",".join(rules.inflectional_suffixes)
        + "|derivational=" + ",".join(rules.derivational_suffixes)
        + "|prefix=" + ";".join(
            f"{r.cls}:{r.pattern}:{','.join(rec or '-' for rec in r.recodings)}"
            for r in rules.prefix_rules
        )
        + "|forbid=" + ";".join(f"{c}:{s}" for c, s in sorted(rules.forbidden_pairs))
        + f"|min_stem_length={rules.min_stem_length}",
    ]
    return hashlib.sha256("\n".join(parts).encode("utf-8")).hexdigest()


def data_fingerprint(records: list[CommentRecord]) -> str:
    h = hashlib.sha256()
    for rec in records:
        row = "\x1f".join([
            str(rec.index), rec.commenter_handle, rec.text,
            rec.label.value, rec.posted_date, rec.target_handle,
        ])
        h.update(row.encode("utf-8"))
        h.update(b"\x1e")
    return h.hexdigest()


@dataclass
class ModelArtifact:
    family: str
    seed: int
    majority_label: Label
    preprocessing_fp: str
    data_fp: str
    pipeline: PipelineConfig
    format_version: int = FORMAT_VERSION
    # classical payload
    tfidf: TfidfModel | None = None
    nb: NaiveBayesModel | None = None
    lr: LogisticRegressionModel | None = None
    svm: LinearSvmModel | None = None
    threshold: float = 0.5
    # neural payload
    neural_vocab: NeuralVocab | None = None
    neural_params: NeuralNetParams | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ArtifactError(f"unknown model family {self.family!r}")


# ----------------------------------------------------------------------------
# saving
# ----------------------------------------------------------------------------

def _pipeline_lines(pipeline: PipelineConfig) -> list[str]:
    names = ("case_fold", "clean", "normalize", "remove_stopwords", "stem", "tokenize")
    lines = ["[pipeline]"]
    lines.extend(f"{n} {'true' if f else 'false'}" for n, f in zip(names, pipeline.flags()))
    lines.append(f"elongation_min_run {pipeline.elongation_min_run}")
    return lines


def _tfidf_lines(model: TfidfModel) -> list[str]:
    lines = [
        "[tfidf]",
        f"sublinear_tf {'true' if model.config.sublinear_tf else 'false'}",
        f"l2_normalize {'true' if model.config.l2_normalize else 'false'}",
        f"min_df {model.config.min_df}",
        f"n_documents {model.vocabulary.n_documents}",
        f"vocab {len(model.vocabulary)}",
    ]
    by_id = sorted(model.vocabulary.token_to_id.items(), key=lambda kv: kv[1])
    for token, idx in by_id:
        if not token or any(ch.isspace() for ch in token):
            raise ArtifactError(f"token not serializable: {token!r}")
        df = model.vocabulary.document_frequency[idx]
        lines.append(f"token {token} {idx} {df} {_fmt(model.idf[idx])}")
    return lines


def save_artifact(artifact: ModelArtifact, path: str | Path) -> None:
    lines = [
        f"{MAGIC} {artifact.format_version}",
        f"family {artifact.family}",
        "[meta]",
        f"seed {artifact.seed}",
        f"majority_label {artifact.majority_label.value}",
        f"preprocessing_fingerprint {artifact.preprocessing_fp}",
        f"data_fingerprint {artifact.data_fp}",
    ]
    lines.extend(_pipeline_lines(artifact.pipeline))
    if artifact.family in ("nb", "lr", "svm"):
        if artifact.tfidf is None:
            raise ArtifactError("classical artifact requires a fitted tfidf model")
        lines.extend(_tfidf_lines(artifact.tfidf))
    if artifact.family == "nb":
        model = artifact.nb
        lines.extend([
            "[nb]",
            f"alpha {_fmt(model.alpha)}",
            f"log_prior {_fmt_row(model.log_prior)}",
            f"log_likelihood 0 {_fmt_row(model.log_likelihood[0])}",
            f"log_likelihood 1 {_fmt_row(model.log_likelihood[1])}",
        ])
    elif artifact.family == "lr":
        model = artifact.lr
        lines.extend([
            "[lr]",
            f"l2_lambda {_fmt(model.l2_lambda)}",
            f"threshold {_fmt(artifact.threshold)}",
            f"bias {_fmt(model.bias)}",
            f"weights {_fmt_row(model.weights)}",
        ])
    elif artifact.family == "svm":
        model = artifact.svm
        lines.extend([
            "[svm]",
            f"reg_lambda {_fmt(model.reg_lambda)}",
            f"bias {_fmt(model.bias)}",
            f"weights {_fmt_row(model.weights)}",
        ])
    else:
        vocab, params = artifact.neural_vocab, artifact.neural_params
        if vocab is None or params is None:
            raise ArtifactError("neural artifact requires vocab and parameters")
        lines.extend([
            "[neural]",
            f"embedding_dim {params.embedding_dim}",
            f"hidden_dim {params.hidden_dim}",
            f"attention_dim {params.attention_dim}",
            f"max_seq_len {vocab.max_seq_len}",
            f"use_attention {'true' if params.use_attention else 'false'}",
            f"vocab {vocab.size}",
        ])
        for token, idx in sorted(vocab.token_to_id.items(), key=lambda kv: kv[1]):
            if not token or any(ch.isspace() for ch in token):
                raise ArtifactError(f"token not serializable: {token!r}")
            lines.append(f"token {token} {idx}")
        for name, arr in params.blocks():
            lines.append(f"[param {name}]")
            lines.append("shape " + " ".join(str(d) for d in arr.shape))
            matrix = arr.reshape(arr.shape[0], -1) if arr.ndim > 1 else arr.reshape(1, -1)
            lines.extend(_fmt_row(row) for row in matrix)
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ----------------------------------------------------------------------------
# loading
# ----------------------------------------------------------------------------

class _Cursor:
    def __init__(self, lines: list[str]):
        self.lines = lines
        self.pos = 0

    def peek(self) -> str | None:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def next(self) -> str:
        line = self.peek()
        if line is None:
            raise ArtifactError("unexpected end of artifact")
        self.pos += 1
        return line

    def expect_kv(self, key: str) -> str:
        line = self.next()
        head, _, rest = line.partition(" ")
        if head != key:
            raise ArtifactError(f"expected {key!r}, found {line!r}")
        return rest


def _parse_bool(raw: str) -> bool:
    if raw == "true":
        return True
    if raw == "false":
        return False
    raise ArtifactError(f"expected true/false, found {raw!r}")


def _parse_pipeline(cur: _Cursor) -> PipelineConfig:
    if cur.next() != "[pipeline]":
        raise ArtifactError("missing [pipeline] section")
    flags = {}
    for name in ("case_fold", "clean", "normalize", "remove_stopwords", "stem", "tokenize"):
        flags[name] = _parse_bool(cur.expect_kv(name))
    min_run = int(cur.expect_kv("elongation_min_run"))
    return PipelineConfig(**flags, elongation_min_run=min_run)


def _parse_tfidf(cur: _Cursor) -> TfidfModel:
    if cur.next() != "[tfidf]":
        raise ArtifactError("missing [tfidf] section")
    config = TfidfConfig(
        sublinear_tf=_parse_bool(cur.expect_kv("sublinear_tf")),
        l2_normalize=_parse_bool(cur.expect_kv("l2_normalize")),
        min_df=int(cur.expect_kv("min_df")),
    )
    n_documents = int(cur.expect_kv("n_documents"))
    size = int(cur.expect_kv("vocab"))
    token_to_id: dict[str, int] = {}
    document_frequency: dict[int, int] = {}
    idf = [0.0] * size
    for _ in range(size):
        parts = cur.next().split(" ")
        if len(parts) != 5 or parts[0] != "token":
            raise ArtifactError(f"bad tfidf token line: {parts!r}")
        token, idx, df, value = parts[1], int(parts[2]), int(parts[3]), float(parts[4])
        token_to_id[token] = idx
        document_frequency[idx] = df
        idf[idx] = value
    return TfidfModel(
        vocabulary=Vocabulary(token_to_id, document_frequency, n_documents),
        idf=idf,
        config=config,
    )


def _parse_floats(raw: str) -> np.ndarray:
    return np.asarray([float(x) for x in raw.split(" ") if x], dtype=np.float64)


def load_artifact(path: str | Path) -> ModelArtifact:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(f"cannot read model file {path}: {exc}") from exc
    try:
        return _parse_artifact(path, text)
    except ArtifactError:
        raise
    except (ValueError, IndexError, KeyError) as exc:
        raise ArtifactError(f"{path}: malformed model artifact: {exc}") from exc


def _parse_artifact(path: str | Path, text: str) -> ModelArtifact:
    cur = _Cursor(text.splitlines())
    head = cur.next().split(" ")
    if len(head) != 2 or head[0] != MAGIC:
        raise ArtifactError(f"{path}: not a model artifact")
    version = int(head[1])
    if version != FORMAT_VERSION:
        raise ArtifactError(
            f"unsupported format version {version} (expected {FORMAT_VERSION})"
        )
    family = cur.expect_kv("family")
    if family not in FAMILIES:
        raise ArtifactError(f"unknown model family {family!r}")
    if cur.next() != "[meta]":
        raise ArtifactError("missing [meta] section")
    seed = int(cur.expect_kv("seed"))
    majority = Label.parse(cur.expect_kv("majority_label"))
    preprocessing_fp = cur.expect_kv("preprocessing_fingerprint")
    data_fp = cur.expect_kv("data_fingerprint")
    pipeline = _parse_pipeline(cur)

    artifact = ModelArtifact(
        family=family, seed=seed, majority_label=majority,
        preprocessing_fp=preprocessing_fp, data_fp=data_fp,
        pipeline=pipeline, format_version=version,
    )
    if family in ("nb", "lr", "svm"):
        artifact.tfidf = _parse_tfidf(cur)
    if family == "nb":
        if cur.next() != "[nb]":
            raise ArtifactError("missing [nb] section")
        alpha = float(cur.expect_kv("alpha"))
        log_prior = _parse_floats(cur.expect_kv("log_prior"))
        rows = []
        for cls in range(2):
            raw = cur.expect_kv("log_likelihood")
            idx, _, values = raw.partition(" ")
            if int(idx) != cls:
                raise ArtifactError("log_likelihood rows out of order")
            rows.append(_parse_floats(values))
        artifact.nb = NaiveBayesModel(
            log_prior=log_prior, log_likelihood=np.vstack(rows), alpha=alpha,
        )
    elif family == "lr":
        if cur.next() != "[lr]":
            raise ArtifactError("missing [lr] section")
        l2 = float(cur.expect_kv("l2_lambda"))
        artifact.threshold = float(cur.expect_kv("threshold"))
        bias = float(cur.expect_kv("bias"))
        weights = _parse_floats(cur.expect_kv("weights"))
        artifact.lr = LogisticRegressionModel(weights=weights, bias=bias, l2_lambda=l2)
    elif family == "svm":
        if cur.next() != "[svm]":
            raise ArtifactError("missing [svm] section")
        reg = float(cur.expect_kv("reg_lambda"))
        bias = float(cur.expect_kv("bias"))
        weights = _parse_floats(cur.expect_kv("weights"))
        artifact.svm = LinearSvmModel(weights=weights, bias=bias, reg_lambda=reg)
    else:
        if cur.next() != "[neural]":
            raise ArtifactError("missing [neural] section")
        emb_dim = int(cur.expect_kv("embedding_dim"))
        hidden = int(cur.expect_kv("hidden_dim"))
        att_dim = int(cur.expect_kv("attention_dim"))
        max_len = int(cur.expect_kv("max_seq_len"))
        use_att = _parse_bool(cur.expect_kv("use_attention"))
        size = int(cur.expect_kv("vocab"))
        token_to_id: dict[str, int] = {}
        for _ in range(size - 2):  # PAD and UNK are implicit
            parts = cur.next().split(" ")
            if len(parts) != 3 or parts[0] != "token":
                raise ArtifactError(f"bad neural token line: {parts!r}")
            token_to_id[parts[1]] = int(parts[2])
        vocab = NeuralVocab(token_to_id=token_to_id, max_seq_len=max_len)
        arrays: dict[str, np.ndarray] = {}
        expected = _neural_block_names()
        for name in expected:
            header = cur.next()
            if header != f"[param {name}]":
                raise ArtifactError(f"expected [param {name}], found {header!r}")
            shape = tuple(int(d) for d in cur.expect_kv("shape").split(" "))
            n_rows = shape[0] if len(shape) > 1 else 1
            rows = [_parse_floats(cur.next()) for _ in range(n_rows)]
            arrays[name] = np.vstack(rows).reshape(shape)
        artifact.neural_vocab = vocab
        artifact.neural_params = _assemble_neural_params(arrays, use_att)
        if artifact.neural_params.vocab_size != size:
            raise ArtifactError("embedding rows do not match vocab size")
    if cur.next() != "end":
        raise ArtifactError("missing end marker")
    return artifact


def _neural_block_names() -> list[str]:
    names = ["embedding"]
    for direction in ("fwd", "bwd"):
        for kind in ("w", "u", "b"):
            for gate in ("i", "f", "o", "g"):
                names.append(f"{direction}.{kind}_{gate}")
    names.extend(["att.w", "att.v", "att.b", "head.w", "head.b"])
    return names


def _assemble_neural_params(arrays: dict[str, np.ndarray], use_attention: bool) -> NeuralNetParams:
    def block(direction: str) -> LstmBlock:
        return LstmBlock(**{
            f"{kind}_{gate}": arrays[f"{direction}.{kind}_{gate}"]
            for kind in ("w", "u", "b") for gate in ("i", "f", "o", "g")
        })

    return NeuralNetParams(
        embedding=arrays["embedding"],
        fwd=block("fwd"),
        bwd=block("bwd"),
        w_att=arrays["att.w"],
        b_att=arrays["att.b"],
        v_att=arrays["att.v"],
        w_head=arrays["head.w"],
        b_head=arrays["head.b"],
        use_attention=use_attention,
    )


# ----------------------------------------------------------------------------
# prediction
# ----------------------------------------------------------------------------

@dataclass
class Prediction:
    label: Label
    score: float
    empty_input: bool  # true when the text preprocessed to nothing


def check_fingerprint(
    artifact: ModelArtifact,
    lexicon: NormalizationLexicon,
    rules: StemmerRules,
    force: bool = False,
) -> bool:
    """True when the live preprocessing setup matches the artifact's.

    Raises ArtifactError on mismatch unless force is set.
    """
    live = preprocessing_fingerprint(artifact.pipeline, lexicon, rules)
    if live == artifact.preprocessing_fp:
        return True
    if force:
        return False
    raise ArtifactError(
        "preprocessing fingerprint mismatch: the live lexicons/rules differ from "
        "the ones this model was trained with (use --force to override)"
    )


def predict_text(
    artifact: ModelArtifact,
    text: str,
    lexicon: NormalizationLexicon,
    rules: StemmerRules,
) -> Prediction:
    """Classify one raw comment.

    Texts that preprocess to an empty token list fall back to the training
    majority class with the empty_input flag set. Scores are family-specific:
    NB and the neural models report the predicted class's posterior
    probability, LR the positive-class probability, SVM the signed margin.
    """
    tokens = run_pipeline(text, artifact.pipeline, lexicon, rules)
    if not tokens:
        return Prediction(label=artifact.majority_label, score=0.0, empty_input=True)
    if artifact.family in ("nb", "lr", "svm"):
        vec = transform(tokens, artifact.tfidf)
        if artifact.family == "nb":
            label, scores = predict_nb(vec, artifact.nb)
            shifted = np.exp(scores - scores.max())
            return Prediction(label, float(shifted.max() / shifted.sum()), False)
        if artifact.family == "lr":
            label, p = predict_lr(vec, artifact.lr, artifact.threshold)
            return Prediction(label, p, False)
        label, margin = predict_svm(vec, artifact.svm)
        return Prediction(label, margin, False)
    ids, length = encode_pad(tokens, artifact.neural_vocab)
    if length == 0:
        return Prediction(label=artifact.majority_label, score=0.0, empty_input=True)
    logits = forward_classify(ids, length, artifact.neural_params)
    shifted = np.exp(logits - logits.max())
    probs = shifted / shifted.sum()
    cls = int(np.argmax(probs))
    return Prediction(CLASS_ORDER[cls], float(probs[cls]), False)

"""Corpus ingestion, validation, statistics, and deterministic partitioning.

The input format is a semicolon-delimited CSV of annotated Instagram comments
with six columns (header ``no;username;komentar;label;tanggal;akun_target`` by
default, remappable via a column map). Fields containing the delimiter, a
double quote, or a newline are double-quoted with embedded quotes doubled
(RFC-4180 conventions with ';' as the delimiter).
"""

from __future__ import annotations

import csv
import statistics
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .rng import Rng


class CorpusError(Exception):
    """Malformed corpus file or invalid partitioning request."""


class Label(Enum):
    BULLYING = "Bullying"
    NON_BULLYING = "Non-bullying"

    @property
    def index(self) -> int:
        return CLASS_ORDER.index(self)

    @classmethod
    def parse(cls, raw: str) -> "Label":
        key = raw.strip().lower().replace("-", "").replace("_", "").replace(" ", "")
        if key == "bullying":
            return cls.BULLYING
        if key == "nonbullying":
            return cls.NON_BULLYING
        raise ValueError(f"unknown label {raw.strip()!r}")


# Fixed class order used for class ids, tie-breaking, and report rows.
CLASS_ORDER: tuple[Label, Label] = (Label.BULLYING, Label.NON_BULLYING)

# Canonical field -> default CSV column name.
DEFAULT_COLUMNS: dict[str, str] = {
    "index": "no",
    "commenter_handle": "username",
    "text": "komentar",
    "label": "label",
    "posted_date": "tanggal",
    "target_handle": "akun_target",
}

FIELD_NAMES = tuple(DEFAULT_COLUMNS)


@dataclass(frozen=True)
class CommentRecord:
    index: int
    commenter_handle: str
    text: str
    label: Label
    posted_date: str
    target_handle: str


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    val_fraction: float
    test_fraction: float
    seed: int
    stratified: bool = True

    def __post_init__(self):
        fractions = (self.train_fraction, self.val_fraction, self.test_fraction)
        if any(not 0.0 < f < 1.0 for f in fractions):
            raise ValueError(f"split fractions must lie in (0, 1), got {fractions}")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {sum(fractions)!r}")

    @property
    def fractions(self) -> tuple[float, float, float]:
        return (self.train_fraction, self.val_fraction, self.test_fraction)


@dataclass
class ValidationReport:
    n_records: int
    duplicates: list[tuple[int, int]]  # (first position, later position), 0-based
    missing_fields: list[tuple[int, str]]  # (position, field name)
    class_counts: dict[Label, int]

    @property
    def balanced(self) -> bool:
        counts = [self.class_counts.get(label, 0) for label in CLASS_ORDER]
        return all(c > 0 for c in counts) and max(counts) == min(counts)

    @property
    def clean(self) -> bool:
        return not self.duplicates and not self.missing_fields

    def render_text(self) -> str:
        lines = [f"records: {self.n_records}"]
        for label in CLASS_ORDER:
            lines.append(f"class {label.value}: {self.class_counts.get(label, 0)}")
        lines.append(f"balanced: {'yes' if self.balanced else 'no'}")
        lines.append(f"duplicate texts: {len(self.duplicates)}")
        for i, j in self.duplicates:
            lines.append(f"  duplicate: rows {i} and {j}")
        lines.append(f"missing fields: {len(self.missing_fields)}")
        for pos, name in self.missing_fields:
            lines.append(f"  missing: row {pos} field {name}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "n_records": self.n_records,
            "duplicates": [list(pair) for pair in self.duplicates],
            "missing_fields": [list(item) for item in self.missing_fields],
            "class_counts": {label.value: self.class_counts.get(label, 0) for label in CLASS_ORDER},
            "balanced": self.balanced,
        }


@dataclass
class CorpusStats:
    n_total: int
    n_per_class: dict[Label, int]
    char_len_min: float
    char_len_max: float
    char_len_median: float
    char_len_mean: float
    char_len_stddev: float
    avg_words_per_class: dict[Label, float]

    def render_text(self) -> str:
        lines = [
            f"comments: {self.n_total}",
            f"char length min/max: {self.char_len_min:.0f}/{self.char_len_max:.0f}",
            f"char length median: {self.char_len_median:.2f}",
            f"char length mean: {self.char_len_mean:.2f}",
            f"char length stddev: {self.char_len_stddev:.2f}",
        ]
        for label in CLASS_ORDER:
            if label in self.n_per_class:
                lines.append(
                    f"class {label.value}: {self.n_per_class[label]} comments, "
                    f"avg words {self.avg_words_per_class[label]:.2f}"
                )
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "n_per_class": {label.value: n for label, n in self.n_per_class.items()},
            "char_len": {
                "min": self.char_len_min,
                "max": self.char_len_max,
                "median": self.char_len_median,
                "mean": self.char_len_mean,
                "stddev": self.char_len_stddev,
            },
            "avg_words_per_class": {label.value: v for label, v in self.avg_words_per_class.items()},
        }


def _resolve_columns(header: list[str], column_map: dict[str, str] | None) -> dict[str, int]:
    """Map canonical field names to positions in the header row."""
    names = dict(DEFAULT_COLUMNS)
    if column_map:
        unknown = set(column_map) - set(FIELD_NAMES)
        if unknown:
            raise CorpusError(f"unknown column-map keys: {sorted(unknown)}")
        names.update(column_map)
    stripped = [h.strip() for h in header]
    positions = {}
    for field_name, column in names.items():
        try:
            positions[field_name] = stripped.index(column)
        except ValueError:
            raise CorpusError(
                f"missing column {column!r} in header {stripped!r}"
            ) from None
    return positions


def load_corpus(
    path: str | Path,
    delimiter: str = ";",
    column_map: dict[str, str] | None = None,
) -> list[CommentRecord]:
    """Parse the comment CSV into records, in file order.

    Structural problems (wrong field count, unparseable index, unknown or
    missing label) raise CorpusError naming the 1-based line. Empty string
    fields are tolerated here and surfaced by validate_corpus.
    """
    path = Path(path)
    try:
        handle = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus file {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle, delimiter=delimiter, quotechar='"', doublequote=True)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusError(f"{path}: empty file, expected a header row") from None
        positions = _resolve_columns(header, column_map)
        expected = len(header)
        records = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue  # skip blank lines
            if len(row) != expected:
                raise CorpusError(f"line {line}: expected {expected} fields, found {len(row)}")
            raw = {name: row[pos] for name, pos in positions.items()}
            try:
                index = int(raw["index"].strip())
            except ValueError:
                raise CorpusError(f"line {line}: invalid index {raw['index']!r}") from None
            if index <= 0:
                raise CorpusError(f"line {line}: index must be positive, got {index}")
            if not raw["label"].strip():
                raise CorpusError(f"line {line}: missing value for field 'label'")
            try:
                label = Label.parse(raw["label"])
            except ValueError as exc:
                raise CorpusError(f"line {line}: {exc}") from None
            records.append(
                CommentRecord(
                    index=index,
                    commenter_handle=raw["commenter_handle"].strip(),
                    text=raw["text"],
                    label=label,
                    posted_date=raw["posted_date"].strip(),
                    target_handle=raw["target_handle"].strip(),
                )
            )
    return records


def write_corpus(
    records: list[CommentRecord],
    path: str | Path,
    delimiter: str = ";",
    column_map: dict[str, str] | None = None,
) -> None:
    """Write records back to CSV; inverse of load_corpus."""
    names = dict(DEFAULT_COLUMNS)
    if column_map:
        names.update(column_map)
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(
            handle, delimiter=delimiter, quotechar='"', doublequote=True,
            quoting=csv.QUOTE_MINIMAL, lineterminator="\n",
        )
        writer.writerow([names[f] for f in FIELD_NAMES])
        for rec in records:
            writer.writerow([
                str(rec.index),
                rec.commenter_handle,
                rec.text,
                rec.label.value,
                rec.posted_date,
                rec.target_handle,
            ])


def validate_corpus(records: list[CommentRecord]) -> ValidationReport:
    """Data-quality report: exact duplicate texts, empty fields, class counts."""
    if not records:
        raise ValueError("validate_corpus requires a non-empty record list")
    seen: dict[str, int] = {}
    duplicates = []
    missing = []
    counts: Counter = Counter()
    for pos, rec in enumerate(records):
        if rec.text in seen:
            duplicates.append((seen[rec.text], pos))
        else:
            seen[rec.text] = pos
        for name in ("text", "commenter_handle", "posted_date", "target_handle"):
            if not getattr(rec, name).strip():
                missing.append((pos, name))
        counts[rec.label] += 1
    return ValidationReport(
        n_records=len(records),
        duplicates=duplicates,
        missing_fields=missing,
        class_counts=dict(counts),
    )


def compute_stats(records: list[CommentRecord], population_stddev: bool = True) -> CorpusStats:
    """Descriptive statistics over raw text: character lengths and word counts.

    Word counts split on whitespace runs. The standard deviation is the
    population form by default (divide by N); pass population_stddev=False
    for the sample form.
    """
    if not records:
        raise ValueError("compute_stats requires a non-empty record list")
    lengths = [len(rec.text) for rec in records]
    per_class_words: dict[Label, list[int]] = {}
    per_class_counts: Counter = Counter()
    for rec in records:
        per_class_counts[rec.label] += 1
        per_class_words.setdefault(rec.label, []).append(len(rec.text.split()))
    if len(lengths) == 1:
        stddev = 0.0
    elif population_stddev:
        stddev = statistics.pstdev(lengths)
    else:
        stddev = statistics.stdev(lengths)
    return CorpusStats(
        n_total=len(records),
        n_per_class=dict(per_class_counts),
        char_len_min=float(min(lengths)),
        char_len_max=float(max(lengths)),
        char_len_median=float(statistics.median(lengths)),
        char_len_mean=float(statistics.fmean(lengths)),
        char_len_stddev=float(stddev),
        avg_words_per_class={
            label: statistics.fmean(words) for label, words in per_class_words.items()
        },
    )


def _apportion(n: int, fractions: tuple[float, ...]) -> list[int]:
    """Largest-remainder apportionment of n items; ties go to earlier slots."""
    exact = [n * f for f in fractions]
    sizes = [int(e) for e in exact]
    remainders = [e - s for e, s in zip(exact, sizes)]
    leftover = n - sum(sizes)
    order = sorted(range(len(fractions)), key=lambda i: (-remainders[i], i))
    for i in range(leftover):
        sizes[order[i]] += 1
    return sizes


def stratified_split(
    records: list[CommentRecord], spec: SplitSpec
) -> tuple[list[CommentRecord], list[CommentRecord], list[CommentRecord]]:
    """Deterministic seeded train/val/test partition.

    Per-class positions are shuffled with the pinned PRNG (classes processed
    in CLASS_ORDER with a single generator stream), then sliced so that both
    the global partition sizes and every per-class allocation follow
    largest-remainder apportionment. Per-class counts in each partition
    deviate from exact proportionality by at most one record.
    """
    if not records:
        raise ValueError("cannot split an empty record list")
    fractions = spec.fractions
    global_sizes = _apportion(len(records), fractions)

    if not spec.stratified:
        order = list(range(len(records)))
        Rng(spec.seed).shuffle(order)
        parts: list[list[CommentRecord]] = []
        start = 0
        for size in global_sizes:
            parts.append([records[i] for i in order[start:start + size]])
            start += size
        return parts[0], parts[1], parts[2]

    rng = Rng(spec.seed)
    capacity = list(global_sizes)
    partitions: list[list[CommentRecord]] = [[], [], []]
    for label in CLASS_ORDER:
        positions = [i for i, rec in enumerate(records) if rec.label is label]
        if not positions:
            continue
        rng.shuffle(positions)
        exact = [len(positions) * f for f in fractions]
        alloc = [int(e) for e in exact]
        remainders = [e - a for e, a in zip(exact, alloc)]
        for _ in range(len(positions) - sum(alloc)):
            candidates = [p for p in range(3) if capacity[p] - alloc[p] > 0]
            p = min(candidates, key=lambda q: (-remainders[q], q))
            alloc[p] += 1
        start = 0
        for p, size in enumerate(alloc):
            partitions[p].extend(records[i] for i in positions[start:start + size])
            capacity[p] -= size
            start += size
    return partitions[0], partitions[1], partitions[2]


def kfold_split(
    records: list[CommentRecord],
    k: int,
    seed: int,
    stratified: bool = True,
) -> list[tuple[list[int], list[int]]]:
    """k disjoint folds as (train positions, test positions) pairs.

    Positions are 0-based indices into the input list. Test folds partition
    the index set with sizes differing by at most one; stratified mode keeps
    per-class fold sizes within one of each other by rotating the start of
    the oversized folds across classes.
    """
    n = len(records)
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if k > n:
        raise CorpusError(f"cannot make {k} folds from {n} records")
    rng = Rng(seed)
    fold_members: list[list[int]] = [[] for _ in range(k)]
    if stratified:
        offset = 0
        for label in CLASS_ORDER:
            positions = [i for i, rec in enumerate(records) if rec.label is label]
            if not positions:
                continue
            if len(positions) < k:
                raise CorpusError(
                    f"class {label.value} has {len(positions)} records, fewer than k={k}"
                )
            rng.shuffle(positions)
            base, extra = divmod(len(positions), k)
            start = 0
            for f in range(k):
                size = base + (1 if (f - offset) % k < extra else 0)
                fold_members[f].extend(positions[start:start + size])
                start += size
            offset += extra
    else:
        order = list(range(n))
        rng.shuffle(order)
        base, extra = divmod(n, k)
        start = 0
        for f in range(k):
            size = base + (1 if f < extra else 0)
            fold_members[f] = order[start:start + size]
            start += size
    folds = []
    for f in range(k):
        test_idx = sorted(fold_members[f])
        test_set = set(test_idx)
        train_idx = [i for i in range(n) if i not in test_set]
        folds.append((train_idx, test_idx))
    return folds

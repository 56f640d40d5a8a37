"""Note corpus ingestion, LOS labeling, tokenization, and CV folds."""

from __future__ import annotations

import csv
import itertools
import random
import re
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, CorpusError
from .ioutil import read_jsonl

MANDATORY_FIELDS = ("note_id", "subject_id", "hadm_id", "text", "los_days")

# Runs of Unicode alphanumerics, underscore excluded: the tokenizer splits on
# every non-alphanumeric boundary.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class NoteRecord:
    """One clinical document with identifiers and the LOS target."""

    note_id: str
    subject_id: str
    hadm_id: str
    text: str
    los_days: float
    label: int | None = None


@dataclass(frozen=True)
class CohortConfig:
    """How the binary long-stay label is derived from LOS."""

    threshold_mode: str = "median"  # "median" or "fixed"
    fixed_threshold_days: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.threshold_mode not in ("median", "fixed"):
            raise ConfigError(f"unknown threshold_mode {self.threshold_mode!r}")
        if (self.threshold_mode == "fixed") != (self.fixed_threshold_days is not None):
            raise ConfigError("fixed_threshold_days must be set iff threshold_mode is 'fixed'")


@dataclass(frozen=True)
class TokenizedNote:
    """Lowercased token sequence plus byte spans back into the raw text."""

    note_id: str
    tokens: tuple[str, ...]
    token_spans: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Rejection:
    """One rejected input row and why it was rejected."""

    row: int
    note_id: str | None
    reason: str


@dataclass
class CorpusLoad:
    records: list[NoteRecord] = field(default_factory=list)
    rejections: list[Rejection] = field(default_factory=list)


def load_corpus(path: str | Path, fmt: str) -> CorpusLoad:
    """Load note records from a JSONL or CSV file.

    Structurally broken inputs (unreadable file, missing CSV column, duplicate
    note_id) raise; row-level defects are collected into the rejection report
    instead of being silently dropped.
    """
    path = Path(path)
    if fmt == "jsonl":
        rows: Iterable[tuple[int, dict]] = enumerate(read_jsonl(path), start=1)
    elif fmt == "csv":
        rows = _csv_rows(path)
    else:
        raise ConfigError(f"unknown corpus format {fmt!r}")

    result = CorpusLoad()
    seen: set[str] = set()
    for rownum, raw in rows:
        note_id = raw.get("note_id")
        record, reason = _validate_row(raw)
        if record is None:
            result.rejections.append(Rejection(rownum, note_id if isinstance(note_id, str) else None, reason))
            continue
        if record.note_id in seen:
            raise CorpusError(f"duplicate note_id {record.note_id!r} at row {rownum}")
        seen.add(record.note_id)
        result.records.append(record)
    return result


def _csv_rows(path: Path) -> Iterable[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [col for col in MANDATORY_FIELDS if col not in header]
        if missing:
            raise CorpusError(f"{path}: missing mandatory column(s): {', '.join(missing)}")
        rows = []
        for rownum, row in enumerate(reader, start=2):  # row 1 is the header
            if "label" in row and (row["label"] is None or row["label"] == ""):
                row["label"] = None
            rows.append((rownum, row))
    return rows


def _validate_row(raw: dict) -> tuple[NoteRecord | None, str]:
    for key in MANDATORY_FIELDS:
        if key not in raw or raw[key] is None:
            return None, f"missing {key}"
    note_id = str(raw["note_id"])
    text = raw["text"]
    if not isinstance(text, str) or not text.strip():
        return None, "empty text"
    try:
        los = float(raw["los_days"])
    except (TypeError, ValueError):
        return None, "invalid los_days"
    if los != los:  # NaN
        return None, "invalid los_days"
    if los < 0:
        return None, "negative los_days"
    label = raw.get("label")
    if label is not None:
        try:
            label = int(label)
        except (TypeError, ValueError):
            return None, "invalid label"
        if label not in (0, 1):
            return None, "invalid label"
    return (
        NoteRecord(
            note_id=note_id,
            subject_id=str(raw["subject_id"]),
            hadm_id=str(raw["hadm_id"]),
            text=text,
            los_days=los,
            label=label,
        ),
        "",
    )


def lower_median(values: Sequence[float]) -> float:
    """Lower median of the sorted multiset (no interpolation)."""
    if not values:
        raise CorpusError("median undefined for an empty corpus")
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def binarize_los(records: Sequence[NoteRecord], config: CohortConfig) -> list[NoteRecord]:
    """Fill labels: 1 iff los_days is strictly above the threshold.

    In median mode the threshold is the lower median of the cohort's LOS
    values, so stays exactly at the median count as short.
    """
    if not records:
        raise CorpusError("cannot binarize an empty corpus")
    if config.threshold_mode == "median":
        threshold = lower_median([r.los_days for r in records])
    else:
        threshold = float(config.fixed_threshold_days)  # type: ignore[arg-type]
    return [replace(r, label=1 if r.los_days > threshold else 0) for r in records]


def preprocess(record: NoteRecord, boilerplate_patterns: Sequence[str] = ()) -> TokenizedNote:
    """Tokenize a note: drop boilerplate lines, lowercase, NFC, split on
    non-alphanumeric boundaries.

    Spans are byte offsets into the original text so downstream consumers can
    always recover the raw surface, even though tokens themselves are
    normalized.
    """
    if not record.text:
        raise CorpusError(f"{record.note_id}: empty text")
    compiled = [re.compile(p) for p in boilerplate_patterns]

    # Cumulative UTF-8 byte offset of every character position.
    byte_at = [0] + list(itertools.accumulate(len(ch.encode("utf-8")) for ch in record.text))

    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    pos = 0
    for line in record.text.splitlines(keepends=True):
        start = pos
        pos += len(line)
        stripped = line.rstrip("\n\r")
        if any(p.search(stripped) for p in compiled):
            continue
        for m in _TOKEN_RE.finditer(stripped):
            surface = unicodedata.normalize("NFC", m.group()).lower()
            cs, ce = start + m.start(), start + m.end()
            tokens.append(surface)
            spans.append((byte_at[cs], byte_at[ce]))
    if not tokens:
        raise CorpusError(f"{record.note_id}: empty after filtering")
    return TokenizedNote(record.note_id, tuple(tokens), tuple(spans))


def simple_tokens(text: str) -> list[str]:
    """Tokenization rule shared with the baseline classifier's featurizer."""
    return [unicodedata.normalize("NFC", m.group()).lower() for m in _TOKEN_RE.finditer(text)]


def stratified_folds(
    records: Sequence[NoteRecord], k: int, seed: int
) -> list[tuple[list[str], list[str]]]:
    """Seed-deterministic stratified k-fold split over note ids.

    Each class is shuffled independently and dealt round-robin, which keeps
    every fold's class counts within one record of the global proportion.
    """
    if k < 2:
        raise CorpusError(f"k must be >= 2, got {k}")
    by_class: dict[int, list[str]] = {}
    for r in records:
        if r.label is None:
            raise CorpusError(f"{r.note_id}: unlabeled record in fold construction")
        by_class.setdefault(r.label, []).append(r.note_id)

    rng = random.Random(seed)
    test_folds: list[list[str]] = [[] for _ in range(k)]
    for label in sorted(by_class):
        ids = sorted(by_class[label])
        if len(ids) < k:
            raise CorpusError(f"class {label} has {len(ids)} member(s), fewer than k={k}")
        rng.shuffle(ids)
        for i, note_id in enumerate(ids):
            test_folds[i % k].append(note_id)

    folds = []
    for i in range(k):
        test_ids = sorted(test_folds[i])
        train_ids = sorted(nid for j in range(k) if j != i for nid in test_folds[j])
        folds.append((train_ids, test_ids))
    return folds

"""Cross-lingual alignment analytics over row-aligned embedding matrices.

Two dissimilarity variants are reported and labelled everywhere:

  "paper"     1 - ||X Y^T||_F^2 / (||X X^T||_F ||Y Y^T||_F) on the raw
              matrices. 0 for identical inputs, 1 for row-wise orthogonal
              subspaces; invariant when BOTH sides share one rotation.
  "centered"  column-mean-center, then the standard linear-CKA similarity
              as a dissimilarity: 1 - ||Yc^T Xc||_F^2 /
              (||Xc^T Xc||_F ||Yc^T Yc||_F). Additionally invariant under a
              rotation applied to either side alone.

Both are symmetric, scale-invariant and confined to [0, 1] by
Cauchy-Schwarz; neither is asserted to equal any published figure.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import (DegenerateInput, DimensionMismatch, MismatchedReports,
                     RowCountMismatch, SchemaError, UnknownLanguage)

VARIANTS = ("paper", "centered")


def _as_matrix(x) -> np.ndarray:
    if hasattr(x, "vectors"):  # EmbeddingMatrix
        x = x.vectors
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


def _gram_norm(x: np.ndarray) -> float:
    # ||X X^T||_F == ||X^T X||_F; contract over the smaller side.
    g = x.T @ x if x.shape[1] <= x.shape[0] else x @ x.T
    return float(np.linalg.norm(g))


def _cross_gram_sq(x: np.ndarray, y: np.ndarray) -> float:
    # ||X Y^T||_F^2 == <X^T X, Y^T Y>_F; the m x m form avoids the N x N matrix.
    if x.shape[1] <= x.shape[0]:
        return float(np.sum((x.T @ x) * (y.T @ y)))
    return float(np.sum((x @ y.T) ** 2))


def _cov_gram_sq(x: np.ndarray, y: np.ndarray) -> float:
    # ||Y^T X||_F^2 == <X X^T, Y Y^T>_F; the standard linear-CKA numerator.
    if x.shape[1] <= x.shape[0]:
        return float(np.sum((y.T @ x) ** 2))
    return float(np.sum((x @ x.T) * (y @ y.T)))


def cka(x, y, variant: str = "paper") -> float:
    """Pairwise alignment dissimilarity of two row-aligned matrices."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    x = _as_matrix(x)
    y = _as_matrix(y)
    if x.shape[0] != y.shape[0]:
        raise RowCountMismatch(f"{x.shape[0]} vs {y.shape[0]} rows")
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch(f"{x.shape[1]} vs {y.shape[1]} columns")
    if x.shape[0] < 2:
        raise RowCountMismatch("need at least 2 aligned rows")
    if variant == "centered":
        x = x - x.mean(axis=0, keepdims=True)
        y = y - y.mean(axis=0, keepdims=True)
        numerator = _cov_gram_sq(x, y)
    else:
        numerator = _cross_gram_sq(x, y)
    nx = _gram_norm(x)
    ny = _gram_norm(y)
    if nx <= 0.0 or ny <= 0.0:
        raise DegenerateInput("an input has an all-zero Gram matrix")
    return 1.0 - numerator / (nx * ny)


@dataclass(frozen=True)
class LanguageGroupSpec:
    hr: tuple[str, ...]
    lr: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "hr", tuple(self.hr))
        object.__setattr__(self, "lr", tuple(self.lr))
        if not self.hr or not self.lr:
            raise ValueError("both language groups must be nonempty")
        if set(self.hr) & set(self.lr):
            raise ValueError("language groups must be disjoint")


@dataclass(frozen=True)
class AlignmentReport:
    languages: tuple[str, ...]
    matrix: np.ndarray
    variant: str

    def value(self, lang_a: str, lang_b: str) -> float:
        try:
            i = self.languages.index(lang_a)
            j = self.languages.index(lang_b)
        except ValueError as exc:
            raise UnknownLanguage(str(exc)) from exc
        return float(self.matrix[i, j])


def alignment_matrix(corpora: Mapping[str, object], variant: str = "paper") -> AlignmentReport:
    """Pairwise dissimilarity matrix over per-language matrices that share
    the same row-aligned parallel sentence set."""
    languages = tuple(corpora.keys())
    mats = [_as_matrix(corpora[lang]) for lang in languages]
    n = len(languages)
    out = np.zeros((n, n))
    for i in range(n):
        out[i, i] = cka(mats[i], mats[i], variant)
        for j in range(i + 1, n):
            value = cka(mats[i], mats[j], variant)
            out[i, j] = out[j, i] = value
    return AlignmentReport(languages=languages, matrix=out, variant=variant)


def group_summary(report: AlignmentReport, spec: LanguageGroupSpec) -> dict[str, float]:
    """Mean dissimilarity within each group (unordered distinct pairs,
    diagonal excluded) and between the groups (all HR x LR pairs)."""
    for lang in spec.hr + spec.lr:
        if lang not in report.languages:
            raise UnknownLanguage(f"language {lang!r} not in the report")

    def within(group: tuple[str, ...]) -> float:
        values = [report.value(a, b)
                  for k, a in enumerate(group) for b in group[k + 1:]]
        return float(np.mean(values)) if values else float("nan")

    between = [report.value(a, b) for a in spec.hr for b in spec.lr]
    return {
        "within_hr": within(spec.hr),
        "within_lr": within(spec.lr),
        "between": float(np.mean(between)),
    }


@dataclass(frozen=True)
class AlignmentDelta:
    languages: tuple[str, ...]
    variant: str
    matrix: np.ndarray  # after - before
    improved_pairs: int  # dissimilarity decreased
    worsened_pairs: int
    unchanged_pairs: int
    group_deltas: dict[str, float] | None = None


def compare_alignment(before: AlignmentReport, after: AlignmentReport,
                      spec: LanguageGroupSpec | None = None) -> AlignmentDelta:
    """Per-pair and (optionally) per-group deltas, after minus before."""
    if before.languages != after.languages:
        raise MismatchedReports(f"language sets differ: {before.languages} "
                                f"vs {after.languages}")
    if before.variant != after.variant:
        raise MismatchedReports(f"variants differ: {before.variant} vs {after.variant}")
    delta = after.matrix - before.matrix
    n = len(before.languages)
    upper = [delta[i, j] for i in range(n) for j in range(i + 1, n)]
    group_deltas = None
    if spec is not None:
        before_groups = group_summary(before, spec)
        after_groups = group_summary(after, spec)
        group_deltas = {key: after_groups[key] - before_groups[key] for key in before_groups}
    return AlignmentDelta(
        languages=before.languages, variant=before.variant, matrix=delta,
        improved_pairs=sum(1 for v in upper if v < 0),
        worsened_pairs=sum(1 for v in upper if v > 0),
        unchanged_pairs=sum(1 for v in upper if v == 0),
        group_deltas=group_deltas,
    )


# --- persistence ---------------------------------------------------------------

def write_matrix_csv(path, report: AlignmentReport, header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write(f"# variant={report.variant}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["language", *report.languages])
        for i, lang in enumerate(report.languages):
            writer.writerow([lang, *(f"{v:.12g}" for v in report.matrix[i])])


def read_matrix_csv(path) -> AlignmentReport:
    variant = "paper"
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            if "variant=" in line:
                variant = line.split("variant=", 1)[1].strip()
            continue
        if line:
            rows.append(next(csv.reader([line])))
    if not rows or rows[0][0] != "language":
        raise SchemaError(f"{path}: not an alignment matrix CSV")
    languages = tuple(rows[0][1:])
    if len(rows) != len(languages) + 1:
        raise SchemaError(f"{path}: expected {len(languages)} data rows")
    matrix = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
    return AlignmentReport(languages=languages, matrix=matrix, variant=variant)


def write_group_json(path, report: AlignmentReport, spec: LanguageGroupSpec,
                     config_hash: str | None = None) -> None:
    doc = {
        "variant": report.variant,
        "groups": {"hr": list(spec.hr), "lr": list(spec.lr)},
        "summary": group_summary(report, spec),
    }
    if config_hash:
        doc["config_hash"] = config_hash
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def write_delta_json(path, delta: AlignmentDelta, config_hash: str | None = None) -> None:
    pair_deltas = {}
    for i, a in enumerate(delta.languages):
        for j in range(i + 1, len(delta.languages)):
            pair_deltas[f"{a}/{delta.languages[j]}"] = float(delta.matrix[i, j])
    doc = {
        "variant": delta.variant,
        "pair_deltas": pair_deltas,
        "improved_pairs": delta.improved_pairs,
        "worsened_pairs": delta.worsened_pairs,
        "unchanged_pairs": delta.unchanged_pairs,
    }
    if delta.group_deltas is not None:
        doc["group_deltas"] = delta.group_deltas
    if config_hash:
        doc["config_hash"] = config_hash
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")

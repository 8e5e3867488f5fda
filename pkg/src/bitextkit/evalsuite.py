"""Four-task evaluation harness: bitext retrieval accuracy, template-based
zero-shot classification, paraphrase detection, and cross-lingual transfer
via a from-scratch linear softmax classifier trained with Adam."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .errors import (DimensionMismatch, MalformedTemplate, RowCountMismatch,
                     SchemaError, ValidationError)
from .miner import ParaphraseTriple, embed_map
from .vecmath import EmbeddingMatrix

LABEL_PLACEHOLDER = "[LABEL]"

SIB_SHAPE = {"train": 701, "dev": 99, "test": 204}


@dataclass(frozen=True)
class LabeledDataset:
    split: str
    items: tuple[tuple[str, int], ...]
    label_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple((str(t), int(l)) for t, l in self.items))
        object.__setattr__(self, "label_names", tuple(self.label_names))
        for text, label in self.items:
            if not 0 <= label < len(self.label_names):
                raise SchemaError(f"label index {label} out of range for "
                                  f"{len(self.label_names)} labels")

    @property
    def texts(self) -> list[str]:
        return [t for t, _ in self.items]

    @property
    def labels(self) -> np.ndarray:
        return np.array([l for _, l in self.items], dtype=np.int64)


def load_label_names(path) -> list[str]:
    names = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()
             if ln.strip() and not ln.startswith("#")]
    if len(names) != len(set(names)):
        raise SchemaError(f"{path}: duplicate label names")
    if not names:
        raise SchemaError(f"{path}: no label names")
    return names


def load_labeled_tsv(path, label_names: Sequence[str], split: str) -> LabeledDataset:
    """TSV with columns (text, label_name)."""
    index = {name: i for i, name in enumerate(label_names)}
    items = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise SchemaError(f"{path}:{lineno}: expected 2 columns, got {len(parts)}")
        text, label_name = parts
        if label_name not in index:
            raise SchemaError(f"{path}:{lineno}: unknown label {label_name!r}")
        items.append((text, index[label_name]))
    return LabeledDataset(split=split, items=tuple(items), label_names=tuple(label_names))


def check_sib_shape(datasets: Mapping[str, LabeledDataset]) -> None:
    """Enforce the 701/99/204 per-language split sizes (strict-loader mode)."""
    for split, expected in SIB_SHAPE.items():
        ds = datasets.get(split)
        if ds is None or len(ds.items) != expected:
            got = "missing" if ds is None else len(ds.items)
            raise ValidationError(f"split {split!r} must have {expected} items, got {got}")


def load_templates(path) -> list[str]:
    templates = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines()
                 if ln.strip() and not ln.startswith("#")]
    validate_templates(templates)
    return templates


def validate_templates(templates: Sequence[str]) -> None:
    if not templates:
        raise MalformedTemplate("empty template set")
    for t in templates:
        if t.count(LABEL_PLACEHOLDER) != 1:
            raise MalformedTemplate(
                f"template must contain {LABEL_PLACEHOLDER} exactly once: {t!r}")


@dataclass(frozen=True)
class EvalReport:
    """Per-task result; mean is always the arithmetic mean of the breakdown."""

    task: str
    breakdown: dict[str, float]
    extra: dict = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return float(np.mean(list(self.breakdown.values())))

    def as_dict(self, provider: str | None = None, config: dict | None = None) -> dict:
        doc = {"task": self.task, "mean": self.mean, "breakdown": self.breakdown,
               "config": config or {}, "provider": provider or ""}
        if self.extra:
            doc["extra"] = self.extra
        return doc


def write_report(path, report: EvalReport, provider: str | None = None,
                 config: dict | None = None) -> None:
    Path(path).write_text(
        json.dumps(report.as_dict(provider, config), ensure_ascii=False,
                   sort_keys=True, indent=1) + "\n", encoding="utf-8")


# --- bitext mining ------------------------------------------------------------

def _retrieval_accuracy(queries: np.ndarray, cands: np.ndarray) -> float:
    idx, _ = kernels.argmax_cosine(queries, cands, -2.0)
    return float(np.mean(idx == np.arange(queries.shape[0])))


def bitext_accuracy(src: EmbeddingMatrix, tgt: EmbeddingMatrix) -> EvalReport:
    """Fraction of rows whose nearest neighbour on the other side (max
    cosine, ties to the lowest index) is the row-aligned translation;
    reported for both retrieval directions."""
    if src.dim != tgt.dim:
        raise DimensionMismatch(f"src dim {src.dim} vs tgt dim {tgt.dim}")
    if len(src) != len(tgt):
        raise RowCountMismatch(f"{len(src)} src rows vs {len(tgt)} tgt rows")
    if len(src) < 2:
        raise RowCountMismatch("bitext accuracy needs at least 2 aligned rows")
    return EvalReport(task="bitext_mining", breakdown={
        "src_to_tgt": _retrieval_accuracy(src.vectors, tgt.vectors),
        "tgt_to_src": _retrieval_accuracy(tgt.vectors, src.vectors),
    })


# --- zero-shot classification ---------------------------------------------------

def zsc_eval(docs: Sequence[str], gold: Sequence[int], label_names: Sequence[str],
             templates: Sequence[str], provider) -> EvalReport:
    """Per template: embed each template-filled label once, classify every
    document by maximal cosine (ties to the lowest label index)."""
    validate_templates(templates)
    if not label_names:
        raise SchemaError("empty label set")
    gold_arr = np.asarray(gold, dtype=np.int64)
    if gold_arr.shape[0] != len(docs):
        raise RowCountMismatch(f"{len(docs)} docs vs {gold_arr.shape[0]} gold labels")
    doc_mat = provider.embed(list(docs)).vectors
    breakdown: dict[str, float] = {}
    for t_index, template in enumerate(templates, 1):
        prompts = [template.replace(LABEL_PLACEHOLDER, name) for name in label_names]
        label_mat = provider.embed(prompts).vectors
        pred, _ = kernels.argmax_cosine(doc_mat, label_mat, -2.0)
        breakdown[f"template_{t_index}"] = float(np.mean(pred == gold_arr))
    return EvalReport(task="zero_shot_classification", breakdown=breakdown)


# --- paraphrase detection -------------------------------------------------------

def paraphrase_eval(benchmark: Sequence[ParaphraseTriple] | Sequence[dict],
                    provider) -> EvalReport:
    """Predict the candidate with the higher cosine to the anchor; an exact
    tie counts as incorrect (conservative convention)."""
    items = []
    for entry in benchmark:
        if isinstance(entry, ParaphraseTriple):
            items.append((entry.anchor, entry.paraphrase, entry.final_adversarial()))
        else:
            items.append((entry["anchor"], entry["paraphrase"], entry["not_paraphrase"]))
    if not items:
        raise SchemaError("empty benchmark")
    texts = [t for item in items for t in item]
    vectors = embed_map(provider, texts)
    correct = 0
    for anchor, paraphrase, adversarial in items:
        a = vectors[anchor]
        sim_para = float(np.dot(a, vectors[paraphrase]) /
                         (np.linalg.norm(a) * np.linalg.norm(vectors[paraphrase])))
        sim_adv = float(np.dot(a, vectors[adversarial]) /
                        (np.linalg.norm(a) * np.linalg.norm(vectors[adversarial])))
        correct += int(sim_para > sim_adv)
    return EvalReport(task="paraphrase_detection",
                      breakdown={"accuracy": correct / len(items)})


# --- linear classifier / cross-lingual transfer ---------------------------------

@dataclass(frozen=True)
class ClassifierConfig:
    epochs: int = 500
    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seeds: tuple[int, ...] = (0, 1, 2, 3)

    def __post_init__(self):
        if self.epochs < 1 or self.learning_rate <= 0:
            raise ValueError("epochs must be >= 1 and learning_rate positive")
        if not self.seeds:
            raise ValueError("at least one seed is required")


class Adam:
    """Adaptive-moment optimizer over a dict of parameter arrays."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 epsilon: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for key, grad in grads.items():
            if key not in self._m:
                self._m[key] = np.zeros_like(params[key])
                self._v[key] = np.zeros_like(params[key])
            self._m[key] = self.beta1 * self._m[key] + (1.0 - self.beta1) * grad
            self._v[key] = self.beta2 * self._v[key] + (1.0 - self.beta2) * grad * grad
            params[key] -= (self.lr / bc1) * self._m[key] / (
                np.sqrt(self._v[key] / bc2) + self.epsilon)


@dataclass(frozen=True)
class LinearClassifier:
    weight: np.ndarray  # (n_classes, dim)
    bias: np.ndarray  # (n_classes,)

    def logits(self, features: np.ndarray) -> np.ndarray:
        return features @ self.weight.T + self.bias

    def predict(self, features: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(features), axis=1)

    def accuracy(self, features: np.ndarray, labels: np.ndarray) -> float:
        return float(np.mean(self.predict(features) == labels))


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> float:
    shift = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.sum(np.exp(shift), axis=1))
    return float(np.mean(logsumexp - shift[np.arange(len(labels)), labels]))


def _softmax(logits: np.ndarray) -> np.ndarray:
    shift = np.exp(logits - logits.max(axis=1, keepdims=True))
    return shift / shift.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class ClassifierLogRow:
    epoch: int
    train_loss: float
    dev_loss: float
    is_best: bool


def train_linear_classifier_features(x_train: np.ndarray, y_train: np.ndarray,
                                     x_dev: np.ndarray, y_dev: np.ndarray,
                                     n_classes: int, cfg: ClassifierConfig, seed: int,
                                     ) -> tuple[LinearClassifier, list[ClassifierLogRow]]:
    """Full-batch Adam on softmax cross-entropy; returns the epoch checkpoint
    with minimal dev loss. Weights init uniform(-1/sqrt(m), 1/sqrt(m)), bias 0."""
    dim = x_train.shape[1]
    rng = np.random.default_rng(seed)
    bound = 1.0 / math.sqrt(dim)
    params = {"w": rng.uniform(-bound, bound, size=(n_classes, dim)),
              "b": np.zeros(n_classes)}
    opt = Adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)
    onehot = np.zeros((x_train.shape[0], n_classes))
    onehot[np.arange(x_train.shape[0]), y_train] = 1.0

    best = None
    best_dev = float("inf")
    log: list[ClassifierLogRow] = []
    for epoch in range(1, cfg.epochs + 1):
        logits = x_train @ params["w"].T + params["b"]
        train_loss = cross_entropy(logits, y_train)
        probs = _softmax(logits)
        dlogits = (probs - onehot) / x_train.shape[0]
        grads = {"w": dlogits.T @ x_train, "b": dlogits.sum(axis=0)}
        opt.step(params, grads)

        dev_logits = x_dev @ params["w"].T + params["b"]
        dev_loss = cross_entropy(dev_logits, y_dev)
        is_best = dev_loss < best_dev
        if is_best:
            best_dev = dev_loss
            best = LinearClassifier(weight=params["w"].copy(), bias=params["b"].copy())
        log.append(ClassifierLogRow(epoch=epoch, train_loss=train_loss,
                                    dev_loss=dev_loss, is_best=is_best))
    assert best is not None
    return best, log


def train_linear_classifier(train: LabeledDataset, dev: LabeledDataset, provider,
                            cfg: ClassifierConfig, seed: int,
                            ) -> tuple[LinearClassifier, list[ClassifierLogRow]]:
    if train.label_names != dev.label_names:
        raise SchemaError("train and dev label vocabularies differ")
    vectors = embed_map(provider, train.texts + dev.texts)
    x_train = np.stack([vectors[t] for t in train.texts])
    x_dev = np.stack([vectors[t] for t in dev.texts])
    return train_linear_classifier_features(
        x_train, train.labels, x_dev, dev.labels, len(train.label_names), cfg, seed)


def transfer_eval(source_langs: Sequence[str],
                  datasets: Mapping[str, tuple[LabeledDataset, LabeledDataset]],
                  test_set: LabeledDataset, provider, cfg: ClassifierConfig,
                  exclude_from_mean: str = "lb") -> EvalReport:
    """Train per (source language, seed) and evaluate on the target-language
    test split; the breakdown holds per-language means over seeds. A source
    equal to `exclude_from_mean` is evaluated but kept out of the mean."""
    test_vectors = embed_map(provider, test_set.texts)
    x_test = np.stack([test_vectors[t] for t in test_set.texts])
    y_test = test_set.labels

    breakdown: dict[str, float] = {}
    extra: dict = {"per_seed": {}}
    for lang in source_langs:
        if lang not in datasets:
            raise SchemaError(f"no train/dev datasets for source language {lang!r}")
        train, dev = datasets[lang]
        accs = []
        for seed in cfg.seeds:
            clf, _ = train_linear_classifier(train, dev, provider, cfg, seed)
            accs.append(clf.accuracy(x_test, y_test))
        extra["per_seed"][lang] = accs
        if lang == exclude_from_mean:
            extra[f"{lang}_source_accuracy"] = float(np.mean(accs))
        else:
            breakdown[lang] = float(np.mean(accs))
    return EvalReport(task="cross_lingual_transfer", breakdown=breakdown, extra=extra)

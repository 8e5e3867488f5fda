"""Run configuration: YAML file -> validated dataclasses with the pipeline's
documented defaults (thresholds 0.65/0.7, 24 h window, 50% length filter,
margin 0.5, batch 16 / 3 epochs / lr 1e-6, classifier 500 epochs / lr 1e-2 /
4 seeds). Validation errors name the offending key and its allowed range."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ParseError, ValidationError

DEFAULT_HR_LANGS = ("eng", "rus", "jpn", "zho", "fra", "deu", "por", "nld", "spa", "pol")
DEFAULT_LR_LANGS = ("bod", "snd", "tuk", "ydd", "wol", "asm", "smo", "xho", "nya", "sot")

PROVIDER_KINDS = ("mock", "http", "file")


@dataclass(frozen=True)
class ProviderSection:
    kind: str = "mock"
    dimension: int = 64
    noise_scale: float = 0.0
    concept_map: str | None = None
    endpoint_url: str = ""
    model_id: str = "default-model"
    request_batch_size: int = 96
    max_concurrent_requests: int = 4
    requests_per_minute: int = 600
    timeout: float = 30.0
    vectors_path: str | None = None


@dataclass(frozen=True)
class CorpusSection:
    min_doc_chars: int = 100
    min_sentence_chars: int = 10
    min_sentence_words: int = 3
    lang_gate: bool = True
    seed_texts: dict = field(default_factory=dict)  # lang -> seed text path


@dataclass(frozen=True)
class MinerSection:
    article_threshold: float = 0.65
    sentence_threshold: float = 0.7
    window_hours: float = 24.0
    max_length_diff: float = 0.5
    mutual_best: bool = False
    dedup_article_targets: bool = False


@dataclass(frozen=True)
class TrainSection:
    batch_size: int = 16
    epochs: int = 3
    learning_rate: float = 1e-6
    eval_every_steps: int = 500
    dev_fraction: float = 0.01
    margin: float = 0.5
    lr_override: float | None = None


@dataclass(frozen=True)
class ClassifierSection:
    epochs: int = 500
    learning_rate: float = 1e-2
    seeds: tuple[int, ...] = (0, 1, 2, 3)


@dataclass(frozen=True)
class GroupsSection:
    hr: tuple[str, ...] = DEFAULT_HR_LANGS
    lr: tuple[str, ...] = DEFAULT_LR_LANGS


@dataclass(frozen=True)
class PathsSection:
    workdir: str = "out"
    cache_dir: str = ".bitext-cache"


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    paths: PathsSection = field(default_factory=PathsSection)
    provider: ProviderSection = field(default_factory=ProviderSection)
    article_provider: ProviderSection | None = None
    sentence_provider: ProviderSection | None = None
    corpus: CorpusSection = field(default_factory=CorpusSection)
    miner: MinerSection = field(default_factory=MinerSection)
    train: TrainSection = field(default_factory=TrainSection)
    classifier: ClassifierSection = field(default_factory=ClassifierSection)
    groups: GroupsSection = field(default_factory=GroupsSection)

    def provider_for(self, stage: str) -> ProviderSection:
        if stage == "article" and self.article_provider is not None:
            return self.article_provider
        if stage == "sentence" and self.sentence_provider is not None:
            return self.sentence_provider
        return self.provider


_RANGES = {
    "seed": ("int", None, None),
    "paths.workdir": ("str",),
    "paths.cache_dir": ("str",),
    "corpus.min_doc_chars": ("int", 0, None),
    "corpus.min_sentence_chars": ("int", 0, None),
    "corpus.min_sentence_words": ("int", 0, None),
    "corpus.lang_gate": ("bool",),
    "miner.article_threshold": ("float", 0.0, 1.0, "exclusive"),
    "miner.sentence_threshold": ("float", 0.0, 1.0, "exclusive"),
    "miner.window_hours": ("float", 0.0, None, "exclusive"),
    "miner.max_length_diff": ("float", 0.0, 1.0, "left-exclusive"),
    "miner.mutual_best": ("bool",),
    "miner.dedup_article_targets": ("bool",),
    "train.batch_size": ("int", 1, None),
    "train.epochs": ("int", 1, None),
    "train.learning_rate": ("float", 0.0, None, "exclusive"),
    "train.eval_every_steps": ("int", 1, None),
    "train.dev_fraction": ("float", 0.0, 0.5, "exclusive"),
    "train.margin": ("float", 0.0, 2.0, "left-exclusive"),
    "train.lr_override": ("float", 0.0, None, "exclusive"),
    "classifier.epochs": ("int", 1, None),
    "classifier.learning_rate": ("float", 0.0, None, "exclusive"),
    "provider.dimension": ("int", 2, None),
    "provider.noise_scale": ("float", 0.0, 1.0, "right-exclusive"),
    "provider.request_batch_size": ("int", 1, None),
    "provider.max_concurrent_requests": ("int", 1, None),
    "provider.requests_per_minute": ("int", 1, None),
    "provider.timeout": ("float", 0.0, None, "exclusive"),
}


def _check_range(key: str, value) -> None:
    spec = _RANGES.get(key)
    if spec is None:
        return
    kind = spec[0]
    if kind == "bool":
        if not isinstance(value, bool):
            raise ValidationError(f"{key} must be a boolean, got {value!r}")
        return
    if kind == "str":
        if not isinstance(value, str):
            raise ValidationError(f"{key} must be a string, got {value!r}")
        return
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{key} must be a number, got {value!r}")
    if kind == "int" and int(value) != value:
        raise ValidationError(f"{key} must be an integer, got {value!r}")
    lo, hi = spec[1], spec[2]
    mode = spec[3] if len(spec) > 3 else "inclusive"
    lo_ok = True if lo is None else (value > lo if mode in ("exclusive", "left-exclusive") else value >= lo)
    hi_ok = True if hi is None else (value < hi if mode in ("exclusive", "right-exclusive") else value <= hi)
    if not (lo_ok and hi_ok):
        lo_b = "(" if mode in ("exclusive", "left-exclusive") else "["
        hi_b = ")" if mode in ("exclusive", "right-exclusive") else "]"
        lo_s = "-inf" if lo is None else lo
        hi_s = "inf" if hi is None else hi
        raise ValidationError(f"{key} must be in {lo_b}{lo_s}, {hi_s}{hi_b}, got {value}")


def _build_section(cls, data: dict, prefix: str):
    if not isinstance(data, dict):
        raise ValidationError(f"{prefix or 'config'} must be a mapping, got {data!r}")
    fields = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
    unknown = set(data) - fields
    if unknown:
        raise ValidationError(f"unknown key {prefix}.{sorted(unknown)[0]}")
    kwargs = {}
    for name, value in data.items():
        key = f"{prefix}.{name}" if prefix else name
        # provider subsections share the provider.* ranges
        range_key = key
        if prefix.endswith("provider") and not key.startswith("provider."):
            range_key = f"provider.{name}"
        if not (name == "lr_override" and value is None):
            _check_range(range_key, value)
        if name == "seeds":
            if (not isinstance(value, list) or not value
                    or any(isinstance(v, bool) or not isinstance(v, int) for v in value)):
                raise ValidationError(f"{key} must be a nonempty list of integers")
            value = tuple(value)
        if name in ("hr", "lr"):
            if not isinstance(value, list) or not value:
                raise ValidationError(f"{key} must be a nonempty list of language codes")
            value = tuple(str(v) for v in value)
        if name == "seed_texts":
            if not isinstance(value, dict):
                raise ValidationError(f"{key} must be a mapping of language -> path")
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{prefix or 'config'}: {exc}") from exc


def load_config(path) -> RunConfig:
    """Parse and validate a YAML config; unspecified keys take the defaults."""
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ParseError(f"cannot parse config {path}: {exc}") from exc
    return config_from_dict(raw if raw is not None else {})


def config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ParseError(f"config root must be a mapping, got {type(raw).__name__}")
    sections = {
        "paths": PathsSection, "provider": ProviderSection,
        "article_provider": ProviderSection, "sentence_provider": ProviderSection,
        "corpus": CorpusSection, "miner": MinerSection, "train": TrainSection,
        "classifier": ClassifierSection, "groups": GroupsSection,
    }
    unknown = set(raw) - set(sections) - {"seed"}
    if unknown:
        raise ValidationError(f"unknown key {sorted(unknown)[0]}")
    kwargs: dict = {}
    if "seed" in raw:
        _check_range("seed", raw["seed"])
        kwargs["seed"] = int(raw["seed"])
    for name, cls in sections.items():
        if name in raw:
            kwargs[name] = _build_section(cls, raw[name], name)
    cfg = RunConfig(**kwargs)
    _validate_provider(cfg.provider, "provider")
    if cfg.article_provider is not None:
        _validate_provider(cfg.article_provider, "article_provider")
    if cfg.sentence_provider is not None:
        _validate_provider(cfg.sentence_provider, "sentence_provider")
    if set(cfg.groups.hr) & set(cfg.groups.lr):
        raise ValidationError("groups.hr and groups.lr must be disjoint")
    return cfg


def _validate_provider(section: ProviderSection, prefix: str) -> None:
    if section.kind not in PROVIDER_KINDS:
        raise ValidationError(f"{prefix}.kind must be one of {PROVIDER_KINDS}, got {section.kind!r}")
    if section.kind == "http" and not section.endpoint_url:
        raise ValidationError(f"{prefix}.endpoint_url is required when kind is 'http'")
    if section.kind == "file" and not section.vectors_path:
        raise ValidationError(f"{prefix}.vectors_path is required when kind is 'file'")


def _as_plain(value):
    if hasattr(value, "__dataclass_fields__"):
        return {k: _as_plain(getattr(value, k)) for k in value.__dataclass_fields__}
    if isinstance(value, dict):
        return {k: _as_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_as_plain(v) for v in value]
    return value


def resolved_dict(cfg: RunConfig) -> dict:
    return _as_plain(cfg)


def config_hash(cfg: RunConfig) -> str:
    """Stable 16-hex-digit digest of the resolved config; stamped into every
    output file so artifacts declare what produced them."""
    canonical = json.dumps(resolved_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

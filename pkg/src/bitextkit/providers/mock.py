"""Deterministic offline embedding provider.

Each text maps to normalize(base(key) + noise_scale * noise(text)) where
key is concept_map[text] when present, else the text itself. base and
noise are unit vectors drawn from PRNGs seeded by a stable 64-bit hash,
so identical inputs give bit-identical vectors on every run and platform.
Texts sharing a concept key embed (near-)identically, which lets tests
plant ground-truth alignments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..errors import EmptyText
from ..textutil import fnv1a64
from ..vecmath import EmbeddingMatrix


@dataclass(frozen=True)
class MockSpec:
    dimension: int = 64
    noise_scale: float = 0.0
    concept_map: Mapping[str, str] | None = field(default=None)

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError(f"dimension must be >= 2, got {self.dimension}")
        if not 0.0 <= self.noise_scale < 1.0:
            raise ValueError(f"noise_scale must be in [0, 1), got {self.noise_scale}")


def _unit(seed_text: str, dim: int) -> np.ndarray:
    rng = np.random.default_rng(fnv1a64(seed_text))
    v = rng.standard_normal(dim)
    norm = np.linalg.norm(v)
    while norm < 1e-12:  # astronomically unlikely; reroll rather than divide by ~0
        v = rng.standard_normal(dim)
        norm = np.linalg.norm(v)
    return v / norm


def mock_vector(text: str, spec: MockSpec) -> np.ndarray:
    key = text if spec.concept_map is None else spec.concept_map.get(text, text)
    v = _unit("base:" + key, spec.dimension)
    if spec.noise_scale > 0.0:
        v = v + spec.noise_scale * _unit("noise:" + text, spec.dimension)
    return v / np.linalg.norm(v)


def mock_embed(texts: Sequence[str], spec: MockSpec) -> EmbeddingMatrix:
    """Embed `texts` deterministically; one L2-normalized row per text."""
    if not texts:
        raise EmptyText("no texts to embed")
    for t in texts:
        if not t.strip():
            raise EmptyText("cannot embed an empty text")
    rows = np.stack([mock_vector(t, spec) for t in texts])
    return EmbeddingMatrix([str(i) for i in range(len(texts))], rows)


class MockEmbeddingProvider:
    """Provider-interface wrapper around mock_embed."""

    def __init__(self, spec: MockSpec | None = None, **kwargs):
        self.spec = spec if spec is not None else MockSpec(**kwargs)
        self.name = f"mock(dim={self.spec.dimension},noise={self.spec.noise_scale})"

    def embed(self, texts: Sequence[str]) -> EmbeddingMatrix:
        return mock_embed(texts, self.spec)

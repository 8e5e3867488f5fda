"""Provider boundary: embeddings (remote/file/mock), language ID, and
adversarial-text generation, with persistent vector caching."""

from .cache import CACHE_DIR_ENV, VectorCache, cache_key, resolve_cache_dir
from .filestore import (FileEmbeddingProvider, load_embedding_matrix,
                        read_embedding_tsv, write_embedding_tsv)
from .http import (API_KEY_ENV, HttpEmbeddingProvider, ProviderConfig,
                   SlidingWindowRateLimiter, embed_batch)
from .langid import (LangPrediction, LanguageIdentifier, TrigramProfile,
                     build_profile, identify_language)
from .mock import MockEmbeddingProvider, MockSpec, mock_embed, mock_vector
from .negatives import (FlipResult, RemoteNegativeGenerator,
                        RuleBasedNegativeGenerator, generate_adversarial,
                        meaning_flip)

__all__ = [
    "API_KEY_ENV", "CACHE_DIR_ENV", "FileEmbeddingProvider", "FlipResult",
    "HttpEmbeddingProvider", "LangPrediction", "LanguageIdentifier",
    "MockEmbeddingProvider", "MockSpec", "ProviderConfig",
    "RemoteNegativeGenerator", "RuleBasedNegativeGenerator",
    "SlidingWindowRateLimiter", "TrigramProfile", "VectorCache",
    "build_profile", "cache_key", "embed_batch", "generate_adversarial",
    "identify_language", "load_embedding_matrix", "meaning_flip",
    "mock_embed", "mock_vector", "read_embedding_tsv", "resolve_cache_dir",
    "write_embedding_tsv",
]

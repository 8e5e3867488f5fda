"""bitextkit: mine parallel sentence pairs from comparable corpora, train a
linear embedding adapter with a margin-based contrastive loss, and evaluate
embedding spaces (bitext retrieval, zero-shot classification, paraphrase
detection, cross-lingual transfer, pairwise alignment analytics)."""

__version__ = "0.1.0"

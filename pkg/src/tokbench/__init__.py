"""Tokenizer evaluation toolkit: linguistic fidelity and efficiency metrics for subword tokenizers."""

__version__ = "0.1.0"

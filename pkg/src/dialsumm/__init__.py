"""Dialogue summarization: dialogue-act tagging, discourse rewriting, pointer-generator summaries."""

__version__ = "0.1.0"

"""Meta-analysis of study-level CSV tables kept on wiki pages."""

__version__ = "0.1.0"

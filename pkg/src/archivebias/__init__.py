"""Crawl newspaper archives into a date-keyed corpus and measure per-keyword
bias as the gap between an article summary's sentiment and the mean sentiment
of its sentences."""

__version__ = "0.1.0"

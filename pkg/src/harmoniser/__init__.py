"""Retrieval engine and review workflow for harmonising survey questions."""

__version__ = "0.1.0"

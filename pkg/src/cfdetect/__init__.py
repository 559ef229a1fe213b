"""Crowdfunding-fraud classification from publication-time text and image cues."""

__version__ = "0.1.0"

"""Cryo-EM segmentation post-processing toolkit."""

__version__ = "0.1.0"

"""Reduced multiscale model of airborne virus spread between hosts in a disk-shaped room."""

__version__ = "0.1.0"

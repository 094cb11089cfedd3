"""
Co-quantum dynamics toolkit for Stern-Gerlach and Frisch-Segre spin-flip
experiments.
"""

__version__ = "1.0.0"

"""Strong-disorder RG toolkit for monitored XX chains mapped to
non-Hermitian spin ladders."""

__version__ = "0.1.0"

"""modcheck: a modular static analyzer for the Mini-C language.

Proves the absence of runtime errors per module by abstract interpretation,
generates verification harnesses from contracts, and infers contracts for
undocumented interfaces by iterating module analyses to a fixpoint.
"""
from __future__ import annotations

__version__ = "0.1.0"

"""Runtime knobs: precision budget, scaling slack, tie policies.

The precision budget bounds how far interval refinement may go before a
comparison gives up and raises IndeterminateComparison.  It can be set
per-call, globally, or through the ORBITILE_BITS environment variable.
"""

from __future__ import annotations

import os
from fractions import Fraction

DEFAULT_BITS = 4096

# How ties in tile-index searches are handled.
TIE_RAISE = "raise"
TIE_LEFT = "left"

# Scaling slack used by scale_distributions: min nu = slack * gamma * max eta.
DEFAULT_SCALING_SLACK = Fraction(3, 2)

_global_bits: int | None = None


def bit_budget() -> int:
    """Current precision budget in bits."""
    if _global_bits is not None:
        return _global_bits
    env = os.environ.get("ORBITILE_BITS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"ORBITILE_BITS must be an integer, got {env!r}")
        if value < 16:
            raise ValueError("ORBITILE_BITS must be at least 16")
        return value
    return DEFAULT_BITS


def set_bit_budget(bits: int | None) -> None:
    """Override the budget globally (None restores env/default lookup)."""
    global _global_bits
    if bits is not None and bits < 16:
        raise ValueError("bit budget must be at least 16")
    _global_bits = bits

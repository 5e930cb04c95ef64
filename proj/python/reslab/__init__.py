"""Resonance counting toolkit for hyperbolic manifolds with cusps."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import verify as _verify


def verify(suite="all", grid_scale=1.0, seed=2024):
    """Run a verification suite; returns (pass, report dict)."""
    ok, text = _verify(suite, grid_scale, seed)
    return ok, _json.loads(text)

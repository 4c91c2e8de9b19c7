"""Online stochastic mirror descent, Thompson-style play over atomic priors,
and executable stability/diameter/information-ratio diagnostics."""

from .potentials import (
    ClippedLp,
    LpBall,
    Negentropy,
    Potential,
    Simplex,
    TsallisAlpha,
    TsallisHalf,
    graph_tsallis_alpha,
)

__all__ = [
    "ClippedLp",
    "LpBall",
    "Negentropy",
    "Potential",
    "Simplex",
    "TsallisAlpha",
    "TsallisHalf",
    "graph_tsallis_alpha",
]

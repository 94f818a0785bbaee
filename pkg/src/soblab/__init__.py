"""Fractional Sobolev embeddings: exact classification and numerical checks."""

from soblab.exponents import (
    INF,
    Answer,
    DomainKind,
    EmbeddingVerdict,
    Regime,
    SobolevIndex,
    classify,
    classify_compact,
    classify_continuous,
    connecting_q,
    curve_chain_check,
    gamma_curve,
    interpolation_exponents,
    max_target_p,
    region_sample,
    regime,
    sobolev_conjugate,
)

__all__ = [
    "INF",
    "Answer",
    "DomainKind",
    "EmbeddingVerdict",
    "Regime",
    "SobolevIndex",
    "classify",
    "classify_compact",
    "classify_continuous",
    "connecting_q",
    "curve_chain_check",
    "gamma_curve",
    "interpolation_exponents",
    "max_target_p",
    "region_sample",
    "regime",
    "sobolev_conjugate",
]

__version__ = "0.1.0"

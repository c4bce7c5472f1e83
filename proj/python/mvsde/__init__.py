"""Simulation toolkit for multivalued mean-field SDEs.

Thin re-export of the compiled core: monotone-operator calculus (resolvent,
Yosida approximation, minimal section), exact transport distances, and the
interacting-particle solver.
"""

from ._core import (
    CertificationError,
    ConfigError,
    InstabilityError,
    Operator,
    __version__,
    minimal_section,
    moment_norm,
    normal_quantile,
    project_domain_closure,
    quantile,
    resolvent,
    simulate,
    w1,
    w2,
    yosida,
)

__all__ = [
    "CertificationError",
    "ConfigError",
    "InstabilityError",
    "Operator",
    "__version__",
    "minimal_section",
    "moment_norm",
    "normal_quantile",
    "project_domain_closure",
    "quantile",
    "resolvent",
    "simulate",
    "w1",
    "w2",
    "yosida",
]

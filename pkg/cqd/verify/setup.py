"""
Factories for pre-configured verifiers.
"""

import structlog

from .core import CheckLevel, Verifier
from .strategies import (
    DensityFactorizationCheck,
    EntanglementCheck,
    FlipParameterizationCheck,
    TwoStageClosedFormCheck,
    TwoStageMonteCarloCheck,
    UncertaintyEqualityCheck,
    XSplitCheck,
)

logger = structlog.get_logger(__name__)


def create_identity_verifier() -> Verifier:
    """Verifier with only the exact (non-statistical) checks."""
    verifier = Verifier()
    verifier.register_strategy(CheckLevel.IDENTITY, UncertaintyEqualityCheck())
    verifier.register_strategy(CheckLevel.IDENTITY, TwoStageClosedFormCheck())
    verifier.register_strategy(CheckLevel.IDENTITY, DensityFactorizationCheck())
    verifier.register_strategy(CheckLevel.IDENTITY, FlipParameterizationCheck())

    logger.info("Created identity verifier")
    return verifier


def create_quantum_verifier(samples: int = 200_000) -> Verifier:
    """Verifier with the full suite of quantum cross-checks."""
    verifier = create_identity_verifier()
    verifier.register_strategy(CheckLevel.STATISTICAL, EntanglementCheck())
    verifier.register_strategy(CheckLevel.STATISTICAL, EntanglementCheck(correlated=True))
    verifier.register_strategy(CheckLevel.STATISTICAL, XSplitCheck(samples))
    verifier.register_strategy(CheckLevel.STATISTICAL, TwoStageMonteCarloCheck(samples=samples))

    logger.info("Created quantum verifier", samples=samples)
    return verifier

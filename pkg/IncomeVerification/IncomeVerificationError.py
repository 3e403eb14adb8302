"""
===================================================================
IncomeVerificationError (:mod:`IncomeVerification.IncomeVerificationError`)
===================================================================

.. currentmodule:: IncomeVerification.IncomeVerificationError

Exceptions in **IncomeVerification**.

.. autosummary::
    :toctree: generated/

    IncomeVerificationError
    ConfigurationError
    ContractViolation
    RejectedInput
    CorpusError
    ExtractionError
    TrainingError

"""

__all__ = [
    'IncomeVerificationError',
    'ConfigurationError',
    'ContractViolation',
    'RejectedInput',
    'CorpusError',
    'ExtractionError',
    'TrainingError',
]


class IncomeVerificationError(Exception):
    """Exception for errors in IncomeVerification."""

    exit_code = 2


class ConfigurationError(IncomeVerificationError):
    """Invalid configuration value, table or file layout."""

    exit_code = 1


class ContractViolation(IncomeVerificationError):
    """A precondition of an operation does not hold."""

    exit_code = 1


class RejectedInput(IncomeVerificationError):
    """Input data that cannot be processed (e.g. zero stated income)."""

    exit_code = 1


class CorpusError(IncomeVerificationError):
    """Source corpus that cannot be loaded (e.g. duplicate record ids)."""


class ExtractionError(IncomeVerificationError):
    """Source document that cannot be parsed by its extractor."""


class TrainingError(IncomeVerificationError):
    """Model training diverged or received unusable data."""

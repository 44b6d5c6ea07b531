"""Exception hierarchy. Every error carries a stable machine-readable code."""


class GCalcError(Exception):
    code = "domain_error"


class ConfigError(GCalcError):
    code = "config_error"


class NotInvertibleError(GCalcError):
    code = "not_invertible"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class UndecidableError(GCalcError):
    """Raised when a question has no sound answer in the exact tier."""

    code = "undecidable"


class InvertibleError(GCalcError):
    code = "invertible"


class ZeroElementError(GCalcError):
    code = "zero_element"


class NotTameError(GCalcError):
    code = "not_representable_tame"


class FamilyError(GCalcError):
    code = "bad_idempotent_family"


class SupportError(GCalcError):
    code = "support_not_computable"


class ModerateError(GCalcError):
    code = "not_alpha_bounded"


class EmbeddingError(GCalcError):
    code = "embedding_error"


class DomainError(GCalcError):
    code = "domain_violation"


class QuadratureError(GCalcError):
    code = "quadrature_failure"

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConvergenceError(GCalcError):
    code = "no_convergence_witness"


class ContractionError(GCalcError):
    code = "contraction_check_failed"


class BudgetError(GCalcError):
    code = "iteration_budget_exceeded"


class ParseError(Exception):
    """Syntax error with 1-based line/column and the expected-token set."""

    code = "parse_error"

    def __init__(self, message, line=1, column=1, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        detail = f"{message} at line {line}, column {column}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class EmpiricalFallbackWarning(UserWarning):
    """An exact-tier operation fell back to sampled lattice values."""

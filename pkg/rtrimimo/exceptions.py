"""Custom exceptions for rtrimimo."""

from typing import Any, List, Optional


class RTRIMimoError(Exception):
    """Base exception for all rtrimimo errors."""

    pass


class ConstraintViolationError(RTRIMimoError):
    """Raised when an argument falls outside a documented bound."""

    def __init__(self, bound: str, value: Any):
        self.bound = bound
        self.value = value
        super().__init__(f"Constraint violated: {bound} (got {value!r})")


class DomainError(RTRIMimoError):
    """Raised when a function is evaluated outside its mathematical domain."""

    def __init__(self, function: str, argument: str, value: Any, hint: Optional[str] = None):
        self.function = function
        self.argument = argument
        self.value = value

        msg = f"{function}: {argument}={value!r} is outside the domain"
        if hint:
            msg += f"\n\nHint: {hint}"

        super().__init__(msg)


class DimensionMismatchError(RTRIMimoError):
    """Raised when matrix operands have incompatible shapes."""

    def __init__(self, operation: str, expected: Any, actual: Any):
        self.operation = operation
        self.expected = expected
        self.actual = actual
        super().__init__(f"{operation}: expected shape {expected}, got {actual}")


class NumericalInstabilityError(RTRIMimoError):
    """Raised when an evaluation loses too much precision to be trusted."""

    def __init__(
        self,
        message: str,
        p: Optional[int] = None,
        q: Optional[int] = None,
        rho_eff: Optional[float] = None,
        condition: Optional[float] = None,
        t_p: Optional[int] = None,
    ):
        self.p = p
        self.q = q
        self.rho_eff = rho_eff
        self.condition = condition
        self.t_p = t_p

        msg = f"Numerical instability: {message}"
        context = []
        if p is not None and q is not None:
            context.append(f"(p, q) = ({p}, {q})")
        if rho_eff is not None:
            context.append(f"rho_eff = {rho_eff:.6g}")
        if condition is not None:
            context.append(f"condition = {condition:.3g}")
        if t_p is not None:
            context.append(f"t_p = {t_p}")
        if context:
            msg += "\n  " + ", ".join(context)

        if p is not None:
            msg += "\n\nTroubleshooting:"
            msg += "\n  • Keep antenna counts at desk scale (min/max of N_t, N_r at most 8)"
            msg += "\n  • Cross-check the operating point with the Monte-Carlo oracle (mc_rate)"

        super().__init__(msg)


class ConfigurationError(RTRIMimoError):
    """Raised when configuration is invalid."""

    def __init__(self, message: str, config_file: Optional[str] = None):
        self.config_file = config_file

        msg = f"Configuration error: {message}"

        if config_file:
            msg += f"\nConfig file: {config_file}"

        msg += "\n\nTroubleshooting:"
        msg += "\n  • Verify JSON/YAML syntax is correct"
        msg += "\n  • Field names must match ExperimentSpec (config, snr_grid_db, delta_list, ...)"
        msg += "\n  • Check RTRIMIMO_* environment variables"

        super().__init__(msg)


class SpecValidationError(RTRIMimoError):
    """Raised when an experiment specification violates its invariants."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)

        msg = f"Invalid experiment specification ({len(self.violations)} violation(s)):"
        for violation in self.violations:
            msg += f"\n  • {violation}"

        super().__init__(msg)


class OutputError(RTRIMimoError):
    """Raised when result files cannot be written."""

    def __init__(self, path: str, original_error: Exception):
        self.path = path
        self.original_error = original_error

        msg = f"Failed to write {path}: {original_error}"

        error_str = str(original_error).lower()
        if "permission" in error_str or "denied" in error_str:
            msg += "\n\nTroubleshooting:"
            msg += "\n  • Check directory permissions"
            msg += "\n  • Choose another directory with --out"
        elif "no such file" in error_str:
            msg += "\n\nTroubleshooting:"
            msg += "\n  • Verify the parent directory exists"

        super().__init__(msg)

"""Special functions and stable summation for the closed-form rate.

Only the cases the rate expression needs are covered: integer orders a <= 0
of the upper incomplete Gamma function at positive real arguments, the
exponential integral E1, log-factorials, and sums of signed terms held in
log form.
"""

import math
from typing import Iterable, List, NamedTuple, Sequence

from scipy.special import gammaln

from rtrimimo.exceptions import DomainError

EULER_GAMMA = 0.57721566490153286061

# Largest n with n! finite in double precision.
MAX_DIRECT_FACTORIAL = 170

_LOG_FACTORIALS = tuple(math.log(math.factorial(n)) for n in range(MAX_DIRECT_FACTORIAL + 1))

# Series below, continued fraction above.
E1_SWITCHOVER = 1.0

_EPS = 1.0e-16
_FPMIN = 1.0e-300
_MAX_ITERATIONS = 10000


class SignedLogValue(NamedTuple):
    """A real number stored as (ln|x|, sign(x)).

    A sign of 0 means the value is exactly zero and ``log_magnitude`` is
    ignored.
    """

    log_magnitude: float
    sign: int

    @classmethod
    def encode(cls, x: float) -> "SignedLogValue":
        """Encode a finite real number."""
        if x == 0.0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    def decode(self) -> float:
        """Return the represented real number."""
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)


class LogSum(NamedTuple):
    """Result of :func:`signed_log_sum`.

    Attributes:
        total: The signed sum
        condition: sum(|terms|) / |sum(terms)|; ``inf`` on exact cancellation
    """

    total: SignedLogValue
    condition: float


def log_factorial(n: int) -> float:
    """Return ln(n!).

    Uses a table of exact integer factorials up to 170! and log-gamma beyond.
    """
    if n < 0:
        raise DomainError("log_factorial", "n", n, "n must be a non-negative integer")
    if n <= MAX_DIRECT_FACTORIAL:
        return _LOG_FACTORIALS[n]
    return float(gammaln(n + 1.0))


def _e1_series(x: float) -> float:
    """E1(x) = -gamma - ln x - sum_k (-x)^k / (k k!), for 0 < x <= 1."""
    total = 0.0
    term = 1.0
    for k in range(1, _MAX_ITERATIONS):
        term *= -x / k
        contribution = term / k
        total += contribution
        if abs(contribution) < abs(total) * _EPS:
            break
    return -EULER_GAMMA - math.log(x) - total


def _scaled_gamma_continued_fraction(a: int, x: float) -> float:
    """e^x * Gamma(a, x) by the modified Lentz method.

    Legendre's continued fraction; converges for every x > 0 and is fast for
    x > 1, which is the only region it is used in.
    """
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITERATIONS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < _EPS:
            break
    return math.pow(x, a) * h


def exp_integral_e1(x: float) -> float:
    """Exponential integral E1(x) = integral from x to inf of e^-t / t dt.

    Args:
        x: Positive real argument

    Returns:
        E1(x); underflows to 0.0 for very large x

    Raises:
        DomainError: If x <= 0
    """
    if not x > 0.0:
        raise DomainError("exp_integral_e1", "x", x, "E1 is only defined here for x > 0")
    if x <= E1_SWITCHOVER:
        return _e1_series(x)
    return math.exp(-x) * _scaled_gamma_continued_fraction(0, x)


def scaled_upper_gamma_sequence(depth: int, x: float) -> List[float]:
    """Return [e^x Gamma(0, x), e^x Gamma(-1, x), ..., e^x Gamma(-depth, x)].

    For x <= 1 the values come from the downward recurrence
    Gamma(a-1, x) = (x^(a-1) e^-x - Gamma(a, x)) / (1 - a), started from the
    E1 series and carried in scaled form. For x > 1 each order is read from
    the continued fraction directly.
    """
    if not x > 0.0:
        raise DomainError("scaled_upper_gamma_nonpos", "x", x, "x must be positive")
    if depth < 0:
        raise DomainError("scaled_upper_gamma_nonpos", "a", -depth, "order must be <= 0")

    if x > E1_SWITCHOVER:
        return [_scaled_gamma_continued_fraction(-k, x) for k in range(depth + 1)]

    values = [math.exp(x) * _e1_series(x)]
    for k in range(1, depth + 1):
        a = -k + 1
        # scaled form: e^x * x^(a-1) e^-x = x^(a-1)
        values.append((math.pow(x, a - 1) - values[-1]) / (1 - a))
    return values


def scaled_upper_gamma_nonpos(a: int, x: float) -> float:
    """Return e^x * Gamma(a, x) for integer a <= 0 and x > 0.

    The product is evaluated as one quantity so that neither factor
    overflows; x up to 1e6 is safe.

    Raises:
        DomainError: If a > 0 or x <= 0
    """
    if a > 0:
        raise DomainError("scaled_upper_gamma_nonpos", "a", a, "order must be a non-positive integer")
    if not x > 0.0:
        raise DomainError("scaled_upper_gamma_nonpos", "x", x, "x must be positive")
    if x > E1_SWITCHOVER:
        return _scaled_gamma_continued_fraction(a, x)
    return scaled_upper_gamma_sequence(-a, x)[-a]


def signed_log_sum(terms: Iterable[SignedLogValue]) -> LogSum:
    """Sum signed log-encoded terms.

    Terms are rescaled by the largest magnitude and accumulated with
    :func:`math.fsum`, so the only error left is the rounding of each
    rescaled term. Heavy cancellation is reported through
    ``LogSum.condition``, never raised.
    """
    live = [term for term in terms if term.sign != 0]
    if not live:
        return LogSum(SignedLogValue(-math.inf, 0), 1.0)

    pivot = max(term.log_magnitude for term in live)
    scaled = [term.sign * math.exp(term.log_magnitude - pivot) for term in live]

    total = math.fsum(scaled)
    magnitude = math.fsum(abs(value) for value in scaled)

    if total == 0.0:
        return LogSum(SignedLogValue(-math.inf, 0), math.inf)

    return LogSum(
        SignedLogValue(pivot + math.log(abs(total)), 1 if total > 0 else -1),
        magnitude / abs(total),
    )


def exact_det(matrix: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix by fraction-free (Bareiss) elimination.

    The empty matrix has determinant 1.
    """
    a = [[int(v) for v in row] for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    if any(len(row) != n for row in a):
        raise DomainError("exact_det", "matrix", f"{n} rows of unequal length", "matrix must be square")

    sign = 1
    previous = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // previous
        previous = a[k][k]
    return sign * a[n - 1][n - 1]

class UsageError(ValueError):
    """Invalid arguments: bad dimensions, out-of-range values, non-primes."""


class BudgetError(RuntimeError):
    """A computation would exceed its configured sieve or enumeration budget."""

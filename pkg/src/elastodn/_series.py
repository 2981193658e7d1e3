"""Truncated Taylor-series arithmetic on coefficient arrays.

Series are numpy arrays t with t[k] = f^(k)(s0)/k!.  All operations
truncate to the shorter operand unless a length is forced.  Used by the
reconstruction module to differentiate the probe formulas analytically.
"""

import numpy as np
from math import factorial


def from_derivatives(derivs):
    d = np.asarray(derivs, dtype=float)
    return d / np.array([factorial(k) for k in range(len(d))])


def to_derivatives(series):
    t = np.asarray(series)
    return t * np.array([factorial(k) for k in range(len(t))])


def mul(a, b, n=None):
    n = min(len(a), len(b)) if n is None else n
    out = np.zeros(n, dtype=np.result_type(a, b))
    for k in range(n):
        out[k] = sum(a[j] * b[k - j] for j in range(max(0, k - len(b) + 1), min(k + 1, len(a))))
    return out


def div(a, b, n=None):
    """Series quotient; leading coefficient of b must be nonzero."""
    n = min(len(a), len(b)) if n is None else n
    if b[0] == 0:
        raise ZeroDivisionError("series division by a zero-leading series")
    out = np.zeros(n, dtype=np.result_type(a, b, float))
    for k in range(n):
        acc = a[k] if k < len(a) else 0.0
        acc -= sum(out[j] * b[k - j] for j in range(k) if k - j < len(b))
        out[k] = acc / b[0]
    return out


def sqrt(a, n=None):
    """Series square root; leading coefficient must be positive."""
    n = len(a) if n is None else n
    if not a[0] > 0:
        raise ValueError("series sqrt needs a positive leading coefficient")
    out = np.zeros(n, dtype=float)
    out[0] = np.sqrt(a[0])
    for k in range(1, n):
        acc = a[k] if k < len(a) else 0.0
        acc -= sum(out[j] * out[k - j] for j in range(1, k))
        out[k] = acc / (2 * out[0])
    return out


def add(a, b, n=None):
    n = min(len(a), len(b)) if n is None else n
    out = np.zeros(n, dtype=np.result_type(a, b))
    out[: min(n, len(a))] += np.asarray(a)[:n]
    out[: min(n, len(b))] += np.asarray(b)[:n]
    return out


def constant(value, n):
    out = np.zeros(n, dtype=type(value) if isinstance(value, complex) else float)
    out[0] = value
    return out

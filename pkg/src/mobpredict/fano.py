"""Maximum predictability from an entropy value via Fano's relation

    S = H_b(P) + (1 - P) * log2(N - 1)

solved for P on [1/N, 1] where the right-hand side decreases from log2 N
to 0.
"""

from __future__ import annotations

import math

TOL = 1e-9


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def fano_rhs(p: float, n: int) -> float:
    return binary_entropy(p) + (1.0 - p) * math.log2(n - 1) if n > 1 else 0.0


def max_predictability(entropy: float, n_locations: int) -> float:
    """Largest P consistent with ``entropy`` bits over ``n_locations`` states."""
    if n_locations < 1:
        raise ValueError("need at least one location")
    if entropy < 0:
        raise ValueError("entropy must be non-negative")
    if n_locations == 1 or entropy == 0.0:
        return 1.0
    if entropy >= math.log2(n_locations):
        return 1.0 / n_locations

    lo, hi = 1.0 / n_locations, 1.0
    # residual > 0 at lo, < 0 at hi; bisect until the bracket stops shrinking
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        r = fano_rhs(mid, n_locations) - entropy
        if r == 0.0:
            return mid
        if r > 0:
            lo = mid
        else:
            hi = mid
    r_lo = abs(fano_rhs(lo, n_locations) - entropy)
    r_hi = abs(fano_rhs(hi, n_locations) - entropy)
    return lo if r_lo <= r_hi else hi

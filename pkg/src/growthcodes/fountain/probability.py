from math import exp, lgamma, log


def _log_comb(n, r):
    return lgamma(n + 1) - lgamma(r + 1) - lgamma(n - r + 1)


def symbol_decoding_probability(k, r, d):
    """Probability that a degree-``d`` symbol decodes with ``r`` symbols already decoded.

    Follows the three-case Growth-code expression; binomials go through
    log-gamma so large ``k`` does not overflow.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if not 1 <= r <= k:
        raise ValueError(f"r must lie in [1, {k}], got {r}")
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    if d == 1:
        return (k - r + 1) / k
    if d > r:
        return 0.0
    return exp(log(k - r + 1) + _log_comb(r - 1, d - 1) - _log_comb(k, d))

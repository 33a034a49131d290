"""Batched real-root extraction for small polynomials.

Coefficient arrays follow the ``numpy.polyval`` convention (highest degree
first) and carry a leading batch axis, so ``coeffs[k]`` is one polynomial.
The leading coefficient must be the same nonzero structure across the batch;
callers build polynomials whose degree does not depend on the batch data.
"""

import numpy as np

IMAG_TOL = 1e-6


def polyval(coeffs, t):
    """Evaluate row-wise polynomials ``coeffs`` (N, d+1) at ``t`` (N, k)."""
    out = np.zeros_like(t)
    for j in range(coeffs.shape[1]):
        out = out * t + coeffs[:, j, None]
    return out


def _polish(coeffs, t, iterations=3):
    deriv = coeffs[:, :-1] * np.arange(coeffs.shape[1] - 1, 0, -1)
    for _ in range(iterations):
        f = polyval(coeffs, t)
        df = polyval(deriv, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(np.abs(df) > 1e-300, f / df, 0.0)
        # only accept steps that do not blow up near multiple roots
        step = np.where(np.abs(step) < 1e-3 * (1.0 + np.abs(t)), step, 0.0)
        t = t - step
    return t


def _cubic(C):
    """Closed-form real roots of cubics (trigonometric form for three roots)."""
    a = C[:, 0]
    b, c, d = C[:, 1] / a, C[:, 2] / a, C[:, 3] / a
    shift = b / 3.0
    p = c - b * shift
    q = 2.0 * shift ** 3 - c * shift + d
    half = 0.5 * q
    third = p / 3.0
    disc = half * half + third ** 3
    scale = half * half + np.abs(third) ** 3
    # near-zero discriminants are treated as repeated real roots
    three = (disc <= 1e-10 * scale) & (third < 0)
    out = np.full((len(a), 3), np.nan)
    with np.errstate(invalid="ignore", divide="ignore"):
        m = 2.0 * np.sqrt(np.where(three, -third, 0.0))
        denom = np.where(three, np.sqrt(-third) ** 3, 1.0)
        # a triple root can underflow the denominator to zero
        arg = np.where(three & (denom > 0), np.clip(-half / np.where(denom > 0, denom, 1.0), -1.0, 1.0), 0.0)
        phi = np.arccos(arg) / 3.0
        for k in range(3):
            out[:, k] = np.where(three, m * np.cos(phi - 2.0 * np.pi * k / 3.0), np.nan)
        sq = np.sqrt(np.clip(disc, 0.0, None))
        single = np.cbrt(-half + sq) + np.cbrt(-half - sq)
    out[:, 0] = np.where(three, out[:, 0], single)
    return out - shift[:, None]


def real_roots(coeffs):
    """Real roots of each row of ``coeffs``.

    Returns an array of shape (N, d) padded with NaN where a root is not
    real.  Roots whose imaginary part is tiny relative to their modulus are
    kept (tangential contacts produce such pairs); downstream membership
    tests decide whether the corresponding point is genuine.
    """
    C = np.atleast_2d(np.asarray(coeffs, dtype=float))
    n = C.shape[0]
    while C.shape[1] > 1 and not np.any(C[:, 0]):
        C = C[:, 1:]
    d = C.shape[1] - 1
    if d <= 0:
        return np.empty((n, 0))
    lead = C[:, 0]
    if np.any(lead == 0.0):
        raise ValueError("leading coefficient vanishes on part of the batch")
    if d == 1:
        return (-C[:, 1] / lead)[:, None]
    if d == 2:
        a, b, c = C[:, 0], C[:, 1], C[:, 2]
        disc = b * b - 4.0 * a * c
        scale = b * b + np.abs(4.0 * a * c)
        ok = disc >= -IMAG_TOL * scale
        sq = np.sqrt(np.clip(disc, 0.0, None))
        qq = -0.5 * (b + np.where(b >= 0, sq, -sq))
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = qq / a
            r2 = np.where(qq != 0.0, c / qq, r1)
        out = np.stack([r1, r2], axis=1)
        out[~ok] = np.nan
        return out
    if d == 3:
        return _polish(C, _cubic(C))
    comp = np.zeros((n, d, d))
    comp[:, 0, :] = -C[:, 1:] / lead[:, None]
    idx = np.arange(d - 1)
    comp[:, idx + 1, idx] = 1.0
    eig = np.linalg.eigvals(comp)
    re = eig.real
    keep = np.abs(eig.imag) <= IMAG_TOL * (1.0 + np.abs(re))
    t = _polish(C, np.where(keep, re, 0.0))
    return np.where(keep, t, np.nan)

"""Special functions and quadrature used by the outage analysis.

Only what the relay outage formulas need is provided: the modified Bessel
function K1, the integer-order lower incomplete gamma function (real argument
of either sign), and an adaptive Gauss-Kronrod rule that copes with a
logarithmic singularity at the lower endpoint.

All functions are pure and hold no shared state.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

EULER_GAMMA = 0.577215664901532860

# 7-point Gauss / 15-point Kronrod pair (QUADPACK qk15), positive half.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-node layout on [-1, 1]
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS_W = np.zeros(15)
_GAUSS_W[1:7:2] = _WG[:3]
_GAUSS_W[7] = _WG[3]
_GAUSS_W[9:15:2] = _WG[:3][::-1]

_K1_SERIES_MAX = 2.0
_EPS = np.finfo(float).eps


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature ran out of subdivisions before meeting tolerance.

    The best estimate and its error bound are kept on the exception.
    """

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be > 0")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be a positive integer")


DEFAULT_QUADRATURE = QuadratureSpec()


def _as_positive_array(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} must be > 0")
    return arr


def _unwrap(arr):
    return float(arr) if arr.ndim == 0 else arr


def _k1_series(x):
    # ascending series: 1/x + sum (x/2)^(2l+1)/(l!(l+1)!) [ln(x/2) + C - (H_l + H_{l+1})/2]
    half = 0.5 * x
    w = half * half
    log_half = np.log(half)
    coeff = half.copy()
    h_l, h_next = 0.0, 1.0
    total = 1.0 / x
    for l in range(60):
        term = coeff * (log_half + EULER_GAMMA - 0.5 * (h_l + h_next))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
        coeff = coeff * w / ((l + 1) * (l + 2))
        h_l = h_next
        h_next = h_next + 1.0 / (l + 2)
    return total


def _k1_continued_fraction(x):
    # Steed's method (Temme's CF2) for K0 and K1, valid for x >= 2.
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 10000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels) < _EPS * np.abs(s)):
            break
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) / s
    return k0 * (x + 0.5 - h) / x


def bessel_k1(x):
    """Modified Bessel function of the second kind, order one.

    Uses the ascending logarithmic series for ``x <= 2`` and Steed's
    continued fraction above. Accepts scalars or arrays.

    Raises
    ------
    DomainError
        If any ``x <= 0``.
    """
    arr = _as_positive_array(x)
    flat = np.atleast_1d(arr)
    out = np.empty_like(flat)
    small = flat <= _K1_SERIES_MAX
    if np.any(small):
        out[small] = _k1_series(flat[small])
    if np.any(~small):
        out[~small] = _k1_continued_fraction(flat[~small])
    return _unwrap(out.reshape(arr.shape))


def one_minus_xk1(x):
    """``1 - x*K1(x)`` without cancellation for small ``x``.

    The value tends to 0 as ``x -> 0+`` like ``-(x/2)^2 ln (x/2)^2``.
    ``x = 0`` is accepted and yields 0.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr >= 0)):
        raise DomainError("x must be >= 0")
    flat = np.atleast_1d(arr)
    out = np.zeros_like(flat)
    small = (flat > 0) & (flat <= _K1_SERIES_MAX)
    if np.any(small):
        xs = flat[small]
        w = 0.25 * xs * xs
        log_w = np.log(w)
        coeff = w.copy()
        h_l, h_next = 0.0, 1.0
        total = np.zeros_like(xs)
        for l in range(60):
            term = coeff * (log_w + 2.0 * EULER_GAMMA - h_l - h_next)
            total = total - term
            if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
                break
            coeff = coeff * w / ((l + 1) * (l + 2))
            h_l = h_next
            h_next = h_next + 1.0 / (l + 2)
        out[small] = total
    large = flat > _K1_SERIES_MAX
    if np.any(large):
        xl = flat[large]
        out[large] = 1.0 - xl * _k1_continued_fraction(xl)
    return _unwrap(out.reshape(arr.shape))


def _check_order(s):
    if int(s) != s or s < 1:
        raise DomainError(f"order s must be a positive integer, got {s!r}")
    return int(s)


def _series_threshold(s):
    return 2 * s + 10


def _exp_partial_sum(s, x):
    """``e^{-x} sum_{k<s} x^k/k!`` for x > 0, evaluated term-wise in log space."""
    log_x = math.log(x)
    return math.fsum(math.exp(k * log_x - x - math.lgamma(k + 1)) for k in range(s))


def lower_incomplete_gamma(s: int, x: float) -> float:
    """Lower incomplete gamma ``gamma(s, x) = int_0^x t^(s-1) e^(-t) dt``.

    For integer ``s`` this is ``(s-1)! (1 - e^{-x} sum_{k<s} x^k/k!)``,
    which stays real for negative ``x``. The finite form is used where it is
    well conditioned; near the origin, where it cancels, the equivalent
    convergent series with same-signed terms is summed instead.
    """
    s = _check_order(s)
    x = float(x)
    if x == 0.0:
        return 0.0
    if abs(x) >= _series_threshold(s):
        fact = math.factorial(s - 1)
        if x > 0:
            return fact * (1.0 - _exp_partial_sum(s, x))
        partial = math.fsum(x ** k / math.factorial(k) for k in range(s))
        if -x > 709.0:
            return math.copysign(math.inf, (-1.0) ** s)
        return fact * (1.0 - math.exp(-x) * partial)
    if x > 0:
        # x^s e^{-x} sum_k x^k / (s (s+1) ... (s+k))
        term = 1.0 / s
        total = term
        k = 0
        while term > 1e-17 * total:
            k += 1
            term *= x / (s + k)
            total += term
        return x ** s * math.exp(-x) * total
    # x < 0: x^s sum_k |x|^k / (k! (s+k)), all terms share a sign
    y = -x
    total = 0.0
    coeff = 1.0
    k = 0
    while True:
        term = coeff / (s + k)
        total += term
        if term <= 1e-17 * total:
            break
        k += 1
        coeff *= y / k
    return x ** s * total


def scaled_gamma_moment(s: int, y: float) -> float:
    """``int_0^1 t^(s-1) exp(y t - max(y, 0)) dt``.

    Equals ``gamma(s, -y) / (-y)^s`` times ``e^{-y}`` when ``y > 0``. The
    exponential scaling keeps the value in ``(0, 1/s]`` for any real ``y``,
    and ``y = 0`` gives exactly ``1/s``.
    """
    s = _check_order(s)
    y = float(y)
    if y == 0.0:
        return 1.0 / s
    big = abs(y) >= _series_threshold(s)
    if y < 0:
        x = -y
        if big:
            return math.exp(math.lgamma(s) - s * math.log(x)) * (1.0 - _exp_partial_sum(s, x))
        term = 1.0 / s
        total = term
        k = 0
        while term > 1e-17 * total:
            k += 1
            term *= x / (s + k)
            total += term
        return math.exp(-x) * total
    if big:
        # (s-1)! [e^{-y} (-y)^{-s} - sum_{k<s} (-y)^{k-s} / k!]
        log_fact = math.lgamma(s)
        log_y = math.log(y)
        head = (-1) ** s * math.exp(log_fact - y - s * log_y)
        tail = math.fsum(
            (-1) ** (s - k) * math.exp(log_fact - math.lgamma(k + 1) + (k - s) * log_y)
            for k in range(s)
        )
        return head - tail
    total = 0.0
    coeff = 1.0
    k = 0
    while True:
        term = coeff / (s + k)
        total += term
        if term <= 1e-17 * total:
            break
        k += 1
        coeff *= y / k
    return math.exp(-y) * total


def _gk15(f, a, b):
    """Kronrod and Gauss estimates plus QUADPACK-style error for many intervals."""
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = centre[:, None] + half[:, None] * _NODES[None, :]
    vals = np.asarray(f(pts.ravel()), dtype=float).reshape(pts.shape)
    kron = vals @ _KRONROD_W
    gauss = vals @ _GAUSS_W
    mean = 0.5 * kron
    resasc = np.abs(vals - mean[:, None]) @ _KRONROD_W
    err = np.abs(kron - gauss)
    scaled = np.where(resasc > 0, resasc * np.minimum(1.0, (200.0 * err / np.where(resasc > 0, resasc, 1.0)) ** 1.5), err)
    return kron * half, scaled * np.abs(half)


def quad_log_endpoint(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    grading: int = 12,
) -> float:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[lo, hi]``.

    ``f`` is called with 1-D arrays and must be vectorised. The rule is open,
    so ``f`` is never evaluated at either endpoint; the starting mesh is
    graded geometrically toward ``lo`` so an integrable logarithmic
    singularity there is resolved cheaply.

    Raises
    ------
    QuadratureError
        If ``spec.max_subdivisions`` intervals are used without reaching
        ``max(abs_tol, rel_tol * |result|)``.
    """
    lo = float(lo)
    hi = float(hi)
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    width = hi - lo
    cuts = [lo] + [lo + width * 2.0 ** (-k) for k in range(grading, 0, -1)] + [hi]
    edges = np.array(sorted(set(cuts)))
    a, b = edges[:-1], edges[1:]
    vals, errs = _gk15(f, a, b)
    # heap of (-error, left, right, value)
    heap = [(-e, l, r, v) for l, r, v, e in zip(a, b, vals, errs)]
    heapq.heapify(heap)
    n_intervals = len(heap)
    while True:
        total = math.fsum(item[3] for item in heap)
        total_err = math.fsum(-item[0] for item in heap)
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if total_err <= tol:
            return total
        if n_intervals >= spec.max_subdivisions:
            raise QuadratureError("subdivision budget exhausted", total, total_err)
        # bisect the worst intervals in one vectorised batch
        budget = spec.max_subdivisions - n_intervals
        share = tol / max(n_intervals, 1)
        batch = []
        while heap and len(batch) < budget and (not batch or -heap[0][0] > share):
            batch.append(heapq.heappop(heap))
        left = np.array([item[1] for item in batch])
        right = np.array([item[2] for item in batch])
        mid = 0.5 * (left + right)
        if np.any((mid <= left) | (mid >= right)):
            for item in batch:
                heapq.heappush(heap, item)
            total = math.fsum(item[3] for item in heap)
            raise QuadratureError("interval width underflow", total, math.fsum(-i[0] for i in heap))
        na = np.concatenate([left, mid])
        nb = np.concatenate([mid, right])
        nv, ne = _gk15(f, na, nb)
        for l, r, v, e in zip(na, nb, nv, ne):
            heapq.heappush(heap, (-e, l, r, v))
        n_intervals += len(batch)


def h_l_integral(
    l: int,
    decay_rate: float,
    r0: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    *,
    scale_exponent: float = 0.0,
) -> float:
    """``int_0^r0 exp(-decay_rate*t) t^(l+1) ln t dt``, times ``exp(-scale_exponent)``.

    The scale factor is folded into the integrand's exponent so callers can
    keep results in range when ``r0`` is large or the decay is negative.
    """
    if int(l) != l or l < 0:
        raise DomainError(f"l must be a non-negative integer, got {l!r}")
    if not r0 > 0:
        raise DomainError("r0 must be > 0")
    power = l + 1

    def integrand(t):
        return np.exp(power * np.log(t) - decay_rate * t - scale_exponent) * np.log(t)

    return quad_log_endpoint(integrand, 0.0, r0, spec)

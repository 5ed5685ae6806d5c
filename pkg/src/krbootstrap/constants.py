"""Threshold constants of the K_r-dynamics.

Exact values (``Fraction`` / ``int``) for lambda, the Fuss-Catalan numbers
and alpha_d; floats only where a root is taken: gamma, p_c, rho, the
Fuss-Catalan generating function f and the droplet scale L.

    lambda  = (C(r,2) - 2) / (r - 2)
    d       = C(r,2) - 2
    FC_d(k) = C((d+1)k, k) / (dk + 1)
    alpha_d = (d+1)^(d+1) / d^d,   beta_d = sqrt((d+1) / (2 pi d^3))
    (r-2)! gamma^(r-2) = alpha_d,  p_c(n) = (gamma n)^(-1/lambda)
    rho: smallest root > 1 of rho^(C(r,2)-1) = abar (rho - 1)
    f:   x f^(d+1) = f - 1, the smaller root, f(0) = 1
    L  = (n p^(r-2))^(-1/(r-3))
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

REL_TOL = 1e-12


def _check_r(r: int, low: int = 3) -> None:
    if r < low:
        raise ValueError(f"r must be at least {low}, got {r}")


def lam(r: int) -> Fraction:
    _check_r(r)
    return Fraction(math.comb(r, 2) - 2, r - 2)


def fc_degree(r: int) -> int:
    """d = C(r,2) - 2; TWG roots have d + 1 = C(r,2) - 1 children."""
    _check_r(r)
    return math.comb(r, 2) - 2


def fuss_catalan(d: int, k: int) -> int:
    if d < 1 or k < 0:
        raise ValueError(f"need d >= 1 and k >= 0, got d={d}, k={k}")
    num = math.comb((d + 1) * k, k)
    q, rem = divmod(num, d * k + 1)
    assert rem == 0
    return q


def fuss_catalan_recurrence(d: int, kmax: int) -> list[int]:
    """FC_d(0..kmax) from FC_d(k) = sum over k_1+...+k_{d+1} = k-1 of prod FC_d(k_i)."""
    fc = [1]
    for k in range(1, kmax + 1):
        # coefficient of x^(k-1) in (sum_j fc[j] x^j)^(d+1), truncated
        power = [1] + [0] * (k - 1)
        for _ in range(d + 1):
            power = [sum(power[i] * fc[j - i] for i in range(j + 1)) for j in range(k)]
        fc.append(power[k - 1])
    return fc


def alpha(d: int) -> Fraction:
    return Fraction((d + 1) ** (d + 1), d ** d)


def beta(d: int) -> float:
    return math.sqrt((d + 1) / (2 * math.pi * d ** 3))


def gamma(r: int) -> float:
    """The unique gamma > 0 with (r-2)! gamma^(r-2) = alpha_d."""
    _check_r(r)
    if r < 5:
        warnings.warn("the threshold theorem covers r >= 5 only", stacklevel=2)
    base = alpha(fc_degree(r)) / math.factorial(r - 2)
    g = math.exp(math.log(base.numerator) / (r - 2) - math.log(base.denominator) / (r - 2))
    # one Newton step on g^(r-2) = base in exact arithmetic
    gf = Fraction(g)
    m = r - 2
    gf -= (gf ** m - base) / (m * gf ** (m - 1))
    return float(gf)


def gamma_residual(r: int) -> float:
    a = alpha(fc_degree(r))
    g = Fraction(gamma(r))
    return float(abs(math.factorial(r - 2) * g ** (r - 2) - a) / a)


def p_c(r: int, n: int) -> float:
    if n < 2:
        raise ValueError("n must be at least 2")
    return (gamma(r) * n) ** (-1.0 / float(lam(r)))


def alpha_bar(r: int, gamma_bar: float) -> float:
    return math.factorial(r - 2) * gamma_bar ** (r - 2)


def _bisect(h, lo: float, hi: float, tol: float) -> float:
    """Root of ``h`` on [lo, hi] with h(lo) > 0 >= h(hi)."""
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        v = h(mid)
        if abs(v) <= tol or hi - lo <= 4 * math.ulp(mid):
            return mid
        if v > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def rho(r: int, abar: float) -> float:
    """Smallest root > 1 of rho^(C(r,2)-1) = abar (rho - 1).

    The left side minus the right side is convex with value 1 at rho = 1, so
    the first sign change met when scanning upward brackets the smallest root.
    """
    _check_r(r)
    d = fc_degree(r)
    a = alpha(d)
    if not abar > a:
        raise ValueError(f"need abar > alpha_{d} = {float(a):.12g}, got {abar}")
    big_n = d + 1

    def g(x: float) -> float:
        return x ** big_n - abar * (x - 1.0)

    # g is minimal at (abar / N)^(1/(N-1)) and negative there
    top = (abar / big_n) ** (1.0 / (big_n - 1))
    steps = 1024
    prev = 1.0
    for i in range(1, steps + 1):
        x = 1.0 + (top - 1.0) * i / steps
        if g(x) <= 0:
            return _bisect(g, prev, x, REL_TOL * abar)
        prev = x
    raise ArithmeticError("no sign change found below the minimiser")


def rho_from_gamma_bar(r: int, gamma_bar: float) -> float:
    g = gamma(r)
    if not gamma_bar > g:
        raise ValueError(f"need gamma_bar > gamma = {g:.12g}, got {gamma_bar}")
    return rho(r, alpha_bar(r, gamma_bar))


def rho_residual(r: int, abar: float, value: float) -> float:
    return abs(value ** (math.comb(r, 2) - 1) - abar * (value - 1.0))


def fc_generating_value(d: int, x: float) -> float:
    """f(x) = sum_k FC_d(k) x^k, as the smaller root of x f^(d+1) = f - 1."""
    if d < 1:
        raise ValueError("d must be at least 1")
    limit = 1 / alpha(d)
    if not (0.0 <= x) or Fraction(x) > limit:
        raise ValueError(f"x must lie in [0, 1/alpha_{d}] = [0, {float(limit):.12g}], got {x}")
    if x == 0.0:
        return 1.0

    def h(f: float) -> float:
        return x * f ** (d + 1) - f + 1.0

    top = (1.0 / ((d + 1) * x)) ** (1.0 / d)
    if h(top) > 0:
        # x within rounding of the radius: the two roots merge at the minimiser
        return top
    return _bisect(h, 1.0, top, 0.0)


def fc_series(d: int, x: float, terms: int = 40) -> float:
    return math.fsum(fuss_catalan(d, k) * x ** k for k in range(terms + 1))


def droplet_scale(r: int, n: int, p: float) -> float:
    if r <= 4:
        raise ValueError("the droplet scale is defined for r >= 5")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    return (n * p ** (r - 2)) ** (-1.0 / (r - 3))


@dataclass(frozen=True)
class ThresholdConstants:
    r: int
    lam: Fraction
    d: int
    alpha: Fraction
    beta: float
    gamma: float

    @classmethod
    def of(cls, r: int) -> "ThresholdConstants":
        d = fc_degree(r)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            g = gamma(r)
        return cls(r, lam(r), d, alpha(d), beta(d), g)

    def p_c(self, n: int) -> float:
        return (self.gamma * n) ** (-1.0 / float(self.lam))

    def droplet_scale(self, n: int, p: float) -> float:
        return droplet_scale(self.r, n, p)

    def rho(self, gamma_bar: float) -> float:
        return rho_from_gamma_bar(self.r, gamma_bar)

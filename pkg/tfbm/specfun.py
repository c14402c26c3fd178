"""Special functions used by the closed-form variance scales.

Gamma and Bessel K come from scipy.special; the hypergeometric and
Mittag-Leffler series are summed here because their truncation rules are
part of the accuracy contract of the covariance module.
"""
import math

import mpmath
from scipy import special

from tfbm import settings
from tfbm.errors import ConvergenceError, DomainError, PoleError

__all__ = [
    'gamma_fn',
    'pochhammer',
    'bessel_k',
    'tempered_bessel_series',
    'hyp_2f3',
    'hyp_2f3_tail',
    'mittag_leffler_3p',
]

logger = settings.logger


def _is_nonpositive_integer(x):
    return x <= 0 and float(x).is_integer()


def gamma_fn(x):
    if _is_nonpositive_integer(x):
        raise PoleError(f'Gamma function has a pole at x={x}')
    return float(special.gamma(x))


def pochhammer(a, n):
    """Rising factorial (a)_n = a(a+1)...(a+n-1) with (a)_0 = 1.

    Evaluated as a direct product so that terminating factors (negative
    integer a) give an exact zero.
    """
    if n < 0 or int(n) != n:
        raise DomainError(f'Pochhammer index must be a non-negative integer, got {n}')
    return math.prod((float(a) + k for k in range(int(n))), start=1.0)


def bessel_k(nu, x):
    """Modified Bessel function of the second kind, K_nu(x) for x > 0."""
    if not x > 0:
        raise DomainError(f'Bessel K requires x > 0, got x={x}')
    # K_{-nu} = K_nu
    return float(special.kv(abs(nu), x))


def _sum_series(first, next_term, what):
    """Sum a power series from its first term and a term recurrence.

    Stops once SERIES_WINDOW consecutive terms stay below SERIES_TOL of the
    running partial sum; the final value is an fsum of all kept terms.
    """
    terms = [first]
    partial = first
    term = first
    quiet = 0
    for k in range(settings.SERIES_MAX_TERMS):
        term = next_term(k, term) if term != 0.0 else 0.0
        terms.append(term)
        partial += term
        if abs(term) <= settings.SERIES_TOL * abs(partial):
            quiet += 1
            if quiet >= settings.SERIES_WINDOW:
                logger.debug('%s converged after %d terms', what, k + 1)
                return math.fsum(terms)
        else:
            quiet = 0
    raise ConvergenceError(f'{what} did not converge within {settings.SERIES_MAX_TERMS} terms')


def tempered_bessel_series(H, x):
    """2 Gamma(2H) (2x)^(-2H) - 2 Gamma(H + 1/2) K_H(x) (2x)^(-H) / sqrt(pi) by power series.

    K_H is expanded over I_H and I_{-H}. The leading I_{-H} term equals the
    first summand exactly and both are dropped, which keeps small x free of
    cancellation. H must not be an integer.
    """
    if float(H).is_integer():
        raise PoleError(f'Bessel series needs a non-integer order, got H={H}')
    z = x * x / 4
    sine = math.sin(math.pi * H)
    regular = _sum_series(float(special.rgamma(H + 1)),
                          lambda k, term: term * z / ((k + 1) * (k + 1 + H)), 'I_H series')
    singular = _sum_series(float(special.rgamma(2 - H)),
                           lambda k, term: term * z / ((k + 2) * (k + 2 - H)), 'I_-H series')
    c = math.sqrt(math.pi) * gamma_fn(H + 0.5) / sine
    return c * (4 ** (-H) * regular - x ** (2 - 2 * H) / 4 * singular)


def _check_2f3(a_s, b_s):
    for b in b_s:
        if _is_nonpositive_integer(b):
            # harmless only when some numerator parameter cuts the series first
            if not any(_is_nonpositive_integer(a) and a > b for a in a_s):
                raise PoleError(f'2F3 lower parameter {b} is a non-positive integer')


def _series_2f3(a1, a2, b1, b2, b3, z, start):
    _check_2f3((a1, a2), (b1, b2, b3))

    def next_term(k, term):
        n = k + start
        return term * (a1 + n) * (a2 + n) / ((b1 + n) * (b2 + n) * (b3 + n)) * z / (n + 1)

    if start == 0:
        first = 1.0
    else:
        first = a1 * a2 / (b1 * b2 * b3) * z
    return _sum_series(first, next_term, '2F3')


def hyp_2f3(a1, a2, b1, b2, b3, z):
    """Generalised hypergeometric function 2F3({a1, a2}, {b1, b2, b3}, z)."""
    return _series_2f3(a1, a2, b1, b2, b3, z, start=0)


def hyp_2f3_tail(a1, a2, b1, b2, b3, z):
    """2F3 minus its leading 1, summed without forming 1 + (...) first."""
    return _series_2f3(a1, a2, b1, b2, b3, z, start=1)


def mittag_leffler_3p(alpha, beta, delta, z):
    """Three-parameter Mittag-Leffler function E^delta_{alpha,beta}(z).

    Power series for z >= -ML_Z_SWITCH; below that the alternating series
    cancels catastrophically and a closed or extended-precision
    representation is used instead.
    """
    if not alpha > 0 or not beta > 0:
        raise DomainError(f'Mittag-Leffler requires alpha > 0 and beta > 0, got alpha={alpha}, beta={beta}')
    if z == 0:
        return 1.0 / gamma_fn(beta)
    if z < -settings.ML_Z_SWITCH:
        return _mittag_leffler_negative(alpha, beta, delta, z)
    if alpha == 1 and z < 0 and beta - delta >= 0:
        # Kummer: E^d_{1,b}(z) = e^z E^{b-d}_{1,b}(-z), a series of positive terms
        return math.exp(z) * mittag_leffler_3p(1, beta, beta - delta, -z)

    if alpha == 1:
        def ratio(k):
            return 1.0 / (k + beta)
    else:
        def ratio(k):
            return math.exp(special.gammaln(alpha * k + beta) - special.gammaln(alpha * (k + 1) + beta))

    def next_term(k, term):
        return term * (delta + k) * z / (k + 1) * ratio(k)

    return _sum_series(1.0 / gamma_fn(beta), next_term, 'Mittag-Leffler')


def _incomplete_gamma_star(s, x):
    # Tricomi's entire incomplete gamma x^{-s} P(s, x), s > 0
    return x ** -s * special.gammainc(s, x)


def _mittag_leffler_negative(alpha, beta, delta, z):
    x = -z
    if alpha == 1 and delta > -1 and math.isclose(beta, delta + 2, rel_tol=0.0, abs_tol=1e-12):
        # E^d_{1,d+2}(-x) = (x - d) g*(d+1, x) + e^{-x} / Gamma(d+1)
        return float((x - delta) * _incomplete_gamma_star(delta + 1, x)
                     + math.exp(-x) / gamma_fn(delta + 1))

    if alpha == 1:
        # Kummer form: E^d_{1,b}(z) = 1F1(d; b; z) / Gamma(b)
        with mpmath.workdps(settings.EXTRA_DIGITS):
            return float(mpmath.hyp1f1(delta, beta, z) / mpmath.gamma(beta))

    # the largest series term is about exp(x^{1/alpha}); carry enough digits to absorb it
    digits = settings.EXTRA_DIGITS + int(x ** (1.0 / alpha) / math.log(10)) + 1
    with mpmath.workdps(digits):
        z = mpmath.mpf(z)
        total = term = 1 / mpmath.gamma(beta)
        eps = mpmath.mpf(10) ** (-settings.EXTRA_DIGITS)
        quiet = 0
        for k in range(1, settings.SERIES_MAX_TERMS):
            term = mpmath.rf(delta, k) * z ** k / (mpmath.factorial(k) * mpmath.gamma(alpha * k + beta))
            total += term
            if abs(term) <= eps * abs(total):
                quiet += 1
                if quiet >= settings.SERIES_WINDOW:
                    return float(total)
            else:
                quiet = 0
    raise ConvergenceError('Mittag-Leffler extended-precision series did not converge')

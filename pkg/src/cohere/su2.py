"""SU(2) coherent states, their products, and angular-momentum recoupling.

A spin-j coherent state is the group orbit of the lowest-weight vector
|j,-j>, labeled by a complex stereographic parameter zeta:

    |j,zeta> = sum_m [ (2j)! / ((j+m)!(j-m)!) ]^(1/2)
               * zeta^(j+m) / (1+|zeta|^2)^j  |j,m>

The sphere coordinates map to the parameter via
zeta = -tan(theta/2) exp(-i phi).  Note the orientation, measured from the
amplitudes rather than assumed: the spin expectation of |j, zeta(theta,phi)>
is <J>/j = -(sin theta cos phi, sin theta sin phi, cos theta), i.e. the
state points at the antipode of (theta, phi).  The pole theta = pi has no
finite parameter and is rejected.

Pairs of such states form the degenerate-level factor for hydrogen, where
the level-n multiplet carries two commuting spins of j = (n-1)/2; the
change of basis to |l, m> labels goes through Clebsch-Gordan coefficients
in the Condon-Shortley phase convention.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln


def _check_two_j(j: float, name: str = "j") -> int:
    two_j = round(2 * j)
    if abs(2 * j - two_j) > 1e-9 or two_j < 0:
        raise ValueError(f"{name} must be a nonnegative half-integer, got {j}")
    return two_j


@dataclass(frozen=True)
class SpinParam:
    """A stereographic parameter together with its spin length."""

    zeta: complex
    j: float

    def __post_init__(self):
        _check_two_j(self.j)
        if not (math.isfinite(self.zeta.real) and math.isfinite(self.zeta.imag)):
            raise ValueError("zeta must be finite")


@dataclass(frozen=True)
class AngularParams:
    """The pair of stereographic parameters fixing the two spin factors."""

    zeta1: complex
    zeta2: complex

    def __post_init__(self):
        for z in (self.zeta1, self.zeta2):
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise ValueError("angular parameters must be finite")


@dataclass(frozen=True)
class AngularAmplitudes:
    """Two-spin product amplitudes for one level.

    ``amplitudes[k1, k2]`` is the coefficient of |j, -j+k1> |j, -j+k2>
    with j = (n-1)/2.
    """

    n: int
    amplitudes: np.ndarray

    @property
    def j(self) -> float:
        return (self.n - 1) / 2.0

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def _log1p_abs_sq(zeta: complex) -> float:
    """ln(1 + |zeta|^2), stable for very large |zeta|."""
    r = abs(zeta)
    if r < 1e8:
        return math.log1p(r * r)
    return 2.0 * math.log(r) + math.log1p(1.0 / (r * r))


def su2_amplitudes(j: float, zeta: complex) -> np.ndarray:
    """Amplitude vector of |j,zeta> over m = -j .. j (index k = j + m).

    Binomial square roots go through log-gamma so the result stays finite
    for large j and extreme |zeta|; the vector is unit-norm by
    construction, not renormalized.
    """
    two_j = _check_two_j(j)
    k = np.arange(two_j + 1)
    zeta = complex(zeta)
    if zeta == 0:
        amps = np.zeros(two_j + 1, dtype=complex)
        amps[0] = 1.0
        return amps
    log_binom_sqrt = 0.5 * (
        gammaln(two_j + 1.0) - gammaln(k + 1.0) - gammaln(two_j - k + 1.0)
    )
    log_mag = log_binom_sqrt + k * math.log(abs(zeta)) - (two_j / 2.0) * _log1p_abs_sq(zeta)
    phase = k * cmath.phase(zeta)
    return np.exp(log_mag + 1j * phase)


def stereographic(theta: float, phi: float) -> complex:
    """Map the sphere point (theta, phi) to -tan(theta/2) exp(-i phi)."""
    if not 0.0 <= theta < math.pi:
        raise ValueError("theta must lie in [0, pi); the antipode has no finite parameter")
    return -math.tan(theta / 2.0) * cmath.exp(-1j * phi)


def su2_overlap(j: float, zeta_a: complex, zeta_b: complex) -> complex:
    """<j,zeta_a | j,zeta_b> in closed form.

    Equals [ (1 + conj(zeta_a) zeta_b)^2 /
             ((1+|zeta_a|^2)(1+|zeta_b|^2)) ]^j.
    """
    _check_two_j(j)
    cross = 1.0 + zeta_a.conjugate() * zeta_b
    if cross == 0:
        return 0.0 + 0.0j
    log_factor = (
        2.0 * cmath.log(cross) - _log1p_abs_sq(zeta_a) - _log1p_abs_sq(zeta_b)
    )
    return cmath.exp(j * log_factor)


def spin_expectation(j: float, amplitudes: np.ndarray) -> np.ndarray:
    """(<Jx>, <Jy>, <Jz>) for an amplitude vector over m = -j .. j."""
    two_j = _check_two_j(j)
    if amplitudes.shape != (two_j + 1,):
        raise ValueError("amplitude vector has wrong length")
    m = -j + np.arange(two_j + 1)
    jz = float(np.sum(m * np.abs(amplitudes) ** 2).real)
    # <J+> couples m to m+1 with weight sqrt((j-m)(j+m+1))
    ladder = np.sqrt((j - m[:-1]) * (j + m[:-1] + 1.0))
    jp = np.sum(np.conj(amplitudes[1:]) * amplitudes[:-1] * ladder)
    return np.array([jp.real, jp.imag, jz])


def so4_amplitudes(n: int, params: AngularParams) -> AngularAmplitudes:
    """Product state of two spin-(n-1)/2 coherent states at level n."""
    if n < 1:
        raise ValueError("principal quantum number must be >= 1")
    j = (n - 1) / 2.0
    a = su2_amplitudes(j, params.zeta1)
    b = su2_amplitudes(j, params.zeta2)
    return AngularAmplitudes(n=n, amplitudes=np.outer(a, b))


def _signed_logsumexp(log_terms: np.ndarray, signs: np.ndarray) -> tuple[float, float]:
    """Sum of signs*exp(log_terms) returned as (log magnitude, sign)."""
    finite = log_terms > -np.inf
    if not np.any(finite):
        return -np.inf, 0.0
    peak = np.max(log_terms[finite])
    total = np.sum(signs[finite] * np.exp(log_terms[finite] - peak))
    if total == 0.0:
        return -np.inf, 0.0
    return peak + math.log(abs(total)), math.copysign(1.0, total)


def clebsch_gordan(j1: float, m1: float, j2: float, m2: float, L: float, M: float) -> float:
    """Condon-Shortley Clebsch-Gordan coefficient <j1 m1 j2 m2 | L M>.

    Evaluated from the Racah single-sum closed form with log-factorials
    and explicit sign bookkeeping, stable to j of order 100.  Selection
    rule violations give exactly 0.
    """
    two = [_check_two_j(x, name) for x, name in
           ((j1, "j1"), (j2, "j2"), (L, "L"))]
    two_j1, two_j2, two_L = two
    two_m1, two_m2, two_M = round(2 * m1), round(2 * m2), round(2 * M)
    for tm, tj, label in ((two_m1, two_j1, "m1"), (two_m2, two_j2, "m2"), (two_M, two_L, "M")):
        if (tm + tj) % 2 != 0:
            raise ValueError(f"{label} must differ from its j by an integer")
    # selection rules
    if two_m1 + two_m2 != two_M:
        return 0.0
    if abs(two_m1) > two_j1 or abs(two_m2) > two_j2 or abs(two_M) > two_L:
        return 0.0
    if two_L < abs(two_j1 - two_j2) or two_L > two_j1 + two_j2:
        return 0.0
    return _cg_from_ints(two_j1, two_m1, two_j2, two_m2, two_L, two_M)


def _cg_from_ints(two_j1, two_m1, two_j2, two_m2, two_L, two_M) -> float:
    def lf(two_x: int) -> float:
        # log((two_x/2)!) with two_x even and nonnegative
        return math.lgamma(two_x / 2 + 1)

    log_pref = 0.5 * (
        math.log(two_L + 1.0)
        + lf(two_j1 + two_j2 - two_L)
        + lf(two_j1 - two_j2 + two_L)
        + lf(-two_j1 + two_j2 + two_L)
        - lf(two_j1 + two_j2 + two_L + 2)
        + lf(two_L + two_M)
        + lf(two_L - two_M)
        + lf(two_j1 - two_m1)
        + lf(two_j1 + two_m1)
        + lf(two_j2 - two_m2)
        + lf(two_j2 + two_m2)
    )
    k_min = max(0, -(two_L - two_j2 + two_m1) // 2, -(two_L - two_j1 - two_m2) // 2)
    k_max = min(
        (two_j1 + two_j2 - two_L) // 2,
        (two_j1 - two_m1) // 2,
        (two_j2 + two_m2) // 2,
    )
    if k_max < k_min:
        return 0.0
    k = np.arange(k_min, k_max + 1)
    log_terms = -(
        gammaln(k + 1.0)
        + gammaln((two_j1 + two_j2 - two_L) / 2 - k + 1.0)
        + gammaln((two_j1 - two_m1) / 2 - k + 1.0)
        + gammaln((two_j2 + two_m2) / 2 - k + 1.0)
        + gammaln((two_L - two_j2 + two_m1) / 2 + k + 1.0)
        + gammaln((two_L - two_j1 - two_m2) / 2 + k + 1.0)
    )
    signs = np.where(k % 2 == 0, 1.0, -1.0)
    log_sum, sign = _signed_logsumexp(log_terms, signs)
    if sign == 0.0:
        return 0.0
    return sign * math.exp(log_pref + log_sum)


@lru_cache(maxsize=4096)
def coupling_matrix(two_j: int, two_l: int) -> np.ndarray:
    """Dense table W[k1, k2] = <j m1 j m2 | l, m1+m2> for one (j, l).

    Indices k = j + m.  Cached because planar-grid evaluation reuses the
    same tables for every sample point; the cache is only ever filled,
    so concurrent readers at worst duplicate a computation.
    """
    dim = two_j + 1
    w = np.zeros((dim, dim))
    for k1 in range(dim):
        two_m1 = 2 * k1 - two_j
        for k2 in range(dim):
            two_m2 = 2 * k2 - two_j
            two_M = two_m1 + two_m2
            if abs(two_M) > two_l:
                continue
            w[k1, k2] = _cg_from_ints(two_j, two_m1, two_j, two_m2, two_l, two_M)
    return w


def so4_to_spherical(amps: AngularAmplitudes) -> np.ndarray:
    """Recouple product amplitudes to |l, m> labels.

    Returns a complex array ``c`` of shape (n, 2n-1) with ``c[l, l+m]``
    the amplitude on angular momentum (l, m); a unitary change of basis.
    """
    n = amps.n
    two_j = n - 1
    out = np.zeros((n, 2 * n - 1), dtype=complex)
    for l in range(n):
        w = coupling_matrix(two_j, 2 * l)
        weighted = np.flipud(w * amps.amplitudes)
        # anti-diagonals of the weighted matrix collect fixed m = m1 + m2
        for t in range(2 * n - 1):
            m = t - two_j  # t = k1 + k2
            if abs(m) > l:
                continue
            out[l, l + m] = np.trace(weighted, offset=t - (n - 1))
    return out

"""Numerical resolution-of-identity checks at desk-scale truncations.

Three layers, verified separately and then composed:

  - the sphere measure (2j+1)/pi * d^2 zeta / (1+|zeta|^2)^2 resolves each
    spin multiplet; under the stereographic map the measure is uniform on
    the sphere, so Gauss-Legendre in cos(theta) times a trapezoid in phi
    integrates the polynomial integrand exactly at sufficient order;
  - the radial measure reproduces the weight moments:
    integral of u^n rho(u) du = rho_n;
  - averaging over the phase parameter suppresses cross-level terms.
    No finite quadrature realizes the limit of an infinite phase window,
    so both an exact-limit mode (the level Kronecker delta substituted
    analytically) and a finite-window mode (the sinc factor at half-width
    Gamma) are provided.  Finite-window off-diagonal entries are bounded
    by 1/(Gamma |e_a - e_b|).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from cohere import hydrogen
from cohere.su2 import _check_two_j, su2_amplitudes
from cohere.weights import WeightFamily, WeightSpec, log_moment


class InsufficientOrderError(ValueError):
    """The requested quadrature order cannot integrate the target exactly."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Orders for the combined identity check."""

    radial_rule: str = "adaptive"  # "adaptive" or "laguerre"
    radial_order: int = 64
    polar_order: int = 24
    azimuthal_count: int = 48
    gamma_halfwidth: float | None = None  # None: exact-limit mode


def gamma_average(gamma_halfwidth: float, ea: float, eb: float) -> float:
    """(1/2 Gamma) integral of exp(i gamma (ea-eb)) over [-Gamma, Gamma].

    Equals sinc(Gamma (ea - eb)); exactly 1 on the diagonal ea = eb.
    """
    if gamma_halfwidth <= 0:
        raise ValueError("the window half-width must be positive")
    return float(np.sinc(gamma_halfwidth * (ea - eb) / math.pi))


def _sphere_nodes(polar_order: int, azimuthal_count: int):
    u, wu = np.polynomial.legendre.leggauss(polar_order)
    theta = np.arccos(u)
    phi = np.arange(azimuthal_count) * (2.0 * math.pi / azimuthal_count)
    w_phi = 2.0 * math.pi / azimuthal_count
    return theta, wu, phi, w_phi


def _amplitude_stack(j: float, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """su2 amplitudes at every (theta, phi) node; shape (2j+1, Nu, Nphi)."""
    two_j = _check_two_j(j)
    k = np.arange(two_j + 1)
    tan_half = np.tan(theta / 2.0)
    from scipy.special import gammaln

    log_binom_sqrt = 0.5 * (
        gammaln(two_j + 1.0) - gammaln(k + 1.0) - gammaln(two_j - k + 1.0)
    )
    with np.errstate(divide="ignore"):
        log_tan = np.where(tan_half > 0, np.log(np.where(tan_half > 0, tan_half, 1.0)), -np.inf)
    # magnitude: binom^(1/2) tan^(k) / (1+tan^2)^j, computed in logs
    log_mag = (
        log_binom_sqrt[:, None]
        + k[:, None] * log_tan[None, :]
        - (two_j / 2.0) * np.log1p(tan_half * tan_half)[None, :]
    )
    mag = np.exp(log_mag)
    if two_j >= 0:
        mag[np.isnan(mag)] = 0.0
    # zeta = -tan(theta/2) exp(-i phi): phase (-1)^k exp(-i k phi)
    phase = np.exp(-1j * np.outer(k, phi)) * np.where(k % 2 == 0, 1.0, -1.0)[:, None]
    return mag[:, :, None] * phase[:, None, :]


def verify_su2_identity(
    j: float, polar_order: int, azimuthal_count: int | None = None
) -> float:
    """Max deviation of the spin-j sphere integral from the identity.

    Evaluates (2j+1)/pi * d^2 zeta/(1+|zeta|^2)^2 |j,zeta><j,zeta| on the
    product rule and compares with the unit matrix.
    """
    two_j = _check_two_j(j)
    if azimuthal_count is None:
        azimuthal_count = max(4, 2 * polar_order)
    if polar_order < two_j + 1:
        raise InsufficientOrderError(
            f"polar order {polar_order} cannot resolve degree {two_j}; need >= {two_j + 1}"
        )
    if azimuthal_count < two_j + 1:
        raise InsufficientOrderError(
            f"azimuthal count {azimuthal_count} aliases m-differences up to {two_j}"
        )
    theta, wu, phi, w_phi = _sphere_nodes(polar_order, azimuthal_count)
    amps = _amplitude_stack(j, theta, phi)
    flat = amps.reshape(two_j + 1, -1)
    weights = (wu[:, None] * np.full(phi.size, w_phi)[None, :]).ravel()
    gram = (flat * weights) @ flat.conj().T
    gram *= (two_j + 1.0) / (4.0 * math.pi)
    return float(np.max(np.abs(gram - np.eye(two_j + 1))))


def _sphere_overlap_matrix(
    j_a: float, j_b: float, polar_order: int, azimuthal_count: int
) -> np.ndarray:
    """(1/pi) integral d^2 zeta/(1+|zeta|^2)^2 a^(ja) conj(a^(jb)).

    For j_a = j_b this is the unit matrix over 2j+1; cross-spin blocks
    feed the finite-window identity assembly.
    """
    two_a, two_b = _check_two_j(j_a), _check_two_j(j_b)
    need = (two_a + two_b) // 2 + 1
    if polar_order < need:
        raise InsufficientOrderError(
            f"polar order {polar_order} below exactness {need} for spins {j_a}, {j_b}"
        )
    if azimuthal_count < max(two_a, two_b) + 1:
        raise InsufficientOrderError("azimuthal count aliases the phase harmonics")
    theta, wu, phi, w_phi = _sphere_nodes(polar_order, azimuthal_count)
    amps_a = _amplitude_stack(j_a, theta, phi).reshape(two_a + 1, -1)
    amps_b = _amplitude_stack(j_b, theta, phi).reshape(two_b + 1, -1)
    weights = (wu[:, None] * np.full(phi.size, w_phi)[None, :]).ravel()
    return ((amps_a * weights) @ amps_b.conj().T) / (4.0 * math.pi)


def _moment_ratio_by_quadrature(
    spec: WeightSpec, exponent: float, rule: str, order: int
) -> float:
    """integral of u^exponent rho(u) du divided by the analytic moment.

    The analytic moment generalizes to real exponents through the same
    Gamma-function expression that defines the integer moments.
    """
    if spec.family is WeightFamily.EXPONENTIAL:
        alpha = 1.0
    elif spec.family is WeightFamily.STRETCHED_EXPONENTIAL:
        alpha = spec.alpha
    else:
        raise ValueError("quadrature checks need a pointwise density")
    beta = (exponent + 1.0) / alpha
    # substitute v = u^alpha: integral = (1/alpha) Gamma(beta) *
    # [normalized gamma-density integral], computed below
    if rule == "laguerre":
        nodes, weights = np.polynomial.laguerre.laggauss(order)
        log_gamma_beta = math.lgamma(beta)
        vals = np.exp((beta - 1.0) * np.log(nodes) - log_gamma_beta)
        return float(np.sum(weights * vals))
    if rule == "adaptive":
        log_gamma_beta = math.lgamma(beta)

        def integrand(v: float) -> float:
            if v <= 0:
                return 0.0
            return math.exp((beta - 1.0) * math.log(v) - v - log_gamma_beta)

        peak = max(beta - 1.0, 0.0)
        if peak > 0:
            head, _ = quad(integrand, 0.0, peak, limit=300, epsabs=1e-13, epsrel=1e-13)
            tail, _ = quad(integrand, peak, np.inf, limit=300, epsabs=1e-13, epsrel=1e-13)
            return float(head + tail)
        result, _ = quad(integrand, 0.0, np.inf, limit=300, epsabs=1e-13, epsrel=1e-13)
        return float(result)
    raise ValueError(f"unknown radial rule {rule!r}")


def verify_radial_identity(
    spec: WeightSpec, n_max: int, rule: str = "auto", order: int | None = None
) -> float:
    """Max over n <= n_max of |integral u^n rho(u) du / rho_n - 1|."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if rule == "auto":
        rule = "laguerre" if spec.family is WeightFamily.EXPONENTIAL else "adaptive"
    if order is None:
        order = max(n_max + 1, 16)
    worst = 0.0
    for n in range(n_max + 1):
        ratio = _moment_ratio_by_quadrature(spec, float(n), rule, order)
        if not math.isfinite(ratio):
            raise ArithmeticError(f"divergent radial quadrature at moment {n}")
        worst = max(worst, abs(ratio - 1.0))
    return worst


def full_identity_matrix(
    spec: WeightSpec,
    n_max: int,
    quad_spec: QuadratureSpec = QuadratureSpec(),
    *,
    hard_cap: int = 6,
) -> tuple[np.ndarray, list[tuple[int, int, int]]]:
    """Gram matrix of the truncated identity in the |n, m1, m2> basis.

    Entry (a, b) assembles the coherent-state projector integral between
    basis vectors a and b; the phase average enters analytically (as the
    level delta in exact-limit mode, as the sinc factor at finite window).
    Returns (matrix, labels) with labels (n, k1, k2), k = j + m.
    """
    if n_max < 1:
        raise ValueError("need at least one level")
    if n_max > hard_cap:
        raise ValueError(
            f"truncation {n_max} exceeds the desk-scale cap {hard_cap}"
        )
    labels = [
        (n, k1, k2)
        for n in range(1, n_max + 1)
        for k1 in range(n)
        for k2 in range(n)
    ]
    dim = len(labels)
    exact_limit = quad_spec.gamma_halfwidth is None

    # spectral factors n / sqrt(rho_{n-1}) and radial cross integrals
    log_rho = {n: log_moment(spec, n - 1) for n in range(1, n_max + 1)}
    sphere_cache: dict[tuple[int, int], np.ndarray] = {}

    def sphere(j_a: float, j_b: float) -> np.ndarray:
        key = (round(2 * j_a), round(2 * j_b))
        if key not in sphere_cache:
            sphere_cache[key] = _sphere_overlap_matrix(
                j_a, j_b, quad_spec.polar_order, quad_spec.azimuthal_count
            )
        return sphere_cache[key]

    radial_cache: dict[tuple[int, int], float] = {}

    def radial_factor(n_a: int, n_b: int) -> float:
        key = (min(n_a, n_b), max(n_a, n_b))
        if key not in radial_cache:
            exponent = (n_a + n_b) / 2.0 - 1.0
            ratio = _moment_ratio_by_quadrature(
                spec, exponent, quad_spec.radial_rule, quad_spec.radial_order
            )
            if spec.family is WeightFamily.EXPONENTIAL:
                alpha = 1.0
            else:
                alpha = spec.alpha
            log_integral = (
                math.log(ratio)
                - math.log(alpha)
                + math.lgamma((exponent + 1.0) / alpha)
            )
            radial_cache[key] = math.exp(
                log_integral
                - 0.5 * (log_rho[n_a] + log_rho[n_b])
                + math.log(n_a)
                + math.log(n_b)
            )
        return radial_cache[key]

    gram = np.zeros((dim, dim), dtype=complex)
    energies = {n: hydrogen.energy(n) for n in range(1, n_max + 1)}
    for a, (n_a, k1a, k2a) in enumerate(labels):
        j_a = (n_a - 1) / 2.0
        for b, (n_b, k1b, k2b) in enumerate(labels):
            if b < a:
                gram[a, b] = np.conj(gram[b, a])
                continue
            if exact_limit:
                if n_a != n_b:
                    continue
                gamma_factor = 1.0
            else:
                gamma_factor = gamma_average(
                    quad_spec.gamma_halfwidth, energies[n_a], energies[n_b]
                )
                if gamma_factor == 0.0:
                    continue
            j_b = (n_b - 1) / 2.0
            s1 = sphere(j_a, j_b)[k1a, k1b]
            s2 = sphere(j_a, j_b)[k2a, k2b]
            gram[a, b] = radial_factor(n_a, n_b) * gamma_factor * s1 * s2
    return gram, labels


def verify_full_identity(
    spec: WeightSpec,
    n_max: int,
    quad_spec: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Max |entry - delta_ab| of the assembled truncated identity."""
    gram, _ = full_identity_matrix(spec, n_max, quad_spec)
    return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))


# --- reporting ------------------------------------------------------------


@dataclass
class CheckResult:
    """One verification outcome for the structured report."""

    name: str
    truncation: str
    orders: dict
    max_deviation: float
    tolerance: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = bool(self.max_deviation <= self.tolerance)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "truncation": self.truncation,
            "orders": self.orders,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def report_json(results: list[CheckResult]) -> str:
    return json.dumps(
        {
            "checks": [r.as_dict() for r in results],
            "passed": all(r.passed for r in results),
        },
        indent=2,
    )


def report_text(results: list[CheckResult]) -> str:
    lines = []
    for r in results:
        status = "pass" if r.passed else "FAIL"
        lines.append(
            f"[{status}] {r.name} ({r.truncation}): "
            f"max deviation {r.max_deviation:.3e} vs tolerance {r.tolerance:.1e}"
        )
    return "\n".join(lines)


def standard_verification(
    spec: WeightSpec | None = None,
    n_max: int = 3,
    su2_max_two_j: int = 10,
    polar_order: int = 24,
    azimuthal_count: int = 48,
    gamma_halfwidths: tuple[float, ...] = (1e3, 1e4, 1e5),
    radial_n_max: int = 10,
    su2_tol: float = 1e-12,
    radial_tol: float = 1e-12,
    full_tol: float = 1e-8,
) -> list[CheckResult]:
    """The default battery: spin multiplets, radial moments, combined
    identity in exact-limit mode, and the finite-window off-diagonal
    bound."""
    if spec is None:
        spec = WeightSpec.exponential()
    results = []

    worst_su2 = 0.0
    for two_j in range(su2_max_two_j + 1):
        worst_su2 = max(
            worst_su2, verify_su2_identity(two_j / 2.0, polar_order, azimuthal_count)
        )
    results.append(
        CheckResult(
            name="spin multiplet resolution",
            truncation=f"2j <= {su2_max_two_j}",
            orders={"polar": polar_order, "azimuthal": azimuthal_count},
            max_deviation=worst_su2,
            tolerance=su2_tol,
        )
    )

    rule = "laguerre" if spec.family is WeightFamily.EXPONENTIAL else "adaptive"
    radial_order = max(radial_n_max + 1, 16)
    results.append(
        CheckResult(
            name="radial moment identity",
            truncation=f"n <= {radial_n_max}",
            orders={"rule": rule, "order": radial_order},
            max_deviation=verify_radial_identity(spec, radial_n_max, rule, radial_order),
            tolerance=radial_tol,
        )
    )

    quad_spec = QuadratureSpec(
        polar_order=polar_order, azimuthal_count=azimuthal_count
    )
    results.append(
        CheckResult(
            name="combined identity (exact-limit phase average)",
            truncation=f"levels <= {n_max}",
            orders={"polar": polar_order, "azimuthal": azimuthal_count},
            max_deviation=verify_full_identity(spec, n_max, quad_spec),
            tolerance=full_tol,
        )
    )

    # finite-window off-diagonals must obey the sinc envelope bound
    worst_excess = 0.0
    for gamma_halfwidth in gamma_halfwidths:
        finite = QuadratureSpec(
            polar_order=polar_order,
            azimuthal_count=azimuthal_count,
            gamma_halfwidth=gamma_halfwidth,
        )
        gram, labels = full_identity_matrix(spec, min(n_max, 2), finite)
        for a, (n_a, _, _) in enumerate(labels):
            for b, (n_b, _, _) in enumerate(labels):
                if n_a == n_b:
                    continue
                bound = 1.0 / (
                    gamma_halfwidth
                    * abs(hydrogen.energy(n_a) - hydrogen.energy(n_b))
                )
                excess = abs(gram[a, b]) - bound
                worst_excess = max(worst_excess, excess)
    results.append(
        CheckResult(
            name="finite-window off-diagonal bound",
            truncation="levels <= 2",
            orders={"gamma_halfwidths": list(gamma_halfwidths)},
            max_deviation=max(worst_excess, 0.0),
            tolerance=1e-12,
        )
    )
    return results

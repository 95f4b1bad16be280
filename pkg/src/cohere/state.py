"""Assembly and dynamics of the degenerate coherent states.

A state is fixed by a weight function, a nonnegative scale s, a phase
parameter gamma, and the two angular parameters.  Its spectral side is

    c_n  propto  s^n * exp(-i gamma e_{n+1}) * (n+1) / sqrt(rho_n)

where n is the 0-based summation index, the principal quantum number is
n+1, and the factor (n+1) is the square root of the level multiplicity
(n+1)^2.  Coefficients are stored in log-polar form; magnitudes only
become linear after normalization cancels the extreme scales.

Time evolution is closure under a shift of gamma: the state at time t has
gamma + t, every coefficient picking up exp(-i e_{n+1} t).  Phase products
like t * e_{n+1} are reduced mod 2 pi in extended precision because at
t ~ 1e9 a double-precision reduction would cost several digits of phase
coherence, visible in the revival structure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from cohere import hydrogen
from cohere.su2 import AngularParams, su2_overlap
from cohere.weights import (
    DEFAULT_TAIL_EPS,
    NEG_INF,
    WeightFamily,
    WeightSpec,
    _resolve_ln_s,
    log_moment,
    truncation_level,
)

# 2*pi as a double-double sum, giving ~32 accurate digits in long double
_TWO_PI_LD = np.longdouble(6.283185307179586) + np.longdouble(2.4492935982947064e-16)


def reduced_phases(scale: float, values: np.ndarray) -> np.ndarray:
    """(scale * values) mod 2 pi, accumulated in extended precision."""
    prod = np.longdouble(scale) * np.asarray(values, dtype=np.longdouble)
    return np.mod(prod, _TWO_PI_LD).astype(np.float64)


@dataclass(frozen=True)
class SpectralCoefficients:
    """Per-level amplitudes over a contiguous summation-index window."""

    n_min: int
    n_max: int
    log_mag: np.ndarray
    phase: np.ndarray

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def levels(self) -> np.ndarray:
        """Principal quantum numbers (index + 1)."""
        return self.indices + 1

    @property
    def probabilities(self) -> np.ndarray:
        return np.exp(2.0 * self.log_mag)

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_mag + 1j * self.phase)


@dataclass(frozen=True)
class CoherentState:
    """A built state |s, gamma, zeta1, zeta2> with cached coefficients."""

    weight: WeightSpec
    ln_s: float
    gamma: float
    angular: AngularParams
    coeffs: SpectralCoefficients
    tail_eps: float

    @property
    def s(self) -> float:
        return math.exp(self.ln_s) if self.ln_s > NEG_INF else 0.0

    @property
    def level_energies(self) -> np.ndarray:
        return hydrogen.energy(self.coeffs.levels)


def _log_weights(spec: WeightSpec, ln_s: float, n_values: np.ndarray) -> np.ndarray:
    """log of s^{2n} (n+1)^2 / rho_n over the given indices."""
    log_rho = log_moment(spec, n_values)
    if ln_s == NEG_INF:
        power = np.where(n_values == 0, 0.0, NEG_INF)
    else:
        power = 2.0 * n_values * ln_s
    return power + 2.0 * np.log(n_values + 1.0) - log_rho


def _distribution_window(
    spec: WeightSpec, ln_s: float, tail_eps: float
) -> tuple[np.ndarray, np.ndarray]:
    """Window indices and normalized probabilities covering 1 - tail_eps."""
    n_hi = truncation_level(spec, None, tail_eps=tail_eps / 2.0, ln_s=ln_s)
    n_values = np.arange(n_hi + 1)
    w = _log_weights(spec, ln_s, n_values)
    w = w - _logsumexp(w)
    p = np.exp(w)
    # trim the negligible lower tail as well
    lower = np.cumsum(p)
    keep = lower > tail_eps / 2.0
    n_lo = int(np.argmax(keep))
    if n_lo > 0:
        n_values, p = n_values[n_lo:], p[n_lo:]
        p = p / p.sum()
    return n_values, p


def _logsumexp(values: np.ndarray) -> float:
    peak = np.max(values)
    if not np.isfinite(peak):
        return float(peak)
    return float(peak + np.log(np.sum(np.exp(values - peak))))


def build_state(
    weight: WeightSpec,
    s: float | None,
    gamma: float,
    angular: AngularParams,
    tail_eps: float = DEFAULT_TAIL_EPS,
    *,
    ln_s: float | None = None,
) -> CoherentState:
    """Assemble the normalized state over its truncation window."""
    ln_s = _resolve_ln_s(s, ln_s)
    n_values, p = _distribution_window(weight, ln_s, tail_eps)
    if n_values.size == 0:
        raise ValueError("empty coefficient window")
    log_mag = 0.5 * np.log(p)
    phase = reduced_phases(-gamma, hydrogen.energy(n_values + 1))
    coeffs = SpectralCoefficients(
        n_min=int(n_values[0]),
        n_max=int(n_values[-1]),
        log_mag=log_mag,
        phase=phase,
    )
    return CoherentState(
        weight=weight,
        ln_s=ln_s,
        gamma=gamma,
        angular=angular,
        coeffs=coeffs,
        tail_eps=tail_eps,
    )


def level_distribution(state: CoherentState) -> list[tuple[int, float]]:
    """(principal quantum number, probability) pairs."""
    return list(zip((state.coeffs.levels).tolist(), state.coeffs.probabilities.tolist()))


def mean_level(state: CoherentState, principal: bool = False) -> float:
    """Mean of the summation index (or of the principal number)."""
    p = state.coeffs.probabilities
    mean = float(np.sum(state.coeffs.indices * p))
    return mean + 1.0 if principal else mean


def level_spread(state: CoherentState) -> float:
    """Standard deviation of the level distribution (index convention
    irrelevant: a unit shift leaves the spread unchanged)."""
    p = state.coeffs.probabilities
    n = state.coeffs.indices
    mean = float(np.sum(n * p))
    return math.sqrt(max(0.0, float(np.sum(n * n * p)) - mean * mean))


def exponential_mean_closed_form(s_sq: float) -> float:
    """Mean summation index for the plain exponential weight:
    s^2 (s^4 + 5 s^2 + 4) / (s^4 + 3 s^2 + 1)."""
    x = s_sq
    return x * (x * x + 5 * x + 4) / (x * x + 3 * x + 1)


def exponential_variance_closed_form(s_sq: float) -> float:
    """Index variance for the plain exponential weight:
    s^2 (s^8 + 6 s^6 + 14 s^4 + 10 s^2 + 4) / (s^8 + 6 s^6 + 11 s^4 + 6 s^2 + 1)."""
    x = s_sq
    num = x**4 + 6 * x**3 + 14 * x * x + 10 * x + 4
    den = x**4 + 6 * x**3 + 11 * x * x + 6 * x + 1
    return x * num / den


def leading_order_stats(alpha: float, s: float | None = None, *, ln_s: float | None = None) -> tuple[float, float]:
    """Large-scale asymptotics for the stretched family:
    mean ~ alpha s^(2 alpha), spread ~ alpha s^alpha."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    ln_s = _resolve_ln_s(s, ln_s)
    if ln_s == NEG_INF:
        return 0.0, 0.0
    return alpha * math.exp(2 * alpha * ln_s), alpha * math.exp(alpha * ln_s)


def solve_scale_ln(
    alpha: float,
    target_mean: float,
    tol: float = 1e-9,
    tail_eps: float = DEFAULT_TAIL_EPS,
    principal: bool = True,
) -> float:
    """ln s such that the exact mean level hits target_mean within tol
    (relative).

    The target is the principal mean by default; pass principal=False to
    aim the summation-index mean instead (the only meaningful reading for
    targets below 1).  Seeded by inverting the leading-order mean, then
    refined by bisection in ln s (the mean is monotone in the scale).
    """
    if target_mean <= 0:
        raise ValueError("target mean must be positive")
    if principal and target_mean <= 1.0:
        raise ValueError("a principal mean target must exceed 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    spec = WeightSpec.stretched(alpha)
    shift = 1.0 if principal else 0.0

    def mean_at(ln_s: float) -> float:
        n_values, p = _distribution_window(spec, ln_s, tail_eps)
        return float(np.sum((n_values + shift) * p))

    lo = hi = math.log(max(target_mean - shift, target_mean / 4.0) / alpha) / (2.0 * alpha)
    step = 0.5
    for _ in range(200):
        if mean_at(lo) <= target_mean:
            break
        lo -= step
        step *= 2.0
    else:
        raise ArithmeticError("failed to bracket the target mean from below")
    step = 0.5
    for _ in range(200):
        if mean_at(hi) >= target_mean:
            break
        hi += step
        step *= 2.0
    else:
        raise ArithmeticError("failed to bracket the target mean from above")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        value = mean_at(mid)
        if abs(value - target_mean) <= tol * target_mean:
            return mid
        if value < target_mean:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def solve_scale(
    alpha: float,
    target_mean: float,
    tol: float = 1e-9,
    tail_eps: float = DEFAULT_TAIL_EPS,
    principal: bool = True,
) -> float:
    """Linear-scale convenience wrapper around solve_scale_ln; may
    overflow to inf when the solved scale exceeds double range."""
    return math.exp(solve_scale_ln(alpha, target_mean, tol, tail_eps, principal))


def evolve(state: CoherentState, t: float) -> CoherentState:
    """The state at time t: gamma shifts by t, coefficient n picks up
    exp(-i e_{n+1} t)."""
    extra = reduced_phases(-t, state.level_energies)
    new_phase = np.mod(state.coeffs.phase + extra, 2.0 * np.pi)
    return replace(
        state,
        gamma=state.gamma + t,
        coeffs=replace(state.coeffs, phase=new_phase),
    )


def autocorrelation(state: CoherentState, t) -> complex | np.ndarray:
    """<state(0)|state(t)> = sum_n p_n exp(-i e_{n+1} t).

    The angular factors cancel because evolution only shifts gamma.
    Accepts a scalar t or an array of times.
    """
    p = state.coeffs.probabilities
    energies = state.level_energies
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t_arr.shape, dtype=complex)
    chunk = max(1, int(4e6 / max(1, energies.size)))
    for start in range(0, t_arr.size, chunk):
        block = t_arr[start : start + chunk]
        prod = (
            -np.asarray(block, dtype=np.longdouble)[:, None]
            * energies.astype(np.longdouble)[None, :]
        )
        phases = np.mod(prod, _TWO_PI_LD).astype(np.float64)
        out[start : start + chunk] = np.exp(1j * phases) @ p
    return complex(out[0]) if np.isscalar(t) or np.asarray(t).ndim == 0 else out


def overlap(a: CoherentState, b: CoherentState) -> complex:
    """<a|b> combining spectral coefficients with the per-level angular
    overlaps; windows are aligned by zero padding."""
    if a.weight != b.weight:
        raise ValueError("states must share a weight family")
    lo = min(a.coeffs.n_min, b.coeffs.n_min)
    hi = max(a.coeffs.n_max, b.coeffs.n_max)

    def padded(state: CoherentState) -> np.ndarray:
        buf = np.zeros(hi - lo + 1, dtype=complex)
        c = state.coeffs
        buf[c.n_min - lo : c.n_max - lo + 1] = c.values
        return buf

    ca, cb = padded(a), padded(b)
    total = 0.0 + 0.0j
    for offset, (va, vb) in enumerate(zip(ca, cb)):
        if va == 0 or vb == 0:
            continue
        j = (lo + offset) / 2.0  # level n+1 carries two spins of j = n/2
        ang = su2_overlap(j, a.angular.zeta1, b.angular.zeta1) * su2_overlap(
            j, a.angular.zeta2, b.angular.zeta2
        )
        total += np.conj(va) * vb * ang
    return complex(total)


# --- descriptor serialization -------------------------------------------

_FMT = "%.17g"


def write_descriptor(path, state: CoherentState, include_coeffs: bool = False) -> None:
    """Persist the defining parameters as flat key=value lines.

    ln_s is the canonical scale entry; the linear s is written for
    display only.  With include_coeffs the cached coefficient table is
    appended as c<n>=<log_mag>,<phase> lines.
    """
    lines = [f"family={state.weight.family.value}"]
    if state.weight.family is WeightFamily.STRETCHED_EXPONENTIAL:
        lines.append(f"alpha={_FMT % state.weight.alpha}")
    if state.weight.family is WeightFamily.TABULATED:
        lines.append(
            "log_moments=" + ",".join(_FMT % v for v in state.weight.log_moments)
        )
    lines += [
        f"ln_s={_FMT % state.ln_s}",
        f"s_display={_FMT % state.s}",
        f"gamma={_FMT % state.gamma}",
        f"zeta1_re={_FMT % state.angular.zeta1.real}",
        f"zeta1_im={_FMT % state.angular.zeta1.imag}",
        f"zeta2_re={_FMT % state.angular.zeta2.real}",
        f"zeta2_im={_FMT % state.angular.zeta2.imag}",
        f"tail_eps={_FMT % state.tail_eps}",
    ]
    if include_coeffs:
        c = state.coeffs
        for n, lm, ph in zip(c.indices, c.log_mag, c.phase):
            lines.append(f"c{n}={_FMT % lm},{_FMT % ph}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_descriptor(path) -> dict:
    """Read a flat key=value descriptor into a dict (values as strings)."""
    entries: dict[str, str] = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"malformed descriptor line: {line!r}")
            key, value = line.split("=", 1)
            entries[key.strip()] = value.strip()
    return entries


def read_descriptor(path) -> CoherentState:
    """Rebuild a state from a descriptor; coefficients are recomputed
    from the parameters (any cached table is ignored)."""
    entries = parse_descriptor(path)
    try:
        family = WeightFamily(entries["family"])
        if family is WeightFamily.STRETCHED_EXPONENTIAL:
            weight = WeightSpec.stretched(float(entries["alpha"]))
        elif family is WeightFamily.TABULATED:
            moments = [float(v) for v in entries["log_moments"].split(",")]
            weight = WeightSpec.tabulated(moments)
        else:
            weight = WeightSpec.exponential()
        angular = AngularParams(
            zeta1=complex(float(entries["zeta1_re"]), float(entries["zeta1_im"])),
            zeta2=complex(float(entries["zeta2_re"]), float(entries["zeta2_im"])),
        )
        return build_state(
            weight,
            None,
            float(entries["gamma"]),
            angular,
            tail_eps=float(entries.get("tail_eps", DEFAULT_TAIL_EPS)),
            ln_s=float(entries["ln_s"]),
        )
    except KeyError as missing:
        raise ValueError(f"descriptor missing required key {missing}") from None


def write_trace_csv(path, times, values) -> None:
    """CSV autocorrelation trace with columns t, re_A, im_A, abs_A, abs_sq_A."""
    values = np.asarray(values)
    with open(path, "w") as fh:
        fh.write("t,re_A,im_A,abs_A,abs_sq_A\n")
        for t, v in zip(times, values):
            mag = abs(v)
            fh.write(
                ",".join(
                    _FMT % x for x in (t, v.real, v.imag, mag, mag * mag)
                )
                + "\n"
            )

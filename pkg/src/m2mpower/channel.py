"""Cell geometry, link budget and Shannon-feasibility primitives.

Everything downstream (random access sizing, coordinated scheduling,
Monte Carlo sweeps) is built on the handful of quantities defined here:
the composite channel gain g, the received SNR over a sub-band, and the
minimum time / minimum bandwidth at which a device can still deliver its
payload under the peak-power cap.

All SNRs are linear. dB appears only at the config/CLI boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ConfigError, InvalidBandError

ArrayLike = Union[float, np.ndarray]

FADING_MODES = ("none", "custom-hook")

# fading hook signature: (rng, n) -> (shadow_gains, fade_gains), each shape (n,)
FadingHook = Callable[[np.random.Generator, int], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class Scenario:
    """System constants for one cell.

    ``p_max`` is the peak device power and also the normalization
    reference for ``mu_ref``: a cell-edge device transmitting at p_max
    over the full band ``w_total`` is received at SNR ``mu_ref``.
    """

    p_max: float = 1.0            # W
    r_inner: float = 50.0         # m, keeps the path-loss model off its singularity
    r_outer: float = 1000.0       # m
    gamma: float = 3.0            # path-loss exponent
    mu_ref: float = 10 ** -0.3    # linear reference SNR (-3 dB default)
    w_total: float = 1e6          # Hz
    tau_slot: float = 1.0         # s
    payload_bits: float = 1000.0  # bits per transaction
    lambda_rate: float = 1000.0   # arrivals/s
    fading: str = "none"

    def __post_init__(self) -> None:
        if not (0.0 < self.r_inner < self.r_outer):
            raise ConfigError("r_inner: need 0 < r_inner < r_outer")
        if self.gamma < 2.0:
            raise ConfigError("gamma: path-loss exponent must be >= 2")
        for key in ("p_max", "mu_ref", "w_total", "tau_slot", "payload_bits", "lambda_rate"):
            if getattr(self, key) <= 0.0:
                raise ConfigError(f"{key}: must be strictly positive")
        if self.fading not in FADING_MODES:
            raise ConfigError(f"fading: unknown mode {self.fading!r}, expected one of {FADING_MODES}")

    @property
    def spectral_load(self) -> float:
        """Payload bits per time-bandwidth unit, L/(W*tau_s)."""
        return self.payload_bits / (self.w_total * self.tau_slot)

    @property
    def required_rate(self) -> float:
        """Rate needed to finish in one slot, L/tau_s (bit/s)."""
        return self.payload_bits / self.tau_slot


@dataclass(frozen=True)
class Device:
    """One arrival: position plus composite channel gain."""

    distance: float
    shadow_gain: float = 1.0
    fade_gain: float = 1.0
    gain: float = field(default=0.0)

    @staticmethod
    def at(distance: float, scenario: Scenario,
           shadow_gain: float = 1.0, fade_gain: float = 1.0) -> "Device":
        g = composite_gain(distance, scenario, shadow_gain, fade_gain)
        return Device(distance=distance, shadow_gain=shadow_gain,
                      fade_gain=fade_gain, gain=g)


def composite_gain(distance: ArrayLike, scenario: Scenario,
                   shadow_gain: ArrayLike = 1.0, fade_gain: ArrayLike = 1.0) -> ArrayLike:
    """g = shadow * fade * (r/r_outer)^(-gamma), normalized to 1 at the cell edge."""
    return shadow_gain * fade_gain * (distance / scenario.r_outer) ** (-scenario.gamma)


def sample_distances(scenario: Scenario, count: int, rng: np.random.Generator) -> np.ndarray:
    """Area-uniform radii on the annulus [r_inner, r_outer]."""
    u = rng.random(count)
    return np.sqrt(scenario.r_inner ** 2 + u * (scenario.r_outer ** 2 - scenario.r_inner ** 2))


def sample_gains(scenario: Scenario, count: int, rng: np.random.Generator,
                 fading_hook: Optional[FadingHook] = None) -> np.ndarray:
    """Batch draw of composite gains; the workhorse for Monte Carlo loops."""
    d = sample_distances(scenario, count, rng)
    if scenario.fading == "custom-hook":
        if fading_hook is None:
            raise ConfigError("fading: scenario requests custom-hook but no hook was supplied")
        shadow, fade = fading_hook(rng, count)
        return composite_gain(d, scenario, np.asarray(shadow), np.asarray(fade))
    return composite_gain(d, scenario)


def sample_devices(scenario: Scenario, count: int, seed: int,
                   fading_hook: Optional[FadingHook] = None) -> list[Device]:
    """Draw ``count`` devices, deterministic for a fixed seed.

    Positions are area-uniform on the annulus: r = sqrt(r_i^2 + u*(r_o^2 - r_i^2)).
    """
    if count < 0:
        raise ConfigError("count: must be >= 0")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    d = sample_distances(scenario, count, rng)
    if scenario.fading == "custom-hook":
        if fading_hook is None:
            raise ConfigError("fading: scenario requests custom-hook but no hook was supplied")
        shadow, fade = fading_hook(rng, count)
    else:
        shadow = np.ones(count)
        fade = np.ones(count)
    g = composite_gain(d, scenario, shadow, fade)
    return [Device(distance=float(d[i]), shadow_gain=float(shadow[i]),
                   fade_gain=float(fade[i]), gain=float(g[i]))
            for i in range(count)]


def received_snr(p_t: float, gain: float, scenario: Scenario, band: float) -> float:
    """Linear received SNR over ``band`` Hz: (p_t/p_max) * mu * (W/band) * g.

    Shrinking the band below w_total raises the effective reference SNR
    because the in-band noise power drops proportionally.
    """
    if not (0.0 < band <= scenario.w_total):
        raise InvalidBandError(f"band: need 0 < band <= w_total, got {band}")
    if p_t < 0.0:
        raise ConfigError("p_t: transmit power must be >= 0")
    return (p_t / scenario.p_max) * scenario.mu_ref * (scenario.w_total / band) * gain


def tau_min(gain: ArrayLike, scenario: Scenario) -> ArrayLike:
    """Minimum transmission time over the full band at peak power.

    tau_min = L / (W * log2(1 + mu * g)); at p_t = p_max the received SNR
    is mu*g regardless of p_max, so the cap drops out of the formula.
    """
    return scenario.payload_bits / (scenario.w_total * np.log2(1.0 + scenario.mu_ref * gain))


def _w_min_residual(w: float, gain: float, scenario: Scenario) -> float:
    """f(w) = w*log2(1 + mu*(W/w)*g) - L/tau_s; strictly increasing in w."""
    c = scenario.mu_ref * scenario.w_total * gain
    return w * math.log2(1.0 + c / w) - scenario.required_rate


def w_min(gain: float, scenario: Scenario) -> float:
    """Minimum bandwidth to deliver the payload in one slot at peak power.

    Root of f(w) = w*log2(1 + mu*(W/w)*g) - L/tau_s, found by bisection
    to |f| <= 1e-6 * (L/tau_s). Returns math.inf when even unlimited
    bandwidth cannot reach the required rate (supremum rate
    mu*W*g*log2(e) <= L/tau_s), which means the device must be dropped.
    """
    if gain <= 0.0:
        raise ConfigError("gain: must be strictly positive")
    rate = scenario.required_rate
    if scenario.mu_ref * scenario.w_total * gain * math.log2(math.e) <= rate:
        return math.inf
    tol = 1e-6 * rate
    hi = scenario.w_total
    while _w_min_residual(hi, gain, scenario) < 0.0:
        hi *= 2.0
    lo = hi
    while _w_min_residual(lo, gain, scenario) > 0.0:
        lo /= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = _w_min_residual(mid, gain, scenario)
        if abs(r) <= tol:
            return mid
        if r < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def w_min_batch(gains: np.ndarray, scenario: Scenario) -> np.ndarray:
    """Vectorized w_min for Monte Carlo loops (safeguarded Newton).

    Solves ln(1+x)/x = t with x = mu*W*g/w and t = (L/tau_s)*ln2/(mu*W*g);
    agrees with the scalar bisection to ~1e-12 relative. Infeasible
    entries (t >= 1) come back as +inf.
    """
    g = np.asarray(gains, dtype=float)
    c = scenario.mu_ref * scenario.w_total * g
    t = scenario.required_rate * math.log(2.0) / c
    feasible = t < 1.0
    tf = np.where(feasible, t, 0.5)
    # init: near t=1 use the small-x expansion ln(1+x)/x ~ 1 - x/2;
    # for small t the root is large, x ~ (1/t)*ln(1 + 1/t)
    x = np.where(tf > 0.5, 2.0 * (1.0 - tf), np.log1p(1.0 / tf) / tf)
    x = np.clip(x, 1e-12, None)
    for _ in range(60):
        f = np.log1p(x) / x - tf
        df = (x / (1.0 + x) - np.log1p(x)) / (x * x)
        step = f / df
        xn = x - step
        bad = xn <= 0.0
        if np.any(bad):
            xn = np.where(bad, 0.5 * x, xn)
        if np.allclose(xn, x, rtol=1e-15, atol=0.0):
            x = xn
            break
        x = xn
    out = c / x
    return np.where(feasible, out, np.inf)


def poisson_quantile(mean: float, epsilon: float) -> int:
    """Smallest n with P[Pois(mean) > n] <= epsilon.

    Direct pmf summation; the pmf is built by the stable log-space
    recursion log p_k = log p_{k-1} + log(mean/k) so large means do not
    underflow term by term.
    """
    if mean <= 0.0:
        raise ConfigError("mean: must be strictly positive")
    if not (0.0 < epsilon < 1.0):
        raise ConfigError("epsilon: must lie strictly inside (0, 1)")
    n_top = int(mean + 12.0 * math.sqrt(mean) + 60.0)
    while True:
        k = np.arange(1, n_top + 1, dtype=float)
        logpmf = np.concatenate(([-mean], -mean + np.cumsum(np.log(mean / k))))
        tail = 1.0 - np.cumsum(np.exp(logpmf))
        hit = np.nonzero(tail <= epsilon)[0]
        if hit.size:
            return int(hit[0])
        n_top *= 2  # epsilon smaller than the tail mass we covered; widen

"""System parameters, sensing posteriors and SNR thresholds.

Everything here is deterministic configuration shared by the closed-form and
Monte Carlo paths: prior spectrum occupancy, sensing quality (detection /
false-alarm probabilities of a spectrum hole), transmit SNRs, target rate and
the per-link Rayleigh fading variances.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

__all__ = [
    "MAX_RELAYS",
    "ChannelVariances",
    "Hypothesis",
    "Posterior",
    "Scheme",
    "SnrThreshold",
    "SystemParams",
    "db_to_linear",
    "linear_to_db",
    "posterior",
    "snr_threshold",
]

# The closed-form outage sum enumerates all 2^N - 1 decoding sets; past this
# the analytic path is intractable and the cap makes that failure explicit.
MAX_RELAYS = 24


class Hypothesis(enum.Enum):
    """True spectrum state: H0 = band unoccupied, H1 = primary active.

    The enum value doubles as the interference indicator: secondary receivers
    see primary interference only under H1.
    """

    H0 = 0
    H1 = 1

    @property
    def interference_on(self) -> bool:
        return self is Hypothesis.H1


class Scheme(str, enum.Enum):
    """Transmission scheme under evaluation."""

    MULTI_RELAY = "multi"
    BEST_RELAY = "best"
    DIRECT = "direct"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class Posterior:
    """Hypothesis probabilities conditioned on the sensor declaring a hole."""

    pi0: float
    pi1: float

    def __post_init__(self):
        if not (0.0 <= self.pi0 <= 1.0 and 0.0 <= self.pi1 <= 1.0):
            raise ValueError(f"posterior probabilities out of [0,1]: {self}")
        if abs(self.pi0 + self.pi1 - 1.0) > 1e-12:
            raise ValueError(f"posterior does not sum to 1: {self}")


@dataclass(frozen=True)
class SnrThreshold:
    """Linear SNR levels below which decoding fails at rate R.

    Relayed schemes spend two time slots on every message, so their capacity
    carries a 1/2 pre-log and the threshold is (2^{2R}-1)/gamma_s.  The
    single-hop direct benchmark uses one slot: (2^R-1)/gamma_s.
    """

    delta: float
    delta_direct: float


@dataclass(frozen=True)
class ChannelVariances:
    """Mean squared fading magnitudes for every link class.

    sigma2_si / sigma2_pi are per-relay (source->relay i, primary->relay i).
    The relay->destination links are i.i.d. with the single common variance
    sigma2_d; the closed forms require that homogeneity, so it is a scalar by
    construction.  sigma2_sd feeds only the direct-transmission benchmark.
    """

    sigma2_si: tuple[float, ...]
    sigma2_pi: tuple[float, ...]
    sigma2_d: float
    sigma2_pd: float
    sigma2_sd: float

    def __post_init__(self):
        object.__setattr__(self, "sigma2_si", tuple(float(v) for v in self.sigma2_si))
        object.__setattr__(self, "sigma2_pi", tuple(float(v) for v in self.sigma2_pi))
        for name in ("sigma2_d", "sigma2_pd", "sigma2_sd"):
            v = getattr(self, name)
            if not (v > 0.0) or math.isinf(v):
                raise ValueError(f"{name} must be finite and > 0, got {v}")
        for name in ("sigma2_si", "sigma2_pi"):
            vec = getattr(self, name)
            if not vec:
                raise ValueError(f"{name} must have one entry per relay")
            if any(not (v > 0.0) or math.isinf(v) for v in vec):
                raise ValueError(f"all {name} entries must be finite and > 0, got {vec}")
        if len(self.sigma2_si) != len(self.sigma2_pi):
            raise ValueError(
                f"sigma2_si and sigma2_pi lengths differ: "
                f"{len(self.sigma2_si)} vs {len(self.sigma2_pi)}"
            )

    @classmethod
    def homogeneous(
        cls,
        n_relays: int,
        sigma2_si: float = 1.0,
        sigma2_pi: float = 0.2,
        sigma2_d: float = 1.0,
        sigma2_pd: float = 0.2,
        sigma2_sd: float = 1.0,
    ) -> "ChannelVariances":
        return cls(
            sigma2_si=(float(sigma2_si),) * n_relays,
            sigma2_pi=(float(sigma2_pi),) * n_relays,
            sigma2_d=sigma2_d,
            sigma2_pd=sigma2_pd,
            sigma2_sd=sigma2_sd,
        )

    @property
    def is_homogeneous(self) -> bool:
        """True when every relay shares the same first-hop variances."""
        return (
            len(set(self.sigma2_si)) == 1
            and len(set(self.sigma2_pi)) == 1
        )


@dataclass(frozen=True)
class SystemParams:
    """Complete scalar configuration of one operating point.

    p0        prior probability that the band is unoccupied
    pd        detection probability of a spectrum hole, Pr(declare free | free)
    pf        false-alarm probability, Pr(declare free | occupied)
    gamma_s   secondary transmit SNR, linear
    gamma_p   primary transmit SNR, linear
    rate      target data rate, bit/s/Hz
    n_relays  number of decode-and-forward relays
    """

    p0: float
    pd: float
    pf: float
    gamma_s: float
    gamma_p: float
    rate: float
    n_relays: int
    variances: ChannelVariances

    def __post_init__(self):
        for name in ("p0", "pd", "pf"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0,1], got {v}")
        if self.p0 * self.pd + (1.0 - self.p0) * self.pf <= 0.0:
            raise ValueError(
                "sensing never declares a hole: p0*pd + (1-p0)*pf must be > 0"
            )
        for name in ("gamma_s", "gamma_p", "rate"):
            v = getattr(self, name)
            if not (v > 0.0) or math.isinf(v):
                raise ValueError(f"{name} must be finite and > 0, got {v}")
        if not 1 <= self.n_relays <= MAX_RELAYS:
            raise ValueError(
                f"n_relays must be in [1, {MAX_RELAYS}] (the decoding-set "
                f"enumeration is exponential in N), got {self.n_relays}"
            )
        if len(self.variances.sigma2_si) != self.n_relays:
            raise ValueError(
                f"variances cover {len(self.variances.sigma2_si)} relays, "
                f"n_relays is {self.n_relays}"
            )

    def posterior(self) -> Posterior:
        return posterior(self.p0, self.pd, self.pf)

    def snr_threshold(self) -> SnrThreshold:
        return snr_threshold(self.rate, self.gamma_s)


def posterior(p0: float, pd: float, pf: float) -> Posterior:
    """Bayes-invert the sensing outcome: Pr(H0 | declared free) and complement.

    pi0 = p0*pd / (p0*pd + (1-p0)*pf).  Raises if the sensor can never declare
    a hole (zero denominator).
    """
    for name, v in (("p0", p0), ("pd", pd), ("pf", pf)):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"{name} must be in [0,1], got {v}")
    denom = p0 * pd + (1.0 - p0) * pf
    if denom <= 0.0:
        raise ValueError("sensing never declares a hole: p0*pd + (1-p0)*pf is 0")
    pi0 = p0 * pd / denom
    return Posterior(pi0=pi0, pi1=1.0 - pi0)


def snr_threshold(rate: float, gamma_s: float) -> SnrThreshold:
    """Decode thresholds on the fading gain scale for both rate conventions."""
    if not (rate > 0.0):
        raise ValueError(f"rate must be > 0, got {rate}")
    if not (gamma_s > 0.0):
        raise ValueError(f"gamma_s must be > 0, got {gamma_s}")
    return SnrThreshold(
        delta=(2.0 ** (2.0 * rate) - 1.0) / gamma_s,
        delta_direct=(2.0 ** rate - 1.0) / gamma_s,
    )


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if not (x > 0.0):
        raise ValueError(f"linear value must be > 0, got {x}")
    return 10.0 * math.log10(x)

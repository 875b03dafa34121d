"""Sample-path Monte Carlo estimator for the outage probabilities.

Every trial is conditioned on the sensor having declared a hole: the true
hypothesis is drawn from the sensing posterior (rejection sampling would
waste the complementary fraction of draws), then one squared-magnitude fading
gain per link.  Complex coefficients, symbols and noise never materialize;
the decode tests and combiner SINR depend on gains only.

Reproducibility contract: trial t consumes row t % TRIALS_PER_BATCH of a
uniform matrix generated by a counter-based Philox stream keyed with
(seed, t // TRIALS_PER_BATCH).  Batches are fixed-size regardless of the
requested trial count, so estimates are bit-identical for any worker count
and any longer run reproduces a shorter run's trials exactly as its prefix.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import DecodingSet
from .model import Hypothesis, Posterior, Scheme, SnrThreshold, SystemParams

__all__ = [
    "TRIALS_PER_BATCH",
    "ChannelState",
    "MrcResult",
    "OutageEstimate",
    "decoding_set",
    "estimate_outage",
    "exponential_from_uniform",
    "mrc_combine",
    "outage_flags",
    "sample_channel_state",
    "sample_exponential",
    "sample_hypothesis",
    "trial_outage",
]

TRIALS_PER_BATCH = 16384

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class ChannelState:
    """One sample path: squared fading magnitudes for every link.

    g_si, g_pi, g_id are per-relay vectors (source->relay, primary->relay,
    relay->destination); g_pd and g_sd are the primary->destination and
    source->destination scalars.
    """

    g_si: np.ndarray
    g_pi: np.ndarray
    g_id: np.ndarray
    g_pd: float
    g_sd: float

    def __post_init__(self):
        for name in ("g_si", "g_pi", "g_id"):
            vec = np.asarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, vec)
            if vec.ndim != 1 or np.any(vec < 0.0):
                raise ValueError(f"{name} must be a 1-D nonnegative vector")
        if len({self.g_si.size, self.g_pi.size, self.g_id.size}) != 1:
            raise ValueError("per-relay gain vectors must share one length")
        if self.g_pd < 0.0 or self.g_sd < 0.0:
            raise ValueError("scalar gains must be >= 0")


@dataclass(frozen=True)
class MrcResult:
    """Optimal coherent combiner over the decoding set and its output SINR.

    The SINR-maximizing unit-norm weights are proportional to the conjugate
    channel; at the gain level that is sqrt of each member gain, normalized.
    """

    weights: np.ndarray
    sinr: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        if abs(float(np.linalg.norm(w)) - 1.0) > 1e-12:
            raise ValueError(f"combiner weights must have unit norm, got {w}")
        if self.sinr < 0.0:
            raise ValueError(f"sinr must be >= 0, got {self.sinr}")


@dataclass(frozen=True)
class OutageEstimate:
    """Monte Carlo point estimate with its binomial standard error."""

    p_hat: float
    stderr: float
    trials: int
    seed: int

    def __post_init__(self):
        if not (0.0 <= self.p_hat <= 1.0):
            raise ValueError(f"p_hat out of [0,1]: {self.p_hat}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        expected = math.sqrt(self.p_hat * (1.0 - self.p_hat) / self.trials)
        if abs(self.stderr - expected) > 1e-15:
            raise ValueError(f"stderr inconsistent with p_hat and trials: {self}")

    @classmethod
    def from_count(cls, count: int, trials: int, seed: int) -> "OutageEstimate":
        p = count / trials
        return cls(
            p_hat=p,
            stderr=math.sqrt(p * (1.0 - p) / trials),
            trials=trials,
            seed=seed,
        )


def exponential_from_uniform(u, mean):
    """Inverse-CDF map: u in [0,1) -> -mean*ln(1-u).  Elementwise on arrays."""
    return -mean * np.log1p(-u)


def sample_exponential(stream: np.random.Generator, mean: float, size=None):
    """Draw exponential gains of the given mean from the stream."""
    if not (mean > 0.0):
        raise ValueError(f"mean must be > 0, got {mean}")
    return exponential_from_uniform(stream.random(size), mean)


def sample_hypothesis(stream: np.random.Generator, post: Posterior) -> Hypothesis:
    """Draw the true spectrum state conditioned on a declared hole."""
    return Hypothesis.H1 if stream.random() < post.pi1 else Hypothesis.H0


def sample_channel_state(stream: np.random.Generator, params: SystemParams) -> ChannelState:
    """Draw one full sample path, in the fixed per-trial layout.

    Consumption order (one uniform each): source->relay gains, then
    primary->relay, then relay->destination, then the primary->destination
    and source->destination scalars.  The vectorized batch path consumes the
    same columns, which is what makes the scalar path its exact reference.
    """
    n = params.n_relays
    v = params.variances
    u = stream.random(3 * n + 2)
    return ChannelState(
        g_si=exponential_from_uniform(u[0:n], np.asarray(v.sigma2_si)),
        g_pi=exponential_from_uniform(u[n : 2 * n], np.asarray(v.sigma2_pi)),
        g_id=exponential_from_uniform(u[2 * n : 3 * n], v.sigma2_d),
        g_pd=float(exponential_from_uniform(u[3 * n], v.sigma2_pd)),
        g_sd=float(exponential_from_uniform(u[3 * n + 1], v.sigma2_sd)),
    )


def decoding_set(
    state: ChannelState,
    hyp: Hypothesis,
    thr: SnrThreshold,
    params: SystemParams,
) -> DecodingSet:
    """Relays whose first-hop capacity beats the rate: gain above the
    interference-inflated threshold delta*(gamma_p*primary gain + 1), with
    the interference active only under H1."""
    alpha = 1.0 if hyp.interference_on else 0.0
    decoded = state.g_si > thr.delta * (alpha * params.gamma_p * state.g_pi + 1.0)
    mask = 0
    for i, bit in enumerate(decoded):
        if bit:
            mask |= 1 << i
    return DecodingSet(mask=mask, n_relays=params.n_relays)


def mrc_combine(
    state: ChannelState,
    dset: DecodingSet,
    hyp: Hypothesis,
    params: SystemParams,
) -> MrcResult:
    """Coherently combine the decoding set's relay->destination branches.

    Optimal unit-norm weights (Cauchy-Schwarz) align with the channel, and
    the resulting SINR is gamma_s * (sum of member gains) divided by the
    interference-plus-noise level.  Callers must treat an empty decoding set
    as outage; combining nothing is a contract violation.
    """
    if dset.is_empty:
        raise ValueError("cannot combine an empty decoding set")
    members = list(dset.relays())
    gains = state.g_id[members]
    amplitudes = np.sqrt(gains)
    norm = float(np.linalg.norm(amplitudes))
    if norm > 0.0:
        weights = amplitudes / norm
    else:
        # all member gains exactly zero (measure-zero path): any unit vector
        weights = np.full(len(members), 1.0 / math.sqrt(len(members)))
    alpha = 1.0 if hyp.interference_on else 0.0
    sinr = params.gamma_s * float(gains.sum()) / (alpha * params.gamma_p * state.g_pd + 1.0)
    return MrcResult(weights=weights, sinr=sinr)


def _path_outage(
    state: ChannelState,
    hyp: Hypothesis,
    thr: SnrThreshold,
    params: SystemParams,
    scheme: Scheme,
) -> bool:
    # Decode tests are done on the gain scale; combined < delta*(...) is the
    # capacity-below-rate test with the log and the SNR scaling divided out.
    # Expressions mirror the batch kernel exactly so both paths agree bitwise.
    alpha = 1.0 if hyp.interference_on else 0.0
    interference = alpha * params.gamma_p * state.g_pd + 1.0
    if scheme is Scheme.DIRECT:
        return bool(state.g_sd < thr.delta_direct * interference)
    dset = decoding_set(state, hyp, thr, params)
    if dset.is_empty:
        return True
    member = np.zeros(params.n_relays, dtype=bool)
    member[list(dset.relays())] = True
    forwarded = np.where(member, state.g_id, 0.0)
    combined = forwarded.sum() if scheme is Scheme.MULTI_RELAY else forwarded.max()
    return bool(combined < thr.delta * interference)


def trial_outage(stream: np.random.Generator, params: SystemParams, scheme: Scheme) -> bool:
    """Run one conditioned trial: draw the hypothesis, draw all gains, test."""
    post = params.posterior()
    thr = params.snr_threshold()
    hyp = sample_hypothesis(stream, post)
    state = sample_channel_state(stream, params)
    return _path_outage(state, hyp, thr, params, scheme)


def batch_generator(seed: int, batch_index: int) -> np.random.Generator:
    """Counter-based stream for one batch: Philox keyed with (seed, batch)."""
    return np.random.Generator(np.random.Philox(key=(seed & _SEED_MASK, batch_index)))


def _batch_outage_flags(
    params: SystemParams, scheme: Scheme, seed: int, batch_index: int
) -> np.ndarray:
    """Outage flags for one full batch of TRIALS_PER_BATCH trials.

    Row r holds trial batch_index*TRIALS_PER_BATCH + r.  The whole uniform
    matrix is always generated, whatever the scheme or how many trials the
    caller actually needs, so trial outcomes never depend on context.
    """
    post = params.posterior()
    thr = params.snr_threshold()
    n = params.n_relays
    v = params.variances
    gen = batch_generator(seed, batch_index)
    u = gen.random((TRIALS_PER_BATCH, 3 * n + 3))
    alpha = (u[:, 0] < post.pi1).astype(np.float64)
    g_pd = exponential_from_uniform(u[:, 3 * n + 1], v.sigma2_pd)
    interference = alpha * params.gamma_p * g_pd + 1.0
    if scheme is Scheme.DIRECT:
        g_sd = exponential_from_uniform(u[:, 3 * n + 2], v.sigma2_sd)
        return g_sd < thr.delta_direct * interference
    g_si = exponential_from_uniform(u[:, 1 : n + 1], np.asarray(v.sigma2_si))
    g_pi = exponential_from_uniform(u[:, n + 1 : 2 * n + 1], np.asarray(v.sigma2_pi))
    g_id = exponential_from_uniform(u[:, 2 * n + 1 : 3 * n + 1], v.sigma2_d)
    decoded = g_si > thr.delta * (alpha[:, None] * params.gamma_p * g_pi + 1.0)
    forwarded = np.where(decoded, g_id, 0.0)
    combined = forwarded.sum(axis=1) if scheme is Scheme.MULTI_RELAY else forwarded.max(axis=1)
    return combined < thr.delta * interference


def _batch_outage_count(task) -> int:
    params, scheme, seed, batch_index, limit = task
    flags = _batch_outage_flags(params, scheme, seed, batch_index)
    return int(flags[:limit].sum())


def _batch_tasks(params: SystemParams, scheme: Scheme, trials: int, seed: int):
    n_batches = -(-trials // TRIALS_PER_BATCH)
    for b in range(n_batches):
        limit = min(TRIALS_PER_BATCH, trials - b * TRIALS_PER_BATCH)
        yield (params, scheme, seed, b, limit)


def outage_flags(
    params: SystemParams, scheme: Scheme, trials: int, seed: int
) -> np.ndarray:
    """Per-trial outage booleans, trial t at index t.

    Schemes share sample paths at equal (params, seed): comparing the arrays
    of two schemes compares them trial by trial on identical fading draws.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    out = np.empty(trials, dtype=bool)
    for _, _, _, b, limit in _batch_tasks(params, scheme, trials, seed):
        flags = _batch_outage_flags(params, scheme, seed, b)
        start = b * TRIALS_PER_BATCH
        out[start : start + limit] = flags[:limit]
    return out


def estimate_outage(
    params: SystemParams,
    scheme: Scheme,
    trials: int,
    seed: int,
    workers: int = 1,
) -> OutageEstimate:
    """Estimate the outage probability from `trials` independent trials.

    Batches are distributed across `workers` processes; per-batch outage
    counts are integers, so the total is exactly the same whatever the
    worker count or scheduling order.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    seed = seed & _SEED_MASK
    tasks = list(_batch_tasks(params, scheme, trials, seed))
    if workers == 1 or len(tasks) == 1:
        counts = [_batch_outage_count(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(_batch_outage_count, tasks, chunksize=chunk))
    return OutageEstimate.from_count(sum(counts), trials, seed)

"""Counter-based random streams.

Every draw is a pure function of a :class:`StreamKey` (seed, agent, iteration,
channel), so results never depend on the order or thread in which agents are
processed. The mixer is splitmix64 applied field by field; two mixed words
feed a Box-Muller transform.
"""
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)
_S11 = np.uint64(11)
_U1_SALT = np.uint64(0xA0761D6478BD642F)
_U2_SALT = np.uint64(0xE7037ED1A0B428DB)
_ATTEMPT_SALT = 0x8EBC6AF09C88C6E3
_TWO_PI = 2.0 * np.pi
_INV_2_53 = 1.0 / float(1 << 53)

MAX_TRUNCATION_ATTEMPTS = 64


class Channel(IntEnum):
    CONSUMPTION_DRAW = 1
    TRAIT_INIT = 2


@dataclass(frozen=True)
class StreamKey:
    seed: int
    agent_index: int
    iteration: int
    channel: Channel


def _as_u64(values):
    return np.atleast_1d(np.asarray(values, dtype=np.int64)).astype(np.uint64)


def _mix(x):
    """splitmix64 finalizer over a uint64 array (wrapping arithmetic)."""
    z = x + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _word(value):
    return np.array([int(value) & _MASK64], dtype=np.uint64)


def agent_hashes(seed, channel, agents):
    """Per-agent base hashes for one (seed, channel) pair.

    Precomputing these once per run keeps the per-iteration cost to three
    mixes per agent.
    """
    head = _mix(_mix(_word(seed)) ^ _word(int(channel)))
    return _mix(head ^ _as_u64(agents))


def iteration_hashes(base, iteration, attempt=0):
    h = _mix(base ^ _mix(_word(iteration)))
    if attempt:
        h = _mix(h ^ _word(attempt * _ATTEMPT_SALT))
    return h


def _standard_normal(h):
    a = _mix(h ^ _U1_SALT) >> _S11
    b = _mix(h ^ _U2_SALT) >> _S11
    u1 = (a.astype(np.float64) + 1.0) * _INV_2_53  # (0, 1]
    u2 = b.astype(np.float64) * _INV_2_53  # [0, 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def standard_normal_block(base, iteration, attempt=0):
    return _standard_normal(iteration_hashes(base, iteration, attempt))


def normal_block(base, iteration, mean, sd):
    if sd < 0:
        raise ValueError(f"sd must be >= 0, got {sd}")
    return mean + sd * standard_normal_block(base, iteration)


def truncated_normal_block(base, iteration, mean, sd, lo):
    """Normal(mean, sd) conditioned on ``>= lo`` by keyed resampling.

    Draws still below ``lo`` after :data:`MAX_TRUNCATION_ATTEMPTS` attempts
    are set to ``lo``.
    """
    if sd < 0:
        raise ValueError(f"sd must be >= 0, got {sd}")
    if not lo < mean:
        raise ValueError(f"truncation floor {lo} must be below the mean {mean}")
    out = mean + sd * standard_normal_block(base, iteration)
    bad = np.flatnonzero(out < lo)
    attempt = 1
    while bad.size and attempt < MAX_TRUNCATION_ATTEMPTS:
        out[bad] = mean + sd * standard_normal_block(base[bad], iteration, attempt)
        bad = bad[out[bad] < lo]
        attempt += 1
    out[bad] = lo
    return out


def _single_base(key):
    return agent_hashes(key.seed, key.channel, [key.agent_index])


def sample_normal(key, mean, sd):
    """Deterministic Normal(mean, sd) draw for one stream key."""
    return float(normal_block(_single_base(key), key.iteration, mean, sd)[0])


def sample_truncated_normal(key, mean, sd, lo):
    """Deterministic Normal(mean, sd) draw conditioned on ``>= lo``."""
    return float(truncated_normal_block(_single_base(key), key.iteration, mean, sd, lo)[0])


def sample_uniform(key):
    h = iteration_hashes(_single_base(key), key.iteration)
    return float((_mix(h ^ _U2_SALT) >> _S11).astype(np.float64)[0] * _INV_2_53)

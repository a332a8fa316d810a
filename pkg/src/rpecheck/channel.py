"""Single-qubit Pauli transfer matrix simulation of noisy RPE circuits.

States are Pauli vectors ``(1, x, y, z)`` and channels are 4x4 real
matrices acting on them.  The target gate is an x rotation followed by one
of three noise channels; preparation and measurement errors are modelled by
depolarising the preparation and effect vectors and by a small over-rotation
of the sine effect.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import mpmath
import numpy as np

NOISE_KINDS = ("none", "depolarizing", "dephasing", "amplitude_damping")

#: Aliases accepted on the command line.
NOISE_ALIASES = {
    "none": "none",
    "depol": "depolarizing",
    "depolarizing": "depolarizing",
    "dephase": "dephasing",
    "dephasing": "dephasing",
    "ampdamp": "amplitude_damping",
    "amplitude_damping": "amplitude_damping",
}

#: Out-of-range probabilities beyond this are treated as a broken channel.
PROB_SLACK = 1e-9

# Working precision for exact_probabilities; enough headroom for N ~ 2**60.
_MP_DPS = 40

ZERO = np.array([1.0, 0.0, 0.0, 1.0])
PLUS_I = np.array([1.0, 0.0, 1.0, 0.0])

# Measurement pairing P = 1/2 * e^T J s.  The y sign flip makes the sine
# circuit give (1 + sin N*theta)/2 with the x-rotation convention used here.
_PAIRING = np.diag([1.0, 1.0, -1.0, 1.0])


@dataclass(frozen=True)
class NoiseConfig:
    """Gate noise channel, its rate, and SPAM error rates."""

    kind: str = "none"
    rate: float = 0.0
    spam: float = 0.0
    sine_error: float = 0.0

    def __post_init__(self):
        kind = NOISE_ALIASES.get(self.kind)
        if kind is None:
            raise ValueError(f"unknown noise kind {self.kind!r}; choose from {NOISE_KINDS}")
        object.__setattr__(self, "kind", kind)
        for name in ("rate", "spam", "sine_error"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
            object.__setattr__(self, name, v)

    def describe(self) -> dict:
        return {"kind": self.kind, "rate": self.rate, "spam": self.spam, "sine_error": self.sine_error}


def _num(exact):
    if exact:
        return mpmath.mpf, mpmath.cos, mpmath.sin, mpmath.sqrt, object
    return float, math.cos, math.sin, math.sqrt, float


def rx(theta: float, exact: bool = False) -> np.ndarray:
    """Rotation about x by ``theta``, acting on ``(y, z)``."""
    cast, cos, sin, _, dtype = _num(exact)
    t = cast(theta)
    c, s = cos(t), sin(t)
    one, zero = cast(1), cast(0)
    return np.array(
        [
            [one, zero, zero, zero],
            [zero, one, zero, zero],
            [zero, zero, c, -s],
            [zero, zero, s, c],
        ],
        dtype=dtype,
    )


def depolarizing(b: float, exact: bool = False) -> np.ndarray:
    cast, _, _, _, dtype = _num(exact)
    f = 1 - cast(b)
    return np.diag(np.array([cast(1), f, f, f], dtype=dtype))


def dephasing(b: float, exact: bool = False) -> np.ndarray:
    """Dephasing in the x-y plane: the z component is untouched."""
    cast, _, _, _, dtype = _num(exact)
    f = 1 - cast(b)
    return np.diag(np.array([cast(1), f, f, cast(1)], dtype=dtype))


def amplitude_damping(b: float, exact: bool = False) -> np.ndarray:
    """Relaxation from |1> to |0>."""
    cast, _, _, sqrt, dtype = _num(exact)
    b = cast(b)
    m = np.diag(np.array([cast(1), sqrt(1 - b), sqrt(1 - b), 1 - b], dtype=dtype))
    m[3, 0] = b
    return m


def noise_channel(config: NoiseConfig, exact: bool = False) -> np.ndarray:
    if config.kind == "none":
        return depolarizing(0.0, exact)
    return {
        "depolarizing": depolarizing,
        "dephasing": dephasing,
        "amplitude_damping": amplitude_damping,
    }[config.kind](config.rate, exact)


def spam_states(config: NoiseConfig, exact: bool = False):
    """Noisy preparation and the cosine / sine effect vectors."""
    cast = mpmath.mpf if exact else float
    dtype = object if exact else float
    zero = np.array([cast(v) for v in ZERO], dtype=dtype)
    plus_i = np.array([cast(v) for v in PLUS_I], dtype=dtype)
    v_spam = depolarizing(config.spam, exact)
    rho_init = v_spam @ zero
    rho_c = v_spam @ zero
    rho_s = v_spam @ depolarizing(config.sine_error, exact) @ rx(config.sine_error, exact) @ plus_i
    return rho_init, rho_c, rho_s


def matrix_power_apply(G: np.ndarray, N: int, state: np.ndarray) -> np.ndarray:
    """``G**N @ state`` by repeated squaring."""
    N = int(N)
    if N < 0:
        raise ValueError("N must be non-negative")
    out = state
    sq = G
    while N:
        if N & 1:
            out = sq @ out
        N >>= 1
        if N:
            sq = sq @ sq
    return out


def measure(effect: np.ndarray, state: np.ndarray) -> float:
    """Outcome probability of ``effect`` on ``state``."""
    return 0.5 * (effect @ _PAIRING.astype(effect.dtype) @ state)


def _check_prob(p, what):
    p = float(p)
    if p < -PROB_SLACK or p > 1 + PROB_SLACK:
        raise ValueError(f"{what} probability {p!r} outside [0, 1]: channel is not physical")
    return min(max(p, 0.0), 1.0)


def _to_mpfr(a: np.ndarray) -> np.ndarray:
    # decimal round trip with spare digits; exact enough at the working precision
    return np.array([gmpy2.mpfr(mpmath.nstr(v, _MP_DPS + 5, strip_zeros=False)) for v in a.flat], dtype=object).reshape(a.shape)


@lru_cache(maxsize=64)
def _exact_table(config: NoiseConfig, theta: float, ns: tuple) -> tuple:
    with mpmath.workdps(_MP_DPS):
        gate = noise_channel(config, exact=True) @ rx(theta, exact=True)
        rho_init, rho_c, rho_s = spam_states(config, exact=True)
        pairing = _PAIRING.astype(object)
        ec, es = rho_c @ pairing, rho_s @ pairing
        prec = mpmath.mp.prec
    # mpmath builds the matrices, gmpy2 does the bulk arithmetic (same MPFR semantics, far less overhead)
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        gate, rho_init, ec, es = map(_to_mpfr, (gate, rho_init, ec, es))
        # squares G^(2^i), shared by every N in the table
        top = max(ns).bit_length()
        squares = [gate]
        for _ in range(top):
            squares.append(squares[-1] @ squares[-1])
        out = []
        for n in ns:
            state = rho_init
            for i in range(n.bit_length()):
                if (n >> i) & 1:
                    state = squares[i] @ state
            out.append((_check_prob(0.5 * (ec @ state), "cosine"), _check_prob(0.5 * (es @ state), "sine")))
    return tuple(out)


def exact_probabilities(config: NoiseConfig, theta: float, N) -> tuple:
    """Outcome probabilities ``(P_c, P_s)`` after ``N`` noisy gate applications.

    Evaluated in extended precision so that the accumulated rotation angle
    stays accurate for very large ``N``.  ``N`` may also be a sequence, in
    which case a tuple of pairs is returned.
    """
    if np.ndim(N) == 0:
        n = int(N)
        if n < 1:
            raise ValueError("N must be at least 1")
        return _exact_table(config, float(theta), (n,))[0]
    ns = tuple(int(n) for n in N)
    if any(n < 1 for n in ns):
        raise ValueError("N must be at least 1")
    return _exact_table(config, float(theta), ns)


def double_probabilities(config: NoiseConfig, theta: float, N: int) -> tuple:
    """Same as :func:`exact_probabilities` but in plain double precision."""
    gate = noise_channel(config) @ rx(theta)
    rho_init, rho_c, rho_s = spam_states(config)
    state = matrix_power_apply(gate, N, rho_init)
    return _check_prob(measure(rho_c, state), "cosine"), _check_prob(measure(rho_s, state), "sine")


def sample_counts(p: float, M: int, rng: np.random.Generator) -> int:
    """Number of successes in ``M`` shots with success probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p!r}")
    if M < 1:
        raise ValueError("need at least one shot")
    return int(rng.binomial(M, p))


def stream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(master_seed, *key)``.

    Distinct keys give statistically independent streams regardless of the
    order in which they are created.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))))

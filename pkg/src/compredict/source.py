"""Binary Markov sources over shift-register states.

A source of order ``rho`` has ``2**rho`` states.  State ``s`` is the integer
whose binary expansion (most significant bit first) is the last ``rho``
emitted bits, so emitting bit ``b`` moves ``s`` to ``(2*s + b) mod 2**rho``.

Bit sequences are plain ``numpy.uint8`` arrays.  Time ``i`` (1-based, as in
``x(i)``) is array index ``i - 1``.

Randomness comes from numpy's PCG64 generator (``numpy.random.default_rng``),
whose output stream is fixed for a given seed on every platform.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConvergenceError, ParameterError

MIN_ORDER = 2
MAX_ORDER = 16


@dataclass(frozen=True)
class SourceModel:
    """Order-``rho`` Markov chain; ``transition_p1[s]`` is P(1 | s)."""

    order: int
    transition_p1: tuple
    initial_state: int = 0

    def __post_init__(self):
        if not MIN_ORDER <= self.order <= MAX_ORDER:
            raise ParameterError(
                f"order must be in [{MIN_ORDER}, {MAX_ORDER}], got {self.order}")
        table = tuple(float(p) for p in self.transition_p1)
        if len(table) != 1 << self.order:
            raise ParameterError(
                f"transition table needs {1 << self.order} entries, got {len(table)}")
        if any(not 0.0 <= p <= 1.0 for p in table):
            raise ParameterError("transition probabilities must lie in [0, 1]")
        if not 0 <= self.initial_state < len(table):
            raise ParameterError(f"initial_state {self.initial_state} out of range")
        object.__setattr__(self, "transition_p1", table)

    @property
    def n_states(self):
        return 1 << self.order


def uniform_source(order, p1):
    """Source in which every state emits a 1 with probability ``p1``."""
    if not MIN_ORDER <= order <= MAX_ORDER:
        raise ParameterError(f"order must be in [{MIN_ORDER}, {MAX_ORDER}], got {order}")
    if not 0.0 <= p1 <= 1.0:
        raise ParameterError(f"p1 must be in [0, 1], got {p1}")
    return SourceModel(order, (p1,) * (1 << order))


def random_source(order, p1, seed):
    """Source in which each state independently gets P(1|s) = p1 or 1 - p1.

    Every state keeps the two outgoing probabilities {p1, 1 - p1}; a fair coin
    per state decides which transition is the likely one.  The Bayes error is
    therefore min(p1, 1 - p1) whatever the coin flips, but the optimal
    decision depends on the full state.
    """
    if not 0.0 <= p1 <= 1.0:
        raise ParameterError(f"p1 must be in [0, 1], got {p1}")
    if not MIN_ORDER <= order <= MAX_ORDER:
        raise ParameterError(f"order must be in [{MIN_ORDER}, {MAX_ORDER}], got {order}")
    flips = np.random.default_rng(seed).integers(0, 2, size=1 << order)
    return SourceModel(order, tuple(np.where(flips == 1, 1.0 - p1, p1)))


def step(state, order, bit):
    """Shift ``bit`` into ``state``, dropping its most significant bit."""
    return ((state << 1) | bit) & ((1 << order) - 1)


def generate(model, n, seed):
    """Draw ``n`` bits from ``model`` starting at ``model.initial_state``."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    p1 = np.asarray(model.transition_p1)
    u = np.random.default_rng(seed).random(n)
    mask = model.n_states - 1
    state = model.initial_state
    bits = np.empty(n, dtype=np.uint8)
    for i in range(n):
        b = 1 if u[i] < p1[state] else 0
        bits[i] = b
        state = ((state << 1) | b) & mask
    return bits


def stationary_distribution(model, tol=1e-10, max_iter=100_000):
    """Stationary distribution reached from ``model.initial_state``.

    Uses power iteration on the lazy chain (I + P) / 2, which has the same
    stationary distribution as P but converges for periodic chains too.
    """
    n = model.n_states
    p1 = np.asarray(model.transition_p1)
    states = np.arange(n)
    succ0 = (2 * states) % n
    succ1 = (2 * states + 1) % n
    pi = np.zeros(n)
    pi[model.initial_state] = 1.0
    for it in range(1, max_iter + 1):
        moved = (np.bincount(succ0, weights=pi * (1.0 - p1), minlength=n)
                 + np.bincount(succ1, weights=pi * p1, minlength=n))
        nxt = 0.5 * (pi + moved)
        if np.abs(nxt - pi).sum() < tol:
            return nxt / nxt.sum()
        pi = nxt
    raise ConvergenceError("stationary distribution did not converge", max_iter)


def bayes_error(model):
    """Error of the optimal per-state decision under the stationary law."""
    pi = stationary_distribution(model)
    p1 = np.asarray(model.transition_p1)
    return float(np.dot(pi, np.minimum(p1, 1.0 - p1)))


def write_bits(path, bits):
    """Write bits as ASCII '0'/'1' with a trailing newline."""
    text = np.asarray(bits, dtype=np.uint8) + ord("0")
    Path(path).write_bytes(text.tobytes() + b"\n")


def read_bits(path):
    """Read a bit file; any character other than '0'/'1' is rejected.

    A single trailing newline is allowed.
    """
    raw = Path(path).read_bytes()
    if raw.endswith(b"\n"):
        raw = raw[:-1]
    arr = np.frombuffer(raw, dtype=np.uint8)
    bad = np.flatnonzero((arr != ord("0")) & (arr != ord("1")))
    if bad.size:
        raise ValueError(
            f"{path}: invalid character {raw[bad[0]:bad[0] + 1]!r} at offset {bad[0]}")
    return (arr - ord("0")).astype(np.uint8)

"""Next-bit prediction by comparing compressed lengths.

Time i refers to ``x[i - 1]``.  Predicting time i uses only the window
``x[i - 1 - h : i - 1]``; the true bit is revealed after the decision.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .codec import build_alphabet, encode_history, make_candidates, splice
from .compressor import CompressorSpec, make_compressor
from .errors import ParameterError

SCORES = ("s1", "s2", "syx")
MAX_BLOCK = 8


@dataclass(frozen=True)
class PredictorParams:
    h: int
    k: int
    r: int = 20
    q: int = 100
    score: str = "syx"
    compressor: CompressorSpec = field(default_factory=CompressorSpec)
    seed: int = 0

    def __post_init__(self):
        if self.h < self.k + 1:
            raise ParameterError(f"h must be >= k + 1, got h={self.h}, k={self.k}")
        if self.r < 1 or self.q < 1:
            raise ParameterError(f"r and q must be >= 1, got r={self.r}, q={self.q}")
        if self.score not in SCORES:
            raise ParameterError(f"unknown score {self.score!r}")


@dataclass
class PredictionTrace:
    """Outcome of one prediction run over times m+1..n."""

    decisions: np.ndarray
    truth: np.ndarray
    errors: int
    scores: list = None  # (score0, score1, tie) per step, when recorded

    @property
    def n_pred(self):
        return len(self.decisions)

    @property
    def p_err(self):
        return self.errors / self.n_pred

    def write_csv(self, path, m):
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["i", "decision", "truth", "score0", "score1", "tie", "cumulative_err"])
            wrong = np.cumsum(self.decisions != self.truth)
            for j in range(self.n_pred):
                s0, s1, tie = self.scores[j] if self.scores else ("", "", "")
                w.writerow([m + 1 + j, int(self.decisions[j]), int(self.truth[j]),
                            s0, s1, "" if tie == "" else int(tie), int(wrong[j])])


def _bit_bytes(bits):
    return (np.asarray(bits, dtype=np.uint8) + ord("0")).tobytes()


def score_s1(x_h, y, spec):
    """lambda(x_h y); lower is better."""
    return make_compressor(spec).compressed_length(bytes(x_h) + bytes(y))


def score_s2(x_h, y, spec):
    """lambda(x_h) - (lambda(y x_h) - lambda(y)); higher is better."""
    c = make_compressor(spec)
    x_h, y = bytes(x_h), bytes(y)
    return c.compressed_length(x_h) - (c.compressed_length(y + x_h) - c.compressed_length(y))


def score_syx(xi, chi, spec, chi_length=None):
    """lambda(xi) - (lambda(chi with xi spliced in) - lambda(chi)); higher is better.

    Pass ``chi_length`` to reuse lambda(chi) across candidates.
    """
    c = make_compressor(spec)
    if chi_length is None:
        chi_length = c.compressed_length(chi.data)
    spliced = splice(chi, xi)
    return c.compressed_length(xi.data) - (c.compressed_length(spliced) - chi_length)


class _StepScorer:
    """Scores both candidates of a step with three coded lengths.

    lambda(chi) and both spliced lengths share the prefix chi minus its
    trailer, so backends with a fused ``extension_lengths`` code it once.
    lambda(xi) depends only on the trailer state and is cached.
    """

    def __init__(self, params):
        self.params = params
        self.backend = make_compressor(params.compressor)
        self.alphabet = build_alphabet(params.k, params.seed)
        self._xi_length = {}

    def xi_length(self, xi):
        n = self._xi_length.get(xi.data)
        if n is None:
            n = self._xi_length[xi.data] = self.backend.compressed_length(xi.data)
        return n

    def scores(self, window):
        p = self.params
        chi = encode_history(window, p.k, p.r, self.alphabet)
        cands = make_candidates(chi, self.alphabet, p.q)
        for c in cands:
            splice(chi, c)  # grammar check only
        lam_chi, lam0, lam1 = self.backend.extension_lengths(
            chi.data[:-2], [chi.data[-2:], cands[0].data, cands[1].data])
        return (self.xi_length(cands[0]) - (lam0 - lam_chi),
                self.xi_length(cands[1]) - (lam1 - lam_chi))


def _decide(s0, s1, rng):
    if s0 == s1:
        return int(rng.random() < 0.5), True
    return int(s1 > s0), False


def predict_step(history_bits, params, alphabet=None, rng=None, scorer=None):
    """Predicted next bit plus (score0, score1, tie)."""
    if len(history_bits) < params.k + 1:
        raise ParameterError(f"history of {len(history_bits)} bits is shorter than k + 1")
    if scorer is None:
        scorer = _StepScorer(params)
        if alphabet is not None:
            scorer.alphabet = alphabet
    if rng is None:
        rng = tie_rng(params.seed)
    s0, s1 = scorer.scores(history_bits)
    bit, tie = _decide(s0, s1, rng)
    return bit, (s0, s1, tie)


def tie_rng(seed):
    return np.random.default_rng([seed, 1])


def run_prediction(x, m, params, record_scores=True):
    """Predict times m+1..len(x) with the compression-based scorer."""
    x = np.asarray(x, dtype=np.uint8)
    n = len(x)
    if m < params.h:
        raise ParameterError(f"m must be >= h, got m={m}, h={params.h}")
    if n <= m:
        raise ParameterError(f"need more than m={m} bits, got {n}")
    if params.score != "syx":
        raise ParameterError("run_prediction uses the syx score; see run_block_prediction")
    scorer = _StepScorer(params)
    rng = tie_rng(params.seed)
    decisions = np.empty(n - m, dtype=np.uint8)
    scores = [] if record_scores else None
    for j, i in enumerate(range(m + 1, n + 1)):
        bit, diag = predict_step(x[i - 1 - params.h:i - 1], params, rng=rng, scorer=scorer)
        decisions[j] = bit
        if record_scores:
            scores.append(diag)
    truth = x[m:].copy()
    return PredictionTrace(decisions, truth, int(np.sum(decisions != truth)), scores)


def run_block_prediction(x, m, h, l, score, spec, seed):
    """Vote-based predictor over all 2**l candidate blocks of raw bits.

    For every time i in m+1..n-l the best block y (by ``score``) for
    positions i..i+l-1 casts a vote: alpha counts votes, beta counts votes
    for 1.  D(i) = 1 iff beta_i >= alpha_i / 2.
    """
    if not 1 <= l <= MAX_BLOCK:
        raise ParameterError(f"block length must be in [1, {MAX_BLOCK}], got {l}")
    if score not in ("s1", "s2"):
        raise ParameterError(f"block prediction uses s1 or s2, got {score!r}")
    x = np.asarray(x, dtype=np.uint8)
    n = len(x)
    if m < h:
        raise ParameterError(f"m must be >= h, got m={m}, h={h}")
    if n <= m:
        raise ParameterError(f"need more than m={m} bits, got {n}")
    backend = make_compressor(spec)
    rng = np.random.default_rng([seed, 2])
    blocks = np.array([[(v >> (l - 1 - t)) & 1 for t in range(l)] for v in range(1 << l)],
                      dtype=np.uint8)
    tails = [_bit_bytes(b) for b in blocks]
    lam_y = [backend.compressed_length(t) for t in tails] if score == "s2" else None
    choices = []
    for i in range(m + 1, n - l + 1):
        x_h = _bit_bytes(x[i - 1 - h:i - 1])
        if score == "s1":
            vals = -np.array(backend.extension_lengths(x_h, tails))
        else:
            lam_x = backend.compressed_length(x_h)
            vals = np.array([lam_x - (backend.compressed_length(t + x_h) - lam_y[v])
                             for v, t in enumerate(tails)])
        best = np.flatnonzero(vals == vals.max())
        choices.append(blocks[best[0] if len(best) == 1 else rng.choice(best)])
    alpha, beta = tally_votes(choices, m, n, l)
    d = (2 * beta[m + 1:] >= alpha[m + 1:]).astype(np.uint8)
    truth = x[m:].copy()
    return PredictionTrace(d, truth, int(np.sum(d != truth)))


def tally_votes(choices, m, n, l):
    """alpha[t], beta[t] for t in 0..n from the blocks chosen at i = m+1, m+2, ...

    The block chosen at time i covers times i..i+l-1.
    """
    alpha = np.zeros(n + 1, dtype=np.int64)
    beta = np.zeros(n + 1, dtype=np.int64)
    for j, block in enumerate(choices):
        i = m + 1 + j
        alpha[i:i + l] += 1
        beta[i:i + l] += np.asarray(block)
    return alpha, beta

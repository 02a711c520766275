import csv

import numpy as np
import pytest

from compredict import source
from compredict.codec import build_alphabet, encode_history, make_candidates
from compredict.compressor import Compressor, CompressorSpec, PPMCompressor
from compredict.errors import ParameterError
from compredict.predictor import (PredictorParams, _StepScorer, predict_step, run_block_prediction,
                                  run_prediction, score_s1, score_s2, score_syx, tally_votes)

from ._reference import naive_decisions

PPM6 = CompressorSpec("ppm", 6)


class LengthCompressor(Compressor):
    """lambda(x) = len(x): every candidate pair ties."""

    def compressed_length(self, data):
        return len(data)


class OffsetCompressor(Compressor):
    """A real backend plus a constant."""

    def __init__(self, inner, offset):
        self.inner, self.offset = inner, offset

    def compressed_length(self, data):
        return self.inner.compressed_length(data) + self.offset


def golden_run(d, n_pred=300):
    x = source.generate(source.random_source(4, 0.3, 4), 2000 + n_pred, 4)
    params = PredictorParams(2000, 4, compressor=CompressorSpec("ppm", d), seed=4)
    return x, params


def test_params_validation():
    with pytest.raises(ParameterError):
        PredictorParams(h=4, k=4)
    with pytest.raises(ParameterError):
        PredictorParams(h=100, k=4, r=0)
    with pytest.raises(ParameterError):
        PredictorParams(h=100, k=4, q=0)
    with pytest.raises(ParameterError):
        PredictorParams(h=100, k=4, score="s3")


def test_score_s1():
    x = b"0110100110010110" * 8
    assert score_s1(x, b"", PPM6) == PPMCompressor(6).compressed_length(x)
    assert score_s1(x, b"0101", PPM6) == score_s1(x, b"0101", PPM6)


def test_score_s2():
    x = b"0110100110010110" * 8
    assert score_s2(x, b"", PPM6) == 9  # lambda of the empty string
    assert score_s2(x, b"0101", PPM6) == score_s2(x, b"0101", PPM6)


def test_score_s2_self_information_positive():
    for seed in range(10):
        x = (source.generate(source.random_source(3, 0.3, seed), 400, seed) + ord("0")).tobytes()
        assert score_s2(x, x, PPM6) > 0


def test_score_syx_with_length_compressor_is_two():
    al = build_alphabet(4, 0)
    chi = encode_history(source.generate(source.uniform_source(3, 0.3), 60, 1), 4, 3, al)
    for cand in make_candidates(chi, al, 2):
        assert score_syx(cand, chi, LengthCompressor()) == 2


def test_score_syx_cached_equals_uncached():
    x, params = golden_run(6, n_pred=1)
    scorer = _StepScorer(params)
    chi = encode_history(x[:2000], 4, 20, scorer.alphabet)
    cands = make_candidates(chi, scorer.alphabet, 100)
    lam_chi = PPMCompressor(6).compressed_length(chi.data)
    uncached = [score_syx(c, chi, PPM6) for c in cands]
    assert [score_syx(c, chi, PPM6, chi_length=lam_chi) for c in cands] == uncached
    assert list(scorer.scores(x[:2000])) == uncached


def test_true_transition_scores_higher_on_golden_run():
    x, params = golden_run(6)
    trace = run_prediction(x, 2000, params)
    wins = [(s1 > s0) if t else (s0 > s1) for (s0, s1, _), t in zip(trace.scores, trace.truth)]
    assert np.mean(wins) >= 0.60


def test_golden_decisions_are_pinned():
    x, params = golden_run(6, n_pred=50)
    assert "".join(map(str, run_prediction(x, 2000, params).decisions)) == \
        "01110101001010010110001101111100000010011110111001"
    x, params = golden_run(2, n_pred=50)
    assert "".join(map(str, run_prediction(x, 2000, params).decisions)) == \
        "00001100110110011111011011011011011111010110110011"


def test_golden_run_repeats_exactly():
    x, params = golden_run(6, n_pred=40)
    a, b = run_prediction(x, 2000, params), run_prediction(x, 2000, params)
    assert a.p_err == b.p_err and np.array_equal(a.decisions, b.decisions)
    assert a.scores == b.scores


def test_length_compressor_ties_every_step():
    x = source.generate(source.uniform_source(2, 0.5), 400, 3)
    params = PredictorParams(20, 3, r=2, q=2, compressor=LengthCompressor(), seed=5)
    trace = run_prediction(x, 20, params)
    assert all(tie for _, _, tie in trace.scores)
    assert 0.35 < trace.decisions.mean() < 0.65


def test_constant_offset_never_changes_decisions():
    x = source.generate(source.random_source(3, 0.3, 1), 360, 1)
    base = PredictorParams(300, 3, r=5, q=20, compressor=PPMCompressor(3), seed=1)
    shifted = PredictorParams(300, 3, r=5, q=20, compressor=OffsetCompressor(PPMCompressor(3), 17),
                              seed=1)
    a, b = run_prediction(x, 300, base), run_prediction(x, 300, shifted)
    assert np.array_equal(a.decisions, b.decisions)
    assert all(sb - sa == 17 for (sa, _, _), (sb, _, _) in zip(a.scores, b.scores))


def test_all_ones_source_predicts_one():
    x = source.generate(source.uniform_source(4, 1.0), 260, 0)
    params = PredictorParams(200, 4, compressor=CompressorSpec("ppm", 6))
    assert run_prediction(x, 200, params).decisions.tolist() == [1] * 60


def test_all_zeros_source_is_predicted():
    x = source.generate(source.uniform_source(3, 0.0), 300, 0)
    params = PredictorParams(200, 3, compressor=CompressorSpec("ppm", 6))
    assert run_prediction(x, 200, params).p_err <= 0.01


def test_predict_step_matches_run():
    x, params = golden_run(3, n_pred=3)
    trace = run_prediction(x, 2000, params)
    bit, (s0, s1, tie) = predict_step(x[:2000], params)
    assert (s0, s1, tie) == trace.scores[0] and bit == trace.decisions[0]
    with pytest.raises(ParameterError):
        predict_step(x[:4], params)


def test_matches_naive_reference():
    for i in range(3):
        x = source.generate(source.random_source(3, 0.3, i), 250, i)
        params = PredictorParams(200, 4, r=5, q=10, compressor=PPMCompressor(3), seed=i)
        assert run_prediction(x, 200, params).decisions.tolist() == naive_decisions(x, 200, params)


def test_trace_invariants_and_errors():
    x = source.generate(source.random_source(3, 0.3, 2), 260, 2)
    params = PredictorParams(200, 4, r=5, q=10, compressor=PPMCompressor(3))
    t = run_prediction(x, 210, params)
    assert t.n_pred == 50 and 0 <= t.errors <= 50
    assert t.p_err == t.errors / 50
    assert t.errors == int(np.sum(t.decisions != x[210:]))
    with pytest.raises(ParameterError):
        run_prediction(x, 100, params)
    with pytest.raises(ParameterError):
        run_prediction(x, 260, params)


def test_trace_csv(tmp_path):
    x = source.generate(source.random_source(3, 0.3, 2), 220, 2)
    params = PredictorParams(200, 4, r=5, q=10, compressor=PPMCompressor(3))
    t = run_prediction(x, 200, params)
    t.write_csv(tmp_path / "t.csv", 200)
    rows = list(csv.DictReader(open(tmp_path / "t.csv")))
    assert list(rows[0]) == ["i", "decision", "truth", "score0", "score1", "tie", "cumulative_err"]
    assert [int(r["i"]) for r in rows] == list(range(201, 221))
    assert int(rows[-1]["cumulative_err"]) == t.errors


def test_tally_votes_bookkeeping():
    alpha, beta = tally_votes([[1, 0, 1]], m=10, n=20, l=3)
    assert alpha[11:14].tolist() == [1, 1, 1] and beta[11:14].tolist() == [1, 0, 1]
    assert alpha.sum() == 3 and beta.sum() == 2


def test_block_l1_is_per_bit_scoring():
    x = source.generate(source.uniform_source(2, 0.3), 160, 3)
    t = run_block_prediction(x, 100, 100, 1, "s1", PPM6, 0)
    assert t.n_pred == 60
    # with l=1 each time gets at most one vote; the last time gets none and defaults to 1
    assert t.decisions[-1] == 1


def test_block_s2_runs():
    x = source.generate(source.uniform_source(2, 0.3), 140, 3)
    t = run_block_prediction(x, 100, 100, 2, "s2", PPM6, 0)
    assert t.n_pred == 40


def test_block_validation():
    x = np.zeros(200, dtype=np.uint8)
    for l in (0, 9):
        with pytest.raises(ParameterError):
            run_block_prediction(x, 100, 100, l, "s1", PPM6, 0)
    with pytest.raises(ParameterError):
        run_block_prediction(x, 50, 100, 1, "s1", PPM6, 0)
    with pytest.raises(ParameterError):
        run_block_prediction(x, 100, 100, 1, "syx", PPM6, 0)

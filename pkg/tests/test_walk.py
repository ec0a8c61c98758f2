"""Batch/path simulation: determinism, observable agreement, CSV round-trips."""

import io
import math

import numpy as np
import pytest

import example_checks as ec
from fuchsianwalk import groups, sl2, stats, walk, words
from fuchsianwalk.errors import NumericFailure, ParseError, ValidationError
from fuchsianwalk.sl2 import ElementClass
from fuchsianwalk.walk import StepLaw, WalkSample


def test_step_law_normalizes():
    law = StepLaw((2.0, 2.0, 4.0))
    assert abs(sum(law.weights) - 1.0) <= 1e-15
    assert abs(law.weights[2] - 0.5) <= 1e-15
    assert StepLaw.uniform(4).weights == (0.25,) * 4


def test_step_law_rejects_bad_weights():
    for bad in ((), (1.0, -1.0), (0.0, 0.0), (1.0, math.nan), (1.0, math.inf)):
        with pytest.raises((ValidationError, NumericFailure)):
            StepLaw(bad)


def test_step_law_cumulative_covers_unit_interval():
    law = StepLaw((1.0, 1.0, 1.0))  # thirds don't sum to 1.0 exactly in floats
    cum = law.cumulative
    assert cum[-1] == 1.0
    assert np.all(np.diff(cum) > 0)


def test_reference_walks():
    ec.check_deterministic_walk_samples()
    ec.check_thread_count_invariance()


def test_two_step_word_frequencies():
    ec.check_two_step_word_frequencies()


def test_batch_rejects_mismatched_law():
    gens = groups.sanov()
    with pytest.raises(ValidationError):
        walk.simulate_batch(gens, StepLaw.uniform(3), 5, 10, seed=0)
    with pytest.raises(ValueError):
        walk.simulate_batch(gens, StepLaw.uniform(4), 0, 10, seed=0)


def test_batch_observables_match_scalar_route():
    # the vectorized kernel and the ScaledMat code path must agree on every
    # observable for the same sampled word
    gens = groups.sanov()
    batch = walk.simulate_batch(gens, StepLaw.uniform(4), 30, 120, seed=21,
                                keep_words=True)
    for s in batch:
        g = words.evaluate(s.word, gens)
        log_norm, sign, logabs, cls, geom = sl2.observe(g)
        assert abs(s.log_norm - log_norm) <= 1e-9 * max(1.0, abs(log_norm))
        assert s.trace_sign == sign
        if math.isinf(logabs):
            assert math.isinf(s.log_abs_trace)
        else:
            assert abs(s.log_abs_trace - logabs) <= 1e-9 * max(1.0, abs(logabs))
        assert s.cls is cls
        if cls is ElementClass.HYPERBOLIC:
            assert abs(s.geom_length - geom) <= 1e-9 * max(1.0, geom)
        else:
            assert s.geom_length is None


def test_pants_batch_matches_scalar_route():
    # irrational generator entries make backtracking words cancel inexactly,
    # so the two renormalization schemes drift apart; 1e-6 still catches any
    # ordering or indexing bug, which shows up at O(1)
    gens = groups.pants(0.6, 2.2, 9.0)
    batch = walk.simulate_batch(gens, StepLaw.uniform(4), 25, 60, seed=4,
                                keep_words=True)
    for s in batch:
        log_norm, sign, logabs, cls, geom = sl2.observe(words.evaluate(s.word, gens))
        assert abs(s.log_norm - log_norm) <= 1e-6 * max(1.0, abs(log_norm))
        assert s.cls is cls


def test_log_norm_growth_bounded_by_generators():
    gens = groups.sanov()
    cap = max(sl2.log_op_norm(sl2.from_mat2(m)) for m in gens.mats)
    batch = walk.simulate_batch(gens, StepLaw.uniform(4), 40, 200, seed=5)
    for s in batch:
        assert -1e-9 <= s.log_norm <= 40 * cap + 1e-9


def test_path_reference_behavior():
    ec.check_path_checkpoint_shape()
    ec.check_path_deterministic_growth()
    ec.check_path_prefix_property()


def test_path_equals_batch_sample_zero():
    # sample 0 of a batch and a single path share the (seed, 0) stream and the
    # same arithmetic, so the final observables agree bit for bit
    gens = groups.sanov()
    law = StepLaw.uniform(4)
    for seed in (0, 1, 99):
        batch = walk.simulate_batch(gens, law, 64, 3, seed=seed)
        traj = walk.simulate_path(gens, law, 64, seed=seed)
        last = traj.checkpoints[-1]
        s0 = batch[0]
        assert (last.log_norm, last.trace_sign, last.log_abs_trace, last.cls) == (
            s0.log_norm, s0.trace_sign, s0.log_abs_trace, s0.cls)


def test_path_stride_and_final_checkpoint():
    gens = groups.sanov()
    traj = walk.simulate_path(gens, StepLaw.uniform(4), 10, seed=0,
                              checkpoint_stride=4)
    assert [c.n for c in traj.checkpoints] == [4, 8, 10]


def test_exact_distribution_values_appear_in_batches():
    # per-word arithmetic is shared, so simulated log_norms are exactly atom
    # values of the enumerated distribution
    gens = groups.sanov()
    law = StepLaw.uniform(4)
    dist = stats.exact_distribution(gens, law, 5)
    atom_keys = {round(a.log_norm, 12) for a in dist.atoms}
    batch = walk.simulate_batch(gens, law, 5, 4096, seed=13)
    for s in batch:
        assert round(s.log_norm, 12) in atom_keys


def _roundtrip(samples, gens=None):
    buf = io.StringIO()
    walk.write_samples_csv(samples, buf, gens)
    buf.seek(0)
    return walk.read_samples_csv(buf, gens)


def test_csv_header_and_roundtrip():
    gens = groups.sanov()
    batch = walk.simulate_batch(gens, StepLaw.uniform(4), 12, 40, seed=2,
                                keep_words=True)
    buf = io.StringIO()
    walk.write_samples_csv(batch, buf, gens)
    text = buf.getvalue()
    assert text.splitlines()[0] == (
        "index,n,log_norm,trace_sign,log_abs_trace,class,geom_length,word")
    assert _roundtrip(batch, gens) == batch


def test_csv_roundtrip_without_words():
    gens = groups.sanov()
    batch = walk.simulate_batch(gens, StepLaw.uniform(4), 12, 40, seed=2)
    assert _roundtrip(batch) == batch


def test_csv_rewrite_is_bitwise_stable():
    gens = groups.sanov()
    batch = walk.simulate_batch(gens, StepLaw.uniform(4), 9, 25, seed=6,
                                keep_words=True)
    buf1 = io.StringIO()
    walk.write_samples_csv(batch, buf1, gens)
    buf2 = io.StringIO()
    walk.write_samples_csv(_roundtrip(batch, gens), buf2, gens)
    assert buf1.getvalue() == buf2.getvalue()


def test_csv_word_requires_generators():
    gens = groups.sanov()
    batch = walk.simulate_batch(gens, StepLaw.uniform(4), 5, 4, seed=0,
                                keep_words=True)
    with pytest.raises(ValidationError):
        walk.write_samples_csv(batch, io.StringIO())


def test_csv_read_rejects_bad_header():
    with pytest.raises(ParseError):
        walk.read_samples_csv(io.StringIO("a,b,c\n1,2,3\n"))


def test_csv_read_rejects_geom_on_parabolic():
    text = ("index,n,log_norm,trace_sign,log_abs_trace,class,geom_length,word\n"
            "0,4,1.0,1,0.69,P,3.5,\n")
    with pytest.raises(ValidationError):
        walk.read_samples_csv(io.StringIO(text))


def test_failed_rows_roundtrip():
    s = WalkSample(3, 7, math.nan, 0, math.nan, None, None, None, True)
    back = _roundtrip([s])
    assert len(back) == 1 and back[0].failed
    assert back[0].cls is None and back[0].index == 3 and back[0].n == 7

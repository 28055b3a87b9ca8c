import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as ss

from ginprod.ensembles import (MAGIC, RngStream, batch_digest, haar_unitary, read_batch, sample_batch,
                               sample_campaign, sample_trajectory, sample_truncated_unitary,
                               standard_complex_normal, write_batch)
from ginprod.process import ConfigError, GinibreSource, ProcessSpec, TruncatedUnitary
from ginprod.stats import sum_rule


@given(seed=st.integers(0, 2 ** 64 - 1), sid=st.integers(0, 2 ** 20))
@settings(max_examples=25, deadline=None)
def test_streams_are_reproducible(seed, sid):
    a = RngStream(seed, sid).generator().random(4)
    b = RngStream(seed, sid).generator().random(4)
    c = RngStream(seed, sid + 1).generator().random(4)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_stream_validation():
    with pytest.raises(ConfigError):
        RngStream(-1).generator()


def test_complex_normal_moments():
    z = standard_complex_normal(RngStream(5).generator(), 200_000)
    assert abs(np.mean(np.abs(z) ** 2) - 1) < 0.01
    assert abs(np.mean(z)) < 0.01 and abs(np.mean(z ** 2)) < 0.01


def test_haar_unitary():
    U = haar_unitary(6, RngStream(1).generator(), batch=4000)
    eye = np.eye(6)
    assert np.max(np.abs(np.conj(np.swapaxes(U, 1, 2)) @ U - eye)) < 1e-12
    # |U_11|^2 ~ Beta(1, l-1); the phase of U_11 is uniform
    assert ss.kstest(np.abs(U[:, 0, 0]) ** 2, ss.beta(1, 5).cdf).pvalue > 1e-3
    assert ss.kstest(np.angle(U[:, 0, 0]), ss.uniform(-np.pi, 2 * np.pi).cdf).pvalue > 1e-3


def test_truncation_is_contraction():
    T = sample_truncated_unitary(7, 3, 2, RngStream(2).generator(), batch=100)
    assert T.shape == (100, 3, 2)
    assert np.all(np.linalg.svd(T, compute_uv=False) <= 1 + 1e-12)
    with pytest.raises(ConfigError):
        sample_truncated_unitary(2, 3, 2, RngStream(2).generator())


def test_batch_shape_order_and_trajectory(specs22):
    for spec in specs22.values():
        b = sample_batch(spec, 50, RngStream(3))
        assert b.shape == (50, 2, 2)
        assert np.all(np.diff(b, axis=2) <= 0) and np.all(b > 0)
    tr = sample_trajectory(specs22["ginibre"], RngStream(3))
    assert np.array_equal(tr, sample_batch(specs22["ginibre"], 1, RngStream(3))[0])
    assert sample_trajectory(specs22["ginibre"], np.random.default_rng(0)).shape == (2, 2)


def test_campaign_chunking_and_workers(specs22):
    spec = specs22["ginibre"]
    a = sample_campaign(spec, 7, seed=11, chunk=3)
    b = sample_campaign(spec, 7, seed=11, chunk=3, workers=3)
    parts = [sample_batch(spec, k, RngStream(11, i)) for i, k in enumerate((3, 3, 1))]
    assert np.array_equal(a, b) and np.array_equal(a, np.concatenate(parts))
    with pytest.raises(ConfigError):
        sample_campaign(spec, 0, seed=1)


def test_file_round_trip(tmp_path, specs22):
    spec = specs22["truncated"]
    b = sample_campaign(spec, 20, seed=9)
    path = tmp_path / "t.bin"
    write_batch(path, spec, 9, b)
    back, head = read_batch(path, spec)
    assert np.array_equal(back, b) and head["seed"] == 9 and head["count"] == 20
    assert batch_digest(back) == batch_digest(b)
    assert path.read_bytes()[:8] == MAGIC
    with pytest.raises(ConfigError):
        read_batch(path, specs22["ginibre"])
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ConfigError):
        read_batch(path)
    path.write_bytes(b"NOTMAGIC" + bytes(64))
    with pytest.raises(ConfigError):
        read_batch(path)
    with pytest.raises(ConfigError):
        write_batch(path, specs22["ginibre"], 1, np.zeros((2, 3, 2)))


def test_source_rank_one_mean():
    q = 1.7
    spec = ProcessSpec.build(1, 1, [0], GinibreSource((q,)))
    x = sample_campaign(spec, 100_000, seed=4)[:, 0, 0]
    # |g + sqrt q|^2 with E|g|^2 = 1
    assert abs(x.mean() - (1 + q)) < 4 * x.std() / np.sqrt(len(x))


def test_ginibre_sum_rule():
    spec = ProcessSpec.build(2, 3, [0, 1, 0])
    checks = sum_rule(sample_campaign(spec, 20_000, seed=8), spec)
    assert [c.expected for c in checks] == [4.0, 12.0, 24.0]
    assert all(c.passed() for c in checks)
    with pytest.raises(ConfigError):
        sum_rule(np.ones((3, 1, 1)), ProcessSpec.build(1, 1, [0], TruncatedUnitary(3)))

import io
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slabsvm.data import (
    DataError,
    Dataset,
    ToyConfig,
    load_csv,
    load_letter,
    load_libsvm,
    load_plain,
    one_vs_rest,
    sample_bivariate_normal,
    splitmix64,
    standard_normals,
    uniforms,
    write_csv,
)

LETTER_FILE = Path(__file__).resolve().parents[1] / "data" / "letter-recognition.data"
MASK = (1 << 64) - 1


def splitmix_reference(seed, count):
    """Scalar SplitMix64 on Python integers."""
    out, state = [], seed & MASK
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        out.append(z ^ (z >> 31))
    return out


class TestLetter:
    def test_single_line(self):
        ds = load_letter(io.StringIO("T,2,8,3,5,1,8,13,0,6,6,10,8,0,8,0,8\n"))
        assert ds.labels == ("T",)
        assert ds.features.shape == (1, 16)
        assert ds.features[0, 6] == 13.0

    def test_empty(self):
        with pytest.raises(DataError):
            load_letter(io.StringIO(""))

    def test_malformed_line_number(self):
        text = "A,1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,0\nB,1,2\n"
        with pytest.raises(DataError, match=":2:"):
            load_letter(io.StringIO(text))

    def test_non_integer(self):
        with pytest.raises(DataError):
            load_letter(io.StringIO("A,1.5,2,3,4,5,6,7,8,9,10,11,12,13,14,15,0\n"))

    def test_out_of_range_warns(self):
        with pytest.warns(UserWarning, match="outside"):
            ds = load_letter(io.StringIO("A,16,2,3,4,5,6,7,8,9,10,11,12,13,14,15,0\n"))
        assert ds.features[0, 0] == 16.0

    @pytest.mark.skipif(not LETTER_FILE.exists(), reason="letter data not present")
    def test_full_file(self):
        ds = load_letter(LETTER_FILE)
        assert ds.features.shape == (20000, 16)
        assert len(ds.classes) == 26
        assert ds.features.min() >= 0 and ds.features.max() <= 15


class TestLibsvm:
    def test_example(self):
        ds = load_libsvm(io.StringIO("+1 1:0.5 3:2\n"))
        np.testing.assert_array_equal(ds.features, [[0.5, 0.0, 2.0]])
        assert ds.labels == ("+1",)

    def test_explicit_dim(self):
        ds = load_libsvm(io.StringIO("1 2:1\n-1 1:3\n"), dim=4)
        np.testing.assert_array_equal(ds.features, [[0, 1, 0, 0], [3, 0, 0, 0]])

    @pytest.mark.parametrize("line", ["1 3:1 2:1", "1 2:1 2:3", "1 0:1", "1 1:abc", "1 1-2"])
    def test_rejects(self, line):
        with pytest.raises(DataError):
            load_libsvm(io.StringIO(line + "\n"))


class TestCsv:
    def test_mixed_dimension(self):
        with pytest.raises(DataError):
            load_csv(io.StringIO("label,a,b\nx,1,2\ny,3\n"))

    def test_header_detection(self):
        ds = load_csv(io.StringIO("a,label,b\n1,cat,2\n3,dog,4\n"))
        assert ds.labels == ("cat", "dog")
        np.testing.assert_array_equal(ds.features, [[1, 2], [3, 4]])

    def test_headerless_text_labels(self):
        ds = load_csv(io.StringIO("cat,1,2\ndog,3,4\n"))
        assert ds.labels == ("cat", "dog")

    def test_unlabelled(self):
        ds = load_csv(io.StringIO("1,2\n3,4\n"), label_column=None)
        assert ds.labels == ("?", "?")

    def test_roundtrip_bytes(self):
        rng = np.random.default_rng(0)
        ds = Dataset(rng.normal(size=(25, 3)) * 10.0 ** rng.integers(-5, 5, (25, 3)),
                     [f"c{i % 3}" for i in range(25)])
        text = write_csv(ds)
        back = load_csv(io.StringIO(text))
        assert np.array_equal(back.features, ds.features)
        assert write_csv(back) == text

    def test_normalizes_then_roundtrips(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("label, x1 ,x2\nA, 1 ,2.50\n\nB,3e0,-0\n")
        first = write_csv(load_csv(path))
        assert first == "label,x1,x2\nA,1.0,2.5\nB,3.0,-0.0\n"
        assert write_csv(load_csv(io.StringIO(first))) == first


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=2, max_size=2),
                min_size=1, max_size=10))
def test_csv_roundtrip_property(rows):
    ds = Dataset(np.array(rows), ["k"] * len(rows))
    back = load_csv(io.StringIO(write_csv(ds)))
    assert np.array_equal(back.features, ds.features)


class TestPlain:
    def test_whitespace_and_commas(self):
        np.testing.assert_array_equal(load_plain(io.StringIO("1 2\n3,4\n")), [[1, 2], [3, 4]])

    def test_empty(self):
        assert load_plain(io.StringIO("\n")).shape == (0, 0)

    def test_ragged(self):
        with pytest.raises(DataError):
            load_plain(io.StringIO("1 2\n3\n"))


class TestOneVsRest:
    @pytest.fixture
    def data(self):
        labels = list("ABCABCABCA")
        return Dataset(np.arange(20.0).reshape(10, 2), labels)

    def test_partitions(self, data):
        parts = one_vs_rest(data, "A", 6)
        np.testing.assert_array_equal(parts.train_positives[:, 0], [0, 6])
        np.testing.assert_array_equal(parts.test_positives[:, 0], [12, 18])
        np.testing.assert_array_equal(parts.test_negatives[:, 0], [14, 16])

    def test_fraction(self, data):
        assert one_vs_rest(data, "A", 0.6).train_positives.shape[0] == 2

    @pytest.mark.parametrize("target,split", [("Z", 6), ("A", 0), ("A", 10), ("A", 1.5)])
    def test_errors(self, data, target, split):
        with pytest.raises(DataError):
            one_vs_rest(data, target, split)

    @pytest.mark.skipif(not LETTER_FILE.exists(), reason="letter data not present")
    def test_letter_counts(self):
        ds = load_letter(LETTER_FILE)
        labels = np.array(ds.labels)
        parts = one_vs_rest(ds, "A")
        n_train_a = int(np.sum(labels[:16000] == "A"))
        assert parts.train_positives.shape[0] == n_train_a
        assert parts.test_positives.shape[0] + parts.test_negatives.shape[0] == 4000
        assert parts.test_negatives.shape[0] == int(np.sum(labels[16000:] != "A"))


class TestGenerator:
    def test_splitmix_published_values(self):
        out = splitmix64(0, 3)
        assert [int(v) for v in out] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]

    @pytest.mark.parametrize("seed", [0, 1, 42, 2**63 + 5, 2**64 - 1])
    def test_splitmix_matches_scalar(self, seed):
        assert [int(v) for v in splitmix64(seed, 500)] == splitmix_reference(seed, 500)

    def test_uniform_range(self):
        u = uniforms(7, 10000)
        assert u.min() >= 0.0 and u.max() < 1.0
        assert [float(v) for v in u[:5]] == [(x >> 11) * 2.0**-53 for x in splitmix_reference(7, 5)]

    def test_box_muller_by_hand(self):
        raw = splitmix_reference(3, 6)
        u = [(x >> 11) * 2.0**-53 for x in raw]
        expected = []
        for u1, u2 in zip(u[0::2], u[1::2]):
            r = math.sqrt(-2.0 * math.log(1.0 - u1))
            expected += [r * math.cos(2 * math.pi * u2), r * math.sin(2 * math.pi * u2)]
        np.testing.assert_allclose(standard_normals(3, 6), expected, rtol=1e-14)

    def test_odd_count(self):
        assert np.array_equal(standard_normals(5, 7), standard_normals(5, 8)[:7])

    def test_deterministic(self):
        a = sample_bivariate_normal(ToyConfig(seed=11)).features
        b = sample_bivariate_normal(ToyConfig(seed=11)).features
        assert np.array_equal(a, b)
        assert not np.array_equal(a, sample_bivariate_normal(ToyConfig(seed=12)).features)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_default_sample_mean(self, seed):
        X = sample_bivariate_normal(ToyConfig(seed=seed)).features
        assert X.shape == (1500, 2)
        assert np.all(np.abs(X.mean(axis=0)) < 0.1)

    def test_large_sample_moments(self):
        cfg = ToyConfig(count=100_000, mean=(1.0, -2.0), covariance=((2.0, 0.6), (0.6, 1.0)), seed=3)
        X = sample_bivariate_normal(cfg).features
        np.testing.assert_allclose(X.mean(axis=0), cfg.mean, atol=0.05)
        np.testing.assert_allclose(np.cov(X.T), cfg.covariance, atol=0.05)

    @pytest.mark.parametrize("cov", [((0, 0), (0, 0)), ((1, 2), (2, 1)), ((1, 0.5), (0.4, 1)), ((1,),)])
    def test_bad_covariance(self, cov):
        with pytest.raises(DataError):
            sample_bivariate_normal(ToyConfig(covariance=cov))

    def test_bad_count(self):
        with pytest.raises(DataError):
            sample_bivariate_normal(ToyConfig(count=0))

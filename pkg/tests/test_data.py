import math

import numpy as np
import pytest

from wigs.data import (
    ColumnMeta,
    Dataset,
    PreprocessConfig,
    PreprocessWarning,
    _sample_mixture,
    initial_split,
    load_csv,
    quantile_midpoint,
    sample_three_regime,
    sample_two_regime,
    save_csv,
    scale_features,
    three_regime_mean,
    three_regime_noise_std,
    two_regime_mean,
)
from wigs.rng import generator


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")
    return path


class TestLoadCsv:
    def test_zscore_column(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", ["a", "y"], [[1, 0], [2, 0], [3, 1]])
        ds = load_csv(path, PreprocessConfig(scaling="zscore"))
        # oracle: mean 2, population std sqrt(2/3)
        std = math.sqrt(2.0 / 3.0)
        expected = np.array([(1 - 2) / std, 0.0, (3 - 2) / std])
        assert np.allclose(ds.features[:, 0], expected, atol=1e-12)
        assert abs(expected[0] + 1.2247448713915890) < 1e-12

    def test_constant_column_dropped_with_warning(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", ["a", "b", "y"],
                         [[5, 1, 0], [5, 2, 0], [5, 3, 1]])
        with pytest.warns(PreprocessWarning):
            ds = load_csv(path, PreprocessConfig(scaling="zscore"))
        assert ds.n_features == 1
        assert ds.feature_names == ["b"]

    def test_robust_scaling_against_hand_quantiles(self, tmp_path):
        col = [1.0, 2.0, 3.0, 100.0]
        path = write_csv(tmp_path / "d.csv", ["a", "y"], [[v, 0] for v in col])

        def midpoint_quantile(sorted_vals, q):
            # independent oracle: position q*(n-1), average bracketing order stats
            pos = q * (len(sorted_vals) - 1)
            lo, hi = math.floor(pos), math.ceil(pos)
            return 0.5 * (sorted_vals[lo] + sorted_vals[hi]) if lo != hi else sorted_vals[lo]

        median = midpoint_quantile(col, 0.5)
        iqr = midpoint_quantile(col, 0.75) - midpoint_quantile(col, 0.25)
        assert median == 2.5
        ds = load_csv(path, PreprocessConfig(scaling="robust"))
        expected = (np.array(col) - median) / iqr
        assert np.allclose(ds.features[:, 0], expected, atol=1e-12)
        # the library helper agrees with the oracle rule
        for q in (0.25, 0.5, 0.75):
            assert quantile_midpoint(np.array(col), q) == midpoint_quantile(col, q)

    def test_zero_iqr_column_dropped_under_robust(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", ["a", "b", "y"],
                         [[5, 1, 0], [5, 2, 0], [5, 3, 1], [5, 9, 1]])
        with pytest.warns(PreprocessWarning):
            ds = load_csv(path, PreprocessConfig(scaling="robust"))
        assert ds.feature_names == ["b"]

    def test_one_hot_encoding(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", ["color", "a", "y"],
                         [["red", 1, 0], ["blue", 2, 1], ["red", 3, 2], ["green", 4, 3]])
        ds = load_csv(path, PreprocessConfig(scaling="zscore"))
        onehot = ds.features[:, :3]  # categories sorted: blue, green, red
        assert np.array_equal(onehot.sum(axis=1), np.ones(4))
        assert ds.column_meta[0].categories == ("blue", "green", "red")
        assert ds.feature_names[:3] == ["color=blue", "color=green", "color=red"]
        assert onehot[0, 2] == 1.0 and onehot[1, 0] == 1.0

    def test_declared_categorical_overrides_autodetect(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", ["code", "y"], [[1, 0], [2, 1], [1, 2]])
        ds = load_csv(path, PreprocessConfig(categorical_columns=("code",)))
        assert ds.column_meta[0].kind == "categorical"
        assert np.array_equal(ds.features.sum(axis=1), np.ones(3))

    def test_target_never_scaled(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", ["a", "y"], [[1, 10], [2, 20], [3, 40]])
        ds = load_csv(path, PreprocessConfig())
        assert np.array_equal(ds.targets, [10.0, 20.0, 40.0])

    def test_errors(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "missing.csv", PreprocessConfig())
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        with pytest.raises(ValueError, match="empty"):
            load_csv(empty, PreprocessConfig())
        bad_target = write_csv(tmp_path / "bad.csv", ["a", "y"],
                               [[1, "x"], [2, 3], [3, 4]])
        with pytest.raises(ValueError, match="target"):
            load_csv(bad_target, PreprocessConfig())
        short = write_csv(tmp_path / "short.csv", ["a", "y"], [[1, 2]])
        with pytest.raises(ValueError, match="2 data rows"):
            load_csv(short, PreprocessConfig())

    def test_roundtrip_save_load(self, tmp_path):
        ds = sample_two_regime(30, seed=4)
        path = tmp_path / "export.csv"
        save_csv(ds, path)
        back = load_csv(path, PreprocessConfig())
        # reload applies zscore; compare targets (never scaled) and shape
        assert np.array_equal(back.targets, ds.targets)
        assert back.features.shape == ds.features.shape

    def test_zscore_invariant_on_loaded_columns(self, tmp_path):
        rng = np.random.default_rng(0)
        rows = [[v, w, 0.0] for v, w in rng.normal(size=(20, 2))]
        path = write_csv(tmp_path / "d.csv", ["a", "b", "y"], rows)
        ds = load_csv(path, PreprocessConfig(scaling="zscore"))
        assert np.all(np.abs(ds.features.mean(axis=0)) < 1e-9)
        assert np.all(np.abs(ds.features.std(axis=0) - 1.0) < 1e-9)


class TestInitialSplit:
    @pytest.fixture
    def dataset(self):
        return sample_two_regime(100, seed=11)

    def test_five_percent_of_100(self, dataset):
        split = initial_split(dataset, 0.05, seed=3)
        assert len(split.labeled_idx) == 5
        assert len(split.pool_idx) == 95

    def test_same_seed_identical(self, dataset):
        a = initial_split(dataset, 0.05, seed=3)
        b = initial_split(dataset, 0.05, seed=3)
        assert np.array_equal(a.labeled_idx, b.labeled_idx)
        assert np.array_equal(a.pool_idx, b.pool_idx)

    def test_ceiling_keeps_two_labeled(self):
        ds = sample_two_regime(40, seed=1)
        split = initial_split(ds, 0.05, seed=0)
        assert len(split.labeled_idx) == 2  # ceil(0.05 * 40)

    def test_partition_and_errors(self, dataset):
        split = initial_split(dataset, 0.2, seed=9)
        together = np.sort(np.concatenate([split.labeled_idx, split.pool_idx]))
        assert np.array_equal(together, np.arange(100))
        with pytest.raises(ValueError):
            initial_split(dataset, 0.0, seed=1)
        with pytest.raises(ValueError):
            initial_split(dataset, 1.0, seed=1)
        with pytest.raises(ValueError):
            initial_split(sample_two_regime(10, seed=0), 0.05, seed=1)  # 1 < 2 labeled


class TestGenerators:
    def test_mixture_weights_sum_to_one(self):
        from wigs.data import _MIXTURE
        assert sum(w for w, _, _ in _MIXTURE) == 1.0

    def test_scalar_regime_values(self):
        assert abs(two_regime_mean(0.25) - 1.0) < 1e-12        # sin(2.5 pi)
        assert abs(two_regime_mean(0.75) - 0.5) < 1e-12        # 2 * 0.75 - 1
        assert abs(three_regime_mean(0.5)) < 1e-12             # 3 * 0.5 - 1.5
        assert abs(three_regime_mean(1.0) - 2.0) < 1e-12       # 2 cos(6 pi)
        assert three_regime_noise_std(np.array([0.62]))[0] == 1.5

    def test_samples_in_unit_interval(self):
        for sampler in (sample_two_regime, sample_three_regime):
            ds = sampler(2000, seed=5)
            assert ds.features.min() >= 0.0
            assert ds.features.max() <= 1.0

    def test_component_proportions(self):
        x, comp = _sample_mixture(100_000, generator(17, "dgp"))
        freqs = np.bincount(comp, minlength=3) / len(comp)
        assert np.all(np.abs(freqs - np.array([0.4, 0.3, 0.3])) < 0.02)
        assert x.min() >= 0.0 and x.max() <= 1.0

    def test_bit_identical_reruns(self):
        a = sample_three_regime(500, seed=42)
        b = sample_three_regime(500, seed=42)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.targets, b.targets)

    def test_n_too_small(self):
        with pytest.raises(ValueError):
            sample_two_regime(1, seed=0)


class TestScaleFeatures:
    def test_zscore_normalizes(self):
        ds = sample_two_regime(200, seed=2)
        scaled = scale_features(ds, "zscore")
        assert abs(scaled.features[:, 0].mean()) < 1e-9
        assert abs(scaled.features[:, 0].std() - 1.0) < 1e-9
        assert np.array_equal(scaled.targets, ds.targets)

    def test_dataset_invariants(self):
        with pytest.raises(ValueError):
            Dataset(np.array([[1.0]]), np.array([1.0]),
                    (ColumnMeta("x", "continuous"),), "tiny")  # N < 2
        with pytest.raises(ValueError):
            Dataset(np.array([[1.0], [np.inf]]), np.array([1.0, 2.0]),
                    (ColumnMeta("x", "continuous"),), "bad")

import numpy as np
import pytest

from swarmnet import (
    CAD_FEATURES,
    CAD_UNIT_POINTS,
    COMBINED_FEATURES,
    DEFAULT_GRADE_THRESHOLDS,
    FB_FEATURES,
    FEATURE_PRESETS,
    PRF_FEATURES,
    REDUCED_FEATURES,
    ClassLabel,
    Dataset,
    SubGrade,
    SubGrades,
    apply_normalization,
    balance_oversample,
    coerce_labels,
    derive_subgrades,
    feature_group,
    final_label,
    grade_from_level,
    impute_mean,
    load_csv,
    load_normalization_stats,
    normalize_minmax,
    save_csv,
    save_normalization_stats,
    stratified_split,
    synthesize,
)


def make_dataset(rows, labels, names=("f1", "f2")):
    return Dataset(names, np.array(rows, dtype=float), coerce_labels(labels))


class TestSchema:
    def test_column_groups(self):
        assert len(PRF_FEATURES) == 11
        assert len(CAD_FEATURES) == 3
        assert len(FB_FEATURES) == 12
        assert len(COMBINED_FEATURES) == 26
        assert len(REDUCED_FEATURES) == 14
        assert set(REDUCED_FEATURES) <= set(COMBINED_FEATURES)
        assert FEATURE_PRESETS["table3"] == REDUCED_FEATURES

    def test_feature_group(self):
        assert feature_group("PRF7") == "PRF"
        assert feature_group("CAD2") == "CAD"
        assert feature_group("FB12") == "FB"
        with pytest.raises(ValueError):
            feature_group("XYZ1")

    def test_class_label_codes_and_targets(self):
        assert [label.value for label in ClassLabel] == [1, 2, 3, 4, 5]
        assert ClassLabel.A.target == 0.1
        assert ClassLabel.E.target == 0.5
        assert ClassLabel.from_grade("C") is ClassLabel.C
        with pytest.raises(ValueError, match="grade"):
            ClassLabel.from_grade("F")

    def test_subgrade_scale(self):
        assert SubGrade.from_text("A*") is SubGrade.A_STAR
        assert SubGrade.A_STAR.rank < SubGrade.A.rank < SubGrade.E.rank
        with pytest.raises(ValueError):
            SubGrade.from_text("Z")

    def test_coerce_labels_accepts_mixed_forms(self):
        labels = coerce_labels([ClassLabel.A, "B", 3, np.int64(4)])
        assert labels == (ClassLabel.A, ClassLabel.B, ClassLabel.C, ClassLabel.D)
        with pytest.raises(ValueError):
            coerce_labels([2.5])


class TestFinalLabel:
    @pytest.mark.parametrize(
        "cad, fb, prf, expected",
        [
            ("A*", "A*", "A", ClassLabel.A),
            ("A", "A*", "B", ClassLabel.B),
            ("A*", "A", "B", ClassLabel.B),
            ("B", "C", "C", ClassLabel.C),
            ("E", "B", "B", ClassLabel.C),
            ("A*", "A", "D", ClassLabel.C),
            ("C", "D", "D", ClassLabel.D),
            ("A", "A*", "E", ClassLabel.D),
            ("E", "E", "E", ClassLabel.E),
            ("D", "B", "E", ClassLabel.E),
        ],
    )
    def test_covered_rows(self, cad, fb, prf, expected):
        grades = SubGrades(
            SubGrade.from_text(cad), SubGrade.from_text(fb), SubGrade.from_text(prf)
        )
        assert final_label(grades) is expected

    @pytest.mark.parametrize(
        "cad, fb, prf",
        [
            ("A*", "A*", "A*"),  # a top portfolio grade has no row
            ("A", "A", "A"),  # class A needs the starred pair exactly
            ("A*", "B", "B"),  # mixed tiers across the first two groups
            ("B", "A", "C"),
            ("A*", "A*", "C"),  # top pair with a mid portfolio
        ],
    )
    def test_uncovered_combinations_return_none(self, cad, fb, prf):
        grades = SubGrades(
            SubGrade.from_text(cad), SubGrade.from_text(fb), SubGrade.from_text(prf)
        )
        assert final_label(grades) is None


class TestDataset:
    def test_basic_accessors(self):
        ds = make_dataset([[1, 2], [3, 4], [5, 6]], ["A", "B", "A"])
        assert ds.n_samples == 3
        assert ds.n_features == 2
        assert np.array_equal(ds.targets(), [0.1, 0.2, 0.1])
        assert np.array_equal(ds.codes(), [1.0, 2.0, 1.0])
        counts = ds.class_counts()
        assert counts[ClassLabel.A] == 2 and counts[ClassLabel.B] == 1

    def test_validation(self):
        with pytest.raises(ValueError, match="unique"):
            make_dataset([[1, 2]], ["A"], names=("x", "x"))
        with pytest.raises(ValueError, match="labels"):
            make_dataset([[1, 2], [3, 4]], ["A"])
        with pytest.raises(ValueError, match="match"):
            Dataset(("a", "b", "c"), np.zeros((2, 2)), coerce_labels(["A", "B"]))

    def test_features_are_read_only(self):
        ds = make_dataset([[1, 2]], ["A"])
        with pytest.raises(ValueError):
            ds.features[0, 0] = 9.0

    def test_select_keeps_given_order(self):
        ds = make_dataset([[1, 2, 3]], ["A"], names=("a", "b", "c"))
        sub = ds.select(("c", "a"))
        assert sub.feature_names == ("c", "a")
        assert np.array_equal(sub.features, [[3, 1]])
        with pytest.raises(ValueError, match="no columns"):
            ds.select(("a", "missing"))

    def test_take_reorders_rows_and_labels(self):
        ds = make_dataset([[1, 0], [2, 0], [3, 0]], ["A", "B", "C"])
        sub = ds.take([2, 0])
        assert np.array_equal(sub.features[:, 0], [3, 1])
        assert sub.labels == (ClassLabel.C, ClassLabel.A)


class TestNormalize:
    def test_scales_to_unit_interval(self):
        ds = make_dataset([[2, 10], [4, 10], [6, 30]], ["A", "B", "C"])
        scaled, stats = normalize_minmax(ds)
        assert np.array_equal(scaled.features[:, 0], [0.0, 0.5, 1.0])
        # constant column collapses to zero
        assert np.array_equal(scaled.features[:2, 1], [0.0, 0.0])
        assert stats["f1"] == (2.0, 6.0)
        assert stats["f2"] == (10.0, 30.0)

    def test_missing_cells_stay_missing(self):
        ds = make_dataset([[1, np.nan], [3, 4], [5, 8]], ["A", "B", "C"])
        scaled, stats = normalize_minmax(ds)
        assert np.isnan(scaled.features[0, 1])
        assert stats["f2"] == (4.0, 8.0)

    def test_apply_normalization_reuses_stats(self):
        train = make_dataset([[0, 0], [10, 4]], ["A", "B"])
        _, stats = normalize_minmax(train)
        other = make_dataset([[5, 2], [20, 8]], ["C", "D"])
        scaled = apply_normalization(other, stats)
        assert np.array_equal(scaled.features, [[0.5, 0.5], [2.0, 2.0]])
        with pytest.raises(ValueError, match="lacks"):
            apply_normalization(make_dataset([[1]], ["A"], names=("zzz",)), stats)

    def test_idempotent_on_already_scaled_data(self):
        ds = make_dataset([[0.0, 0.2], [1.0, 0.8], [0.5, 0.5]], ["A", "B", "C"])
        once, _ = normalize_minmax(ds)
        twice, _ = normalize_minmax(once)
        assert np.allclose(once.features, twice.features, rtol=0, atol=1e-15)

    def test_fully_missing_column_rejected(self):
        ds = make_dataset([[1, np.nan], [2, np.nan]], ["A", "B"])
        with pytest.raises(ValueError, match="f2"):
            normalize_minmax(ds)


class TestImpute:
    def test_fills_with_column_mean(self):
        ds = make_dataset([[1, 10], [np.nan, 20], [3, np.nan]], ["A", "B", "C"])
        filled = impute_mean(ds)
        assert filled.features[1, 0] == 2.0
        assert filled.features[2, 1] == 15.0
        # observed cells are untouched
        assert filled.features[0, 0] == 1.0

    def test_no_missing_is_identity(self):
        ds = make_dataset([[1, 2], [3, 4]], ["A", "B"])
        assert np.array_equal(impute_mean(ds).features, ds.features)

    def test_fully_missing_column_rejected(self):
        ds = make_dataset([[np.nan, 1], [np.nan, 2]], ["A", "B"])
        with pytest.raises(ValueError, match="f1"):
            impute_mean(ds)


class TestBalance:
    def _lopsided(self):
        rows = [[i, 0] for i in range(12)]
        labels = ["A"] * 10 + ["B"] * 2
        return make_dataset(rows, labels)

    def test_equalizes_counts(self):
        balanced = balance_oversample(self._lopsided(), 20, seed=0)
        counts = balanced.class_counts()
        assert counts[ClassLabel.A] == 10
        assert counts[ClassLabel.B] == 10

    def test_keeps_all_original_rows_first(self):
        ds = self._lopsided()
        balanced = balance_oversample(ds, 20, seed=0)
        assert np.array_equal(balanced.features[:12], ds.features)
        assert balanced.labels[:12] == ds.labels

    def test_duplicates_come_from_the_right_class(self):
        balanced = balance_oversample(self._lopsided(), 20, seed=0)
        assert all(label is ClassLabel.B for label in balanced.labels[12:])

    def test_ties_go_to_the_lower_class_code(self):
        ds = make_dataset([[i, 0] for i in range(6)], ["A", "A", "A", "B", "B", "B"])
        balanced = balance_oversample(ds, 7, seed=1)
        counts = balanced.class_counts()
        assert counts[ClassLabel.A] == 4
        assert counts[ClassLabel.B] == 3

    def test_five_class_growth_stays_within_one(self):
        ds = synthesize(313, seed=0)
        balanced = balance_oversample(ds, 580, seed=1)
        assert balanced.n_samples == 580
        counts = [n for n in balanced.class_counts().values()]
        assert max(counts) - min(counts) <= 1

    def test_target_below_current_size_rejected(self):
        with pytest.raises(ValueError, match="below"):
            balance_oversample(self._lopsided(), 11, seed=0)

    def test_required_class_missing_rejected(self):
        with pytest.raises(ValueError, match="E"):
            balance_oversample(self._lopsided(), 20, seed=0, required_classes=tuple(ClassLabel))

    def test_deterministic_for_a_seed(self):
        a = balance_oversample(self._lopsided(), 30, seed=5)
        b = balance_oversample(self._lopsided(), 30, seed=5)
        assert np.array_equal(a.features, b.features)


class TestSplit:
    def test_exact_sizes_580_to_522_58(self):
        ds = balance_oversample(synthesize(313, seed=2), 580, seed=3)
        train, test = stratified_split(ds, 0.9, seed=4)
        assert train.n_samples == 522
        assert test.n_samples == 58

    def test_is_a_partition(self):
        ds = synthesize(50, seed=5)
        train, test = stratified_split(ds, 0.8, seed=6)
        combined = np.vstack([train.features, test.features])
        key = np.lexsort(combined.T)
        original = np.lexsort(ds.features.T)
        assert np.array_equal(combined[key], ds.features[original])

    def test_stratified_within_one_per_class(self):
        ds = synthesize(100, seed=7)
        train, _ = stratified_split(ds, 0.9, seed=8)
        for label, total in ds.class_counts().items():
            taken = train.class_counts()[label]
            assert abs(taken - 0.9 * total) < 1.0

    def test_deterministic_for_a_seed(self):
        ds = synthesize(60, seed=9)
        a_train, a_test = stratified_split(ds, 0.9, seed=10)
        b_train, b_test = stratified_split(ds, 0.9, seed=10)
        assert np.array_equal(a_train.features, b_train.features)
        assert np.array_equal(a_test.features, b_test.features)
        c_train, _ = stratified_split(ds, 0.9, seed=11)
        assert not np.array_equal(a_train.features, c_train.features)

    def test_warns_on_singleton_class(self):
        ds = make_dataset([[i, 0] for i in range(10)], ["A"] * 9 + ["B"])
        with pytest.warns(UserWarning, match="class B"):
            stratified_split(ds, 0.5, seed=0)

    def test_too_small_rejected(self):
        ds = make_dataset([[i, 0] for i in range(9)], ["A"] * 9)
        with pytest.raises(ValueError, match="10"):
            stratified_split(ds, 0.9, seed=0)

    def test_fraction_bounds_rejected(self):
        ds = synthesize(20, seed=0)
        for fraction in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(ValueError, match="fraction"):
                stratified_split(ds, fraction, seed=0)


class TestGradeBands:
    def test_levels_map_to_grades(self):
        assert grade_from_level(0.95) is SubGrade.A_STAR
        assert grade_from_level(0.9) is SubGrade.A_STAR
        assert grade_from_level(0.85) is SubGrade.A
        assert grade_from_level(0.8) is SubGrade.A
        assert grade_from_level(0.7) is SubGrade.B
        assert grade_from_level(0.65) is SubGrade.C
        assert grade_from_level(0.5) is SubGrade.D
        assert grade_from_level(0.49) is SubGrade.E
        assert grade_from_level(0.0) is SubGrade.E

    def test_derive_subgrades_example(self):
        prf = [0.75] * 11  # mean 0.75 -> B
        cad = [18.0, 18.0, 36.0]  # levels 0.9, 0.9, 0.9 -> A*
        fb = [0.85] * 12  # mean 0.85 -> A
        grades = derive_subgrades(np.array(prf + cad + fb))
        assert grades.prf is SubGrade.B
        assert grades.cad is SubGrade.A_STAR
        assert grades.fb is SubGrade.A
        assert final_label(grades) is ClassLabel.B

    def test_activity_points_are_rescaled_by_budget(self):
        row = np.zeros(26)
        row[11:14] = [CAD_UNIT_POINTS, CAD_UNIT_POINTS, 2 * CAD_UNIT_POINTS]
        grades = derive_subgrades(row)
        assert grades.cad is SubGrade.A_STAR


class TestSynthesize:
    def test_counts_are_stratified(self):
        ds = synthesize(313, seed=0)
        counts = sorted(ds.class_counts().values())
        assert sum(counts) == 313
        assert counts == [62, 62, 63, 63, 63]

    def test_all_classes_present_for_any_seed(self):
        for seed in (1, 2, 3):
            ds = synthesize(10, seed=seed)
            assert all(n > 0 for n in ds.class_counts().values())

    def test_labels_match_the_grade_rules_without_noise(self):
        ds = synthesize(80, seed=4)
        for row, label in zip(ds.features, ds.labels):
            assert final_label(derive_subgrades(row)) is label

    def test_combined_activity_column_is_the_sum(self):
        ds = synthesize(60, seed=5)
        start = len(PRF_FEATURES)
        assert np.array_equal(
            ds.features[:, start + 2], ds.features[:, start] + ds.features[:, start + 1]
        )

    def test_ratings_sit_on_the_quarter_grid(self):
        ds = synthesize(40, seed=6)
        ratings = np.concatenate([ds.features[:, :11].ravel(), ds.features[:, 14:].ravel()])
        assert np.array_equal(ratings * 4, np.round(ratings * 4))
        assert ratings.min() >= 0.0 and ratings.max() <= 1.0

    def test_noise_moves_values_but_keeps_label_counts_and_sums(self):
        clean = synthesize(40, seed=7)
        noisy = synthesize(40, seed=7, noise_level=0.05)
        assert not np.array_equal(clean.features, noisy.features)
        # the stratified quotas fix the label multiset regardless of noise
        assert noisy.class_counts() == clean.class_counts()
        # noisy ratings leave the quarter grid
        ratings = np.concatenate([noisy.features[:, :11].ravel(), noisy.features[:, 14:].ravel()])
        assert not np.array_equal(ratings * 4, np.round(ratings * 4))
        start = len(PRF_FEATURES)
        assert np.array_equal(
            noisy.features[:, start + 2],
            noisy.features[:, start] + noisy.features[:, start + 1],
        )
        assert noisy.features[:, :11].min() >= 0.0
        assert noisy.features[:, :11].max() <= 1.0

    def test_missing_rate_blanks_cells(self):
        ds = synthesize(100, seed=8, missing_rate=0.1)
        blank_share = np.mean(np.isnan(ds.features))
        assert 0.05 < blank_share < 0.15

    def test_deterministic_for_a_seed(self):
        a = synthesize(30, seed=9, noise_level=0.02, missing_rate=0.05)
        b = synthesize(30, seed=9, noise_level=0.02, missing_rate=0.05)
        assert np.array_equal(a.features, b.features, equal_nan=True)
        assert a.labels == b.labels

    def test_schema(self):
        ds = synthesize(20, seed=10)
        assert ds.feature_names == COMBINED_FEATURES
        assert ds.features.shape == (20, 26)

    def test_validation(self):
        with pytest.raises(ValueError, match="10"):
            synthesize(5, seed=0)
        with pytest.raises(ValueError, match="noise"):
            synthesize(20, seed=0, noise_level=-0.1)
        with pytest.raises(ValueError, match="missing"):
            synthesize(20, seed=0, missing_rate=1.0)

    def test_custom_thresholds_still_label_consistently(self):
        thresholds = (
            (SubGrade.A_STAR, 0.85),
            (SubGrade.A, 0.75),
            (SubGrade.B, 0.65),
            (SubGrade.C, 0.55),
            (SubGrade.D, 0.45),
            (SubGrade.E, 0.0),
        )
        ds = synthesize(30, seed=11, thresholds=thresholds)
        for row, label in zip(ds.features, ds.labels):
            assert final_label(derive_subgrades(row, thresholds)) is label


class TestCsvRoundTrip:
    def test_exact_round_trip(self, tmp_path):
        ds = synthesize(25, seed=12, noise_level=0.03, missing_rate=0.08)
        path = tmp_path / "data.csv"
        save_csv(ds, path)
        loaded = load_csv(path)
        assert loaded.feature_names == ds.feature_names
        assert np.array_equal(loaded.features, ds.features, equal_nan=True)
        assert loaded.labels == ds.labels

    def test_header_shape(self, tmp_path):
        ds = synthesize(10, seed=13)
        path = tmp_path / "data.csv"
        save_csv(ds, path)
        header = path.read_text().splitlines()[0]
        assert header == ",".join([*COMBINED_FEATURES, "class"])

    def test_bad_number_reports_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("f1,f2,class\n1.0,2.0,A\n1.0,oops,B\n")
        with pytest.raises(ValueError, match="row 3"):
            load_csv(path)

    def test_unknown_grade_reports_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("f1,f2,class\n1.0,2.0,Q\n")
        with pytest.raises(ValueError, match="row 2"):
            load_csv(path)

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("f1,f2,class\n1.0,A\n")
        with pytest.raises(ValueError, match="expected 3 fields"):
            load_csv(path)

    def test_missing_class_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("f1,f2,label\n1.0,2.0,A\n")
        with pytest.raises(ValueError, match="class"):
            load_csv(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="empty"):
            load_csv(path)

    def test_no_data_rows_rejected(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("f1,f2,class\n")
        with pytest.raises(ValueError, match="no data"):
            load_csv(path)


class TestNormalizationStatsFile:
    def test_round_trip(self, tmp_path):
        ds = make_dataset([[1, 5], [3, 9]], ["A", "B"])
        _, stats = normalize_minmax(ds)
        path = tmp_path / "stats.json"
        save_normalization_stats(stats, path)
        assert load_normalization_stats(path) == stats


class TestDefaultThresholds:
    def test_ordering_and_coverage(self):
        bounds = [bound for _, bound in DEFAULT_GRADE_THRESHOLDS]
        assert bounds == sorted(bounds, reverse=True)
        assert DEFAULT_GRADE_THRESHOLDS[-1] == (SubGrade.E, 0.0)

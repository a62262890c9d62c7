import numpy as np
import pytest

from parafuse.errors import InputError
from parafuse.features import FEATURE_COLUMN, FEATURE_ORDER, FeatureId, N_FEATURES, QUERY_FEATURES, generate_queries
from parafuse.fusion import (
    FeatureMatrix,
    WeightVector,
    collect_candidates,
    combine,
    format_matrix,
    load_weights,
    save_weights,
    zscore_normalize,
)
from parafuse.index import score_query
from parafuse.features import QUERY_TARGET


def matrix_from(raw, q_id="q"):
    raw = np.asarray(raw, dtype=np.float64)
    candidates = tuple(f"d:{i:03d}" for i in range(raw.shape[0]))
    return FeatureMatrix(q_id=q_id, candidates=candidates, raw=raw)


class TestWeightVector:
    def test_uniform(self):
        w = WeightVector.uniform()
        assert sum(w.values) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_negative(self):
        values = [1.5] + [0.0] * 9 + [-0.5]
        with pytest.raises(ValueError):
            WeightVector(tuple(values))

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            WeightVector(tuple([0.5] + [0.0] * 10))

    def test_mapping_round_trip(self):
        w = WeightVector.uniform()
        assert WeightVector.from_mapping(w.as_mapping()) == w

    def test_lookup_by_feature(self):
        values = [0.0] * 11
        values[FEATURE_COLUMN[FeatureId.Q_LEMMA]] = 1.0
        w = WeightVector(tuple(values))
        assert w[FeatureId.Q_LEMMA] == 1.0


class TestZscore:
    def test_closed_form_column(self):
        raw = np.zeros((3, N_FEATURES))
        raw[:, 0] = [1.0, 2.0, 3.0]
        out = zscore_normalize(matrix_from(raw))
        np.testing.assert_allclose(out.normalized[:, 0], [-1.22474487, 0.0, 1.22474487], atol=1e-8)

    def test_constant_column_zeroed(self):
        raw = np.full((3, N_FEATURES), 5.0)
        out = zscore_normalize(matrix_from(raw))
        assert np.all(out.normalized == 0.0)

    def test_constant_column_zeroed_despite_mean_rounding(self):
        # 28 copies of 4.2: np.std comes out an ulp above zero, the column is
        # still constant and must still map to zero.
        raw = np.random.default_rng(5).random((28, N_FEATURES))
        raw[:, 4] = 4.2
        out = zscore_normalize(matrix_from(raw))
        assert np.all(out.normalized[:, 4] == 0.0)

    def test_moments(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            raw = rng.random((int(rng.integers(2, 30)), N_FEATURES)) * 10
            out = zscore_normalize(matrix_from(raw))
            for j in range(N_FEATURES):
                if raw[:, j].std() > 0:
                    assert abs(out.normalized[:, j].mean()) <= 1e-9
                    assert abs(out.normalized[:, j].std() - 1.0) <= 1e-9

    def test_single_candidate_all_zero(self):
        out = zscore_normalize(matrix_from(np.random.default_rng(0).random((1, N_FEATURES))))
        assert np.all(out.normalized == 0.0)

    def test_empty_matrix(self):
        out = zscore_normalize(matrix_from(np.zeros((0, N_FEATURES))))
        assert out.normalized.shape == (0, N_FEATURES)

    def test_raw_untouched(self):
        raw = np.random.default_rng(1).random((4, N_FEATURES))
        matrix = matrix_from(raw)
        zscore_normalize(matrix)
        np.testing.assert_array_equal(matrix.raw, raw)


class TestCombine:
    def test_one_hot_follows_column(self):
        rng = np.random.default_rng(13)
        raw = rng.random((8, N_FEATURES))
        matrix = zscore_normalize(matrix_from(raw))
        for j, feature in enumerate(FEATURE_ORDER[:4]):
            values = [0.0] * N_FEATURES
            values[j] = 1.0
            ranking = combine(matrix, WeightVector(tuple(values)))
            by_column = sorted(
                range(8), key=lambda i: (-matrix.normalized[i, j], matrix.candidates[i]))
            assert [pid for pid, _ in ranking.entries] == [matrix.candidates[i] for i in by_column]

    def test_hand_fixture(self):
        # 3 candidates x 11 features with exact binary fractions; weights 8/16, 4/16, 4/16.
        raw = np.zeros((3, N_FEATURES))
        normalized = np.zeros((3, N_FEATURES))
        normalized[:, 0] = [1.0, -1.0, 0.0]
        normalized[:, 1] = [0.5, 0.25, -0.75]
        normalized[:, 2] = [-2.0, 2.0, 0.0]
        weights = [0.5, 0.25, 0.25] + [0.0] * 8
        matrix = FeatureMatrix("q", ("a", "b", "c"), raw, normalized)
        ranking = combine(matrix, WeightVector(tuple(weights)))
        expected = {
            "a": 0.5 * 1.0 + 0.25 * 0.5 + 0.25 * -2.0,    # 0.125
            "b": 0.5 * -1.0 + 0.25 * 0.25 + 0.25 * 2.0,   # 0.0625
            "c": 0.5 * 0.0 + 0.25 * -0.75 + 0.25 * 0.0,   # -0.1875
        }
        assert [pid for pid, _ in ranking.entries] == ["a", "b", "c"]
        for pid, score in ranking.entries:
            assert score == pytest.approx(expected[pid], abs=1e-12)

    def test_all_zero_matrix_ranks_by_para_id(self):
        matrix = zscore_normalize(matrix_from(np.zeros((5, N_FEATURES))))
        ranking = combine(matrix, WeightVector.uniform())
        assert [pid for pid, _ in ranking.entries] == sorted(matrix.candidates)
        assert all(score == 0.0 for _, score in ranking.entries)

    def test_requires_normalized(self):
        with pytest.raises(ValueError):
            combine(matrix_from(np.zeros((2, N_FEATURES))), WeightVector.uniform())

    def test_affine_invariance(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            raw = rng.random((int(rng.integers(2, 20)), N_FEATURES))
            column = int(rng.integers(N_FEATURES))
            scale = float(rng.uniform(0.1, 10.0))
            shift = float(rng.uniform(-5.0, 5.0))
            weights = WeightVector.from_array(np.full(N_FEATURES, 1.0 / N_FEATURES))
            base = combine(zscore_normalize(matrix_from(raw)), weights)
            mapped_raw = raw.copy()
            mapped_raw[:, column] = mapped_raw[:, column] * scale + shift
            mapped = combine(zscore_normalize(matrix_from(mapped_raw)), weights)
            assert [pid for pid, _ in base.entries] == [pid for pid, _ in mapped.entries]

    def test_tied_rows_break_by_para_id(self):
        raw = np.zeros((4, N_FEATURES))
        raw[:, 0] = [3.0, 1.0, 3.0, 1.0]  # two exact ties
        ranking = combine(zscore_normalize(matrix_from(raw)), WeightVector.uniform())
        assert [pid for pid, _ in ranking.entries] == ["d:000", "d:002", "d:001", "d:003"]


class TestCollectCandidates:
    def test_pool_is_union_of_query_hits(self, pipeline):
        question = pipeline.questions.questions[0]
        bundle = generate_queries(question.text, pipeline.lexicons)
        matrix = collect_candidates(
            question.text, bundle, pipeline.indices, pipeline.evaluators, pipeline.k, q_id=question.q_id)
        union = set()
        for feature in QUERY_FEATURES:
            hits = score_query(pipeline.indices[QUERY_TARGET[feature]], bundle[feature], pipeline.k)
            union |= {h.para_id for h in hits}
        assert set(matrix.candidates) == union
        assert list(matrix.candidates) == sorted(union)

    def test_query_columns_zero_filled(self, pipeline):
        question = pipeline.questions.questions[2]
        bundle = generate_queries(question.text, pipeline.lexicons)
        matrix = collect_candidates(
            question.text, bundle, pipeline.indices, pipeline.evaluators, pipeline.k, q_id=question.q_id)
        for feature in QUERY_FEATURES:
            hits = {h.para_id: h.confidence
                    for h in score_query(pipeline.indices[QUERY_TARGET[feature]], bundle[feature], pipeline.k)}
            col = FEATURE_COLUMN[feature]
            for row, pid in enumerate(matrix.candidates):
                assert matrix.raw[row, col] == hits.get(pid, 0.0)

    def test_candidate_from_single_query_has_five_zero_columns(self, pipeline):
        # The named-entity query usually returns few candidates; find a pool
        # member returned by exactly one query and check the zero-fill rule.
        for question in pipeline.questions:
            bundle = generate_queries(question.text, pipeline.lexicons)
            matrix = collect_candidates(
                question.text, bundle, pipeline.indices, pipeline.evaluators, pipeline.k, q_id=question.q_id)
            query_block = matrix.raw[:, : len(QUERY_FEATURES)]
            single = (query_block > 0).sum(axis=1) == 1
            if single.any():
                row = int(np.flatnonzero(single)[0])
                assert (query_block[row] == 0.0).sum() == len(QUERY_FEATURES) - 1
                return
        pytest.skip("fixture produced no single-query candidate")

    def test_all_queries_empty_gives_empty_matrix(self, pipeline):
        text = "when did they do that?"
        bundle = generate_queries(text, pipeline.lexicons)
        matrix = collect_candidates(text, bundle, pipeline.indices, pipeline.evaluators, pipeline.k)
        assert matrix.candidates == ()
        assert matrix.raw.shape == (0, N_FEATURES)

    def test_deterministic(self, pipeline):
        question = pipeline.questions.questions[3]
        bundle = generate_queries(question.text, pipeline.lexicons)
        first = collect_candidates(question.text, bundle, pipeline.indices, pipeline.evaluators, pipeline.k)
        second = collect_candidates(question.text, bundle, pipeline.indices, pipeline.evaluators, pipeline.k)
        assert first.candidates == second.candidates
        np.testing.assert_array_equal(first.raw, second.raw)

    def test_raw_query_scores_nonnegative(self, pipeline):
        for q_id, matrix in pipeline.matrices.items():
            assert np.all(matrix.raw[:, : len(QUERY_FEATURES)] >= 0.0)

    def test_one_hot_query_weight_ranks_returned_above_missing(self, pipeline):
        # Z-scores are monotone per column, so under a one-hot query weight
        # every candidate that query returned outranks every zero-filled one.
        for feature in (FeatureId.Q_BASELINE, FeatureId.Q_SYNONYMS):
            col = FEATURE_COLUMN[feature]
            values = [0.0] * N_FEATURES
            values[col] = 1.0
            weights = WeightVector(tuple(values))
            for matrix in pipeline.matrices.values():
                returned = {pid for row, pid in enumerate(matrix.candidates) if matrix.raw[row, col] > 0}
                if not returned or len(returned) == len(matrix.candidates):
                    continue
                ranking = combine(matrix, weights)
                positions = {pid: i for i, (pid, _) in enumerate(ranking.entries)}
                worst_returned = max(positions[pid] for pid in returned)
                best_missing = min(positions[pid] for pid in matrix.candidates if pid not in returned)
                assert worst_returned < best_missing


class TestWeightFiles:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(19)
        values = rng.random(N_FEATURES)
        weights = WeightVector.from_array(values / values.sum())
        path = tmp_path / "w.tsv"
        save_weights(weights, path)
        assert load_weights(path) == weights

    def test_bad_sum_rejected(self, tmp_path):
        path = tmp_path / "w.tsv"
        lines = [f"{f.value}\t0.5\n" for f in FEATURE_ORDER]
        path.write_text("".join(lines))
        with pytest.raises(InputError, match="sum"):
            load_weights(path)

    def test_missing_feature_rejected(self, tmp_path):
        path = tmp_path / "w.tsv"
        lines = [f"{f.value}\t{1 / 10}\n" for f in FEATURE_ORDER[:-1]]
        path.write_text("".join(lines))
        with pytest.raises(InputError, match="missing"):
            load_weights(path)

    def test_unknown_feature_rejected(self, tmp_path):
        path = tmp_path / "w.tsv"
        path.write_text("not_a_feature\t1.0\n")
        with pytest.raises(InputError):
            load_weights(path)


class TestMatrixDump:
    def test_header_and_rows(self):
        raw = np.arange(2 * N_FEATURES, dtype=float).reshape(2, N_FEATURES)
        text = format_matrix(matrix_from(raw))
        lines = text.strip().split("\n")
        assert lines[0].split("\t") == ["para_id"] + [f.value for f in FEATURE_ORDER]
        assert len(lines) == 3
        assert lines[1].startswith("d:000\t0.0\t1.0")

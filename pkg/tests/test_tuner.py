import itertools

import numpy as np
import pytest

from parafuse.corpus import Question, QuestionSet
from parafuse.errors import InputError
from parafuse.features import N_FEATURES
from parafuse.fusion import FeatureMatrix, RankedList, WeightVector, zscore_normalize
from parafuse.tuner import (
    DeConfig,
    MrrObjective,
    cross_validate,
    differential_evolution,
    format_tuning_report,
    mrr,
    project_to_simplex,
    tune_weights,
)


def ranked(q_id, *para_ids):
    return RankedList(q_id=q_id, entries=tuple((pid, -float(i)) for i, pid in enumerate(para_ids)))


def question(q_id, gold):
    return Question(q_id=q_id, text="placeholder", gold_para_ids=frozenset(gold))


class TestMrr:
    def test_all_rank_one(self):
        questions = QuestionSet([question("q1", {"a"}), question("q2", {"b"})])
        assert mrr([ranked("q1", "a", "x"), ranked("q2", "b", "y")], questions) == 1.0

    def test_absent_gold_is_zero(self):
        questions = QuestionSet([question("q1", {"a"})])
        assert mrr([ranked("q1", "x", "y")], questions) == 0.0

    def test_ranks_one_and_four(self):
        questions = QuestionSet([question("q1", {"a"}), question("q2", {"b"})])
        lists = [ranked("q1", "a", "x"), ranked("q2", "x", "y", "z", "b")]
        assert mrr(lists, questions) == pytest.approx(0.625, abs=1e-15)

    def test_best_gold_counts(self):
        questions = QuestionSet([question("q1", {"a", "b"})])
        assert mrr([ranked("q1", "x", "b", "a")], questions) == 0.5

    def test_missing_list_rejected(self):
        questions = QuestionSet([question("q1", {"a"}), question("q2", {"b"})])
        with pytest.raises(ValueError, match="q2"):
            mrr([ranked("q1", "a")], questions)

    def test_extra_list_rejected(self):
        questions = QuestionSet([question("q1", {"a"})])
        with pytest.raises(ValueError, match="q9"):
            mrr([ranked("q1", "a"), ranked("q9", "a")], questions)


class TestProjectToSimplex:
    def test_single_positive_entry(self):
        w = project_to_simplex([2.0] + [0.0] * 10)
        assert w.values[0] == 1.0
        assert sum(w.values) == 1.0

    def test_all_negative_falls_back_to_uniform(self):
        w = project_to_simplex([-1.0] * 11)
        np.testing.assert_allclose(w.as_array(), 1 / 11, atol=1e-15)

    def test_two_equal_entries(self):
        w = project_to_simplex([1.0, 1.0] + [0.0] * 9)
        assert w.values[0] == 0.5 and w.values[1] == 0.5

    def test_idempotent(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            v = rng.uniform(-1, 2, N_FEATURES)
            once = project_to_simplex(v)
            again = project_to_simplex(once.as_array())
            np.testing.assert_allclose(again.as_array(), once.as_array(), atol=1e-12)

    def test_output_always_valid(self):
        rng = np.random.default_rng(29)
        for _ in range(50):
            w = project_to_simplex(rng.uniform(-3, 3, N_FEATURES))
            assert min(w.values) >= 0.0
            assert abs(sum(w.values) - 1.0) <= 1e-9

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            project_to_simplex([1.0, 2.0])


class TestDeConfig:
    def test_defaults_valid(self):
        config = DeConfig()
        assert config.population_size == 40
        assert config.generations == 200

    @pytest.mark.parametrize("kwargs", [
        {"population_size": 3},
        {"differential_weight": 0.0},
        {"differential_weight": 2.5},
        {"crossover_rate": 1.5},
        {"generations": 0},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            DeConfig(**kwargs)


class TestDifferentialEvolution:
    def test_deterministic(self):
        def objective(w):
            return -float(np.var(w.as_array()))

        config = DeConfig(generations=30, seed=77)
        first = differential_evolution(objective, config)
        second = differential_evolution(objective, config)
        assert first == second

    def test_history_non_decreasing_arbitrary_objectives(self):
        rng = np.random.default_rng(31)
        direction = rng.standard_normal(N_FEATURES)

        objectives = [
            lambda w: float(w.as_array() @ direction),
            lambda w: -float(np.abs(w.as_array() - 0.2).sum()),
            lambda w: float(np.sin(10 * w.as_array()).sum()),
        ]
        for i, objective in enumerate(objectives):
            result = differential_evolution(objective, DeConfig(generations=40, seed=i))
            assert all(b >= a for a, b in itertools.pairwise(result.history))
            assert result.best_objective == result.history[-1]

    def test_recovers_uniform_optimum(self):
        def objective(w):
            return -float(np.sum((w.as_array() - 1.0 / N_FEATURES) ** 2))

        result = differential_evolution(objective, DeConfig(seed=1))
        assert np.abs(result.best_weights.as_array() - 1.0 / N_FEATURES).max() <= 1e-3

    def test_recovers_arbitrary_concave_optimum(self):
        rng = np.random.default_rng(99)
        target = rng.random(N_FEATURES)
        target /= target.sum()

        def objective(w):
            return -float(np.sum((w.as_array() - target) ** 2))

        result = differential_evolution(objective, DeConfig(seed=5))
        assert np.abs(result.best_weights.as_array() - target).max() <= 1e-3

    def test_every_individual_on_simplex(self):
        seen = []

        def objective(w):
            seen.append(w)
            return float(w.values[0])

        differential_evolution(objective, DeConfig(generations=15, seed=3))
        assert len(seen) == 40 * 16
        for w in seen:
            assert min(w.values) >= 0.0
            assert abs(sum(w.values) - 1.0) <= 1e-9

    def test_batch_objective_matches_scalar(self, pipeline):
        objective = MrrObjective(list(pipeline.questions), pipeline.matrices)
        rng = np.random.default_rng(37)
        population = rng.random((16, N_FEATURES))
        population /= population.sum(axis=1, keepdims=True)
        batch = objective.batch(population)
        scalar = np.array([objective(WeightVector.from_array(row)) for row in population])
        np.testing.assert_array_equal(batch, scalar)

    def test_batch_and_scalar_de_agree(self, pipeline):
        objective = MrrObjective(list(pipeline.questions), pipeline.matrices)
        config = DeConfig(generations=25, seed=13)
        via_batch = differential_evolution(objective, config, batch_objective=objective.batch)
        via_scalar = differential_evolution(objective, config)
        assert via_batch == via_scalar

    def test_requires_an_objective(self):
        with pytest.raises(ValueError):
            differential_evolution(None, DeConfig())


class TestMrrObjectiveAgainstRankedLists:
    def test_matches_combine_plus_mrr(self, pipeline):
        # Dual route: the cached-matrix objective equals combine() then mrr().
        from parafuse.fusion import combine

        weights = WeightVector.uniform()
        objective = MrrObjective(list(pipeline.questions), pipeline.matrices)
        lists = [combine(pipeline.matrices[q.q_id], weights) for q in pipeline.questions]
        assert objective(weights) == pytest.approx(mrr(lists, pipeline.questions), abs=1e-15)

    def test_matches_on_random_weights(self, pipeline):
        from parafuse.fusion import combine

        rng = np.random.default_rng(41)
        objective = MrrObjective(list(pipeline.questions), pipeline.matrices)
        for _ in range(5):
            values = rng.random(N_FEATURES)
            weights = WeightVector.from_array(values / values.sum())
            lists = [combine(pipeline.matrices[q.q_id], weights) for q in pipeline.questions]
            assert objective(weights) == pytest.approx(mrr(lists, pipeline.questions), abs=1e-15)


def planted_fixture(n_questions=8, pool=12, seed=43):
    """Matrices where feature 0 perfectly ranks the gold first; others are noise."""
    rng = np.random.default_rng(seed)
    questions = []
    matrices = {}
    for qi in range(n_questions):
        q_id = f"q{qi}"
        candidates = tuple(f"d:{i:03d}" for i in range(pool))
        gold = candidates[int(rng.integers(pool))]
        raw = rng.random((pool, N_FEATURES))
        raw[:, 0] = 0.0
        raw[candidates.index(gold), 0] = 1.0
        questions.append(question(q_id, {gold}))
        matrices[q_id] = zscore_normalize(FeatureMatrix(q_id, candidates, raw))
    return questions, matrices


class TestTuneWeights:
    def test_planted_perfect_feature(self):
        questions, matrices = planted_fixture()
        config = DeConfig(generations=60, seed=7)
        result = tune_weights(questions, matrices, config)
        uniform_score = MrrObjective(questions, matrices)(WeightVector.uniform())
        assert result.best_objective >= uniform_score
        assert result.best_objective == 1.0  # the planted column can always win

    def test_single_question_objective_domain(self):
        questions, matrices = planted_fixture(n_questions=1, pool=6)
        result = tune_weights(questions, matrices, DeConfig(generations=10, seed=1))
        pool = 6
        assert result.best_objective in {0.0} | {1.0 / r for r in range(1, pool + 1)}

    def test_never_below_uniform_on_training_data(self, pipeline):
        # Guaranteed by seeding the uniform vector into the initial population.
        config = DeConfig(generations=20, seed=29)
        result = tune_weights(list(pipeline.questions), pipeline.matrices, config)
        uniform = MrrObjective(list(pipeline.questions), pipeline.matrices)(WeightVector.uniform())
        assert result.best_objective >= uniform

    def test_empty_training_set(self):
        with pytest.raises(ValueError, match="empty"):
            tune_weights([], {}, DeConfig())

    def test_missing_matrix_named(self):
        questions, matrices = planted_fixture(n_questions=2)
        del matrices["q1"]
        with pytest.raises(ValueError, match="q1"):
            tune_weights(questions, matrices, DeConfig())

    def test_de_close_to_grid_oracle_on_three_features(self):
        # Exhaustive simplex grid over three active columns as the oracle.
        questions, matrices = planted_fixture(n_questions=6, pool=10, seed=47)
        active = [0, 6, 7]
        masked = {}
        for q_id, matrix in matrices.items():
            normalized = matrix.normalized.copy()
            keep = np.zeros(N_FEATURES, dtype=bool)
            keep[active] = True
            normalized[:, ~keep] = 0.0
            masked[q_id] = FeatureMatrix(matrix.q_id, matrix.candidates, matrix.raw, normalized)
        objective = MrrObjective(questions, masked)

        step = 0.05
        best_grid = -1.0
        grid = []
        for i in range(21):
            for j in range(21 - i):
                a, b = i * step, j * step
                values = np.zeros(N_FEATURES)
                values[active[0]], values[active[1]], values[active[2]] = a, b, 1.0 - a - b
                grid.append(values)
        best_grid = objective.batch(np.array(grid)).max()

        result = differential_evolution(objective, DeConfig(seed=3), batch_objective=objective.batch)
        assert abs(result.best_objective - best_grid) <= 0.01


class TestCrossValidate:
    def test_fold_structure_and_mean(self):
        questions, matrices = planted_fixture(n_questions=8)
        result = cross_validate(QuestionSet(questions), matrices, 4, DeConfig(generations=25, seed=11))
        assert len(result.fold_test_mrrs) == 4
        assert result.mean_test_mrr == pytest.approx(np.mean(result.fold_test_mrrs), abs=1e-15)
        assert abs(sum(result.average_weights.values) - 1.0) <= 1e-9

    def test_identical_matrices_identical_rounds(self):
        # Same matrix for every question: every round sees the same training
        # problem, so each returns the same weights and the average equals them.
        rng = np.random.default_rng(53)
        candidates = tuple(f"d:{i:03d}" for i in range(9))
        raw = rng.random((9, N_FEATURES))
        gold = candidates[2]
        questions = [question(f"q{i}", {gold}) for i in range(6)]
        matrices = {
            q.q_id: zscore_normalize(FeatureMatrix(q.q_id, candidates, raw))
            for q in questions
        }
        result = cross_validate(QuestionSet(questions), matrices, 3, DeConfig(generations=20, seed=2))
        for fold_weights in result.fold_weights:
            assert fold_weights == result.fold_weights[0]
        np.testing.assert_allclose(  # averaging three equal rows costs at most an ulp
            result.average_weights.as_array(), result.fold_weights[0].as_array(), rtol=0, atol=1e-15)

    def test_deterministic(self):
        questions, matrices = planted_fixture(n_questions=6, pool=8)
        config = DeConfig(generations=15, seed=19)
        first = cross_validate(QuestionSet(questions), matrices, 3, config)
        second = cross_validate(QuestionSet(questions), matrices, 3, config)
        assert first == second

    def test_rejects_bad_round_counts(self):
        questions, matrices = planted_fixture(n_questions=6)
        with pytest.raises(InputError):
            cross_validate(QuestionSet(questions), matrices, 1, DeConfig())
        with pytest.raises(InputError, match="divide"):
            cross_validate(QuestionSet(questions), matrices, 4, DeConfig())

    def test_report_structure(self):
        questions, matrices = planted_fixture(n_questions=6)
        result = cross_validate(QuestionSet(questions), matrices, 3, DeConfig(generations=10, seed=1))
        report = format_tuning_report(result)
        lines = report.splitlines()
        assert lines[0] == "round\ttest_mrr"
        assert sum(1 for line in lines if line.startswith("mean_test_mrr\t")) == 1
        assert "feature\taverage_weight" in lines
        assert "q_baseline" in report and "ev_lda_100" in report

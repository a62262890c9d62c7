"""Weight tuning: mean reciprocal rank, simplex projection, the DE/rand/1/bin
optimizer, and the cross-validation protocol.

Feature matrices are weight-independent, so they are computed once and cached
before tuning; a tuning objective evaluation then reduces to one matrix
product and a rank lookup per question, which is what makes thousands of
optimizer evaluations cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .corpus import Question, QuestionSet
from .errors import InputError
from .features import N_FEATURES
from .fusion import FeatureMatrix, RankedList, WeightVector


def mrr(ranked: Iterable[RankedList], questions: QuestionSet) -> float:
    """Mean over questions of 1/rank of the best-ranked gold paragraph (0 if absent)."""
    if len(questions) == 0:
        raise ValueError("cannot compute MRR over an empty question set")
    by_q: dict[str, RankedList] = {}
    for ranked_list in ranked:
        if ranked_list.q_id in by_q:
            raise ValueError(f"more than one ranked list for question {ranked_list.q_id!r}")
        by_q[ranked_list.q_id] = ranked_list
    total = 0.0
    for question in questions:
        ranked_list = by_q.pop(question.q_id, None)
        if ranked_list is None:
            raise ValueError(f"no ranked list for question {question.q_id!r}")
        for position, (para_id, _) in enumerate(ranked_list.entries, start=1):
            if para_id in question.gold_para_ids:
                total += 1.0 / position
                break
    if by_q:
        raise ValueError(f"ranked lists for unknown questions: {sorted(by_q)}")
    return total / len(questions)


def _project_rows(population: np.ndarray) -> np.ndarray:
    """Clamp to the non-negative orthant and renormalize each row onto the simplex;
    an all-zero row falls back to the uniform vector."""
    clipped = np.maximum(population, 0.0)
    sums = clipped.sum(axis=1, keepdims=True)
    safe = np.where(sums == 0.0, 1.0, sums)
    out = np.where(sums == 0.0, 1.0 / population.shape[1], clipped / safe)
    return out


def project_to_simplex(vector: Sequence[float] | np.ndarray) -> WeightVector:
    row = np.asarray(vector, dtype=np.float64).reshape(1, -1)
    if row.shape[1] != N_FEATURES:
        raise ValueError(f"expected a length-{N_FEATURES} vector, got {row.shape[1]}")
    return WeightVector.from_array(_project_rows(row)[0])


@dataclass(frozen=True)
class DeConfig:
    population_size: int = 40
    differential_weight: float = 0.7
    crossover_rate: float = 0.9
    generations: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 4:
            raise ValueError("population_size must be >= 4 (mutation needs three distinct others)")
        if not 0.0 < self.differential_weight <= 2.0:
            raise ValueError("differential_weight must be in (0, 2]")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must be in [0, 1]")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")


@dataclass(frozen=True)
class TuningResult:
    best_weights: WeightVector
    best_objective: float
    history: tuple[float, ...]  # best objective after init and after each generation


BatchObjective = Callable[[np.ndarray], np.ndarray]


def differential_evolution(
    objective: Callable[[WeightVector], float] | None,
    config: DeConfig,
    *,
    batch_objective: BatchObjective | None = None,
) -> TuningResult:
    """Maximize the objective over the weight simplex with DE/rand/1/bin.

    Individuals start uniform on [0,1]^N and are projected onto the simplex;
    the uniform weight vector is seeded into the initial population. A trial
    replaces its parent iff its objective is >= the parent's, so the history
    of per-generation bests never decreases.

    `batch_objective`, when given, evaluates a whole (m, N) population matrix
    to an (m,) vector in one call and takes precedence over `objective`.
    """
    if objective is None and batch_objective is None:
        raise ValueError("either objective or batch_objective is required")

    def evaluate(population: np.ndarray) -> np.ndarray:
        if batch_objective is not None:
            return np.asarray(batch_objective(population), dtype=np.float64)
        return np.array([objective(WeightVector.from_array(row)) for row in population], dtype=np.float64)

    pop_size = config.population_size
    rng = np.random.default_rng(config.seed)
    population = _project_rows(rng.random((pop_size, N_FEATURES)))
    population[0] = 1.0 / N_FEATURES
    fitness = evaluate(population)
    history = [float(fitness.max())]

    rows = np.arange(pop_size)
    for _ in range(config.generations):
        partners = np.empty((pop_size, 3), dtype=np.int64)
        for i in range(pop_size):
            draw = rng.choice(pop_size - 1, size=3, replace=False)
            partners[i] = np.where(draw >= i, draw + 1, draw)
        mutants = population[partners[:, 0]] + config.differential_weight * (
            population[partners[:, 1]] - population[partners[:, 2]]
        )
        crossover = rng.random((pop_size, N_FEATURES)) < config.crossover_rate
        crossover[rows, rng.integers(0, N_FEATURES, pop_size)] = True  # one forced dimension
        trials = _project_rows(np.where(crossover, mutants, population))
        trial_fitness = evaluate(trials)
        accept = trial_fitness >= fitness
        population[accept] = trials[accept]
        fitness[accept] = trial_fitness[accept]
        history.append(float(fitness.max()))

    best = int(np.argmax(fitness))
    return TuningResult(
        best_weights=WeightVector.from_array(population[best]),
        best_objective=float(fitness[best]),
        history=tuple(history),
    )


class MrrObjective:
    """Mean reciprocal rank over cached, normalized feature matrices as a function
    of the weight vector, evaluated for whole weight populations at once.

    Ranks honour the combine() tie rule: candidates are stored ascending by
    para_id, so among equal scores the lower row index ranks first.
    """

    def __init__(self, questions: Sequence[Question], matrices: Mapping[str, FeatureMatrix]):
        if len(questions) == 0:
            raise ValueError("empty training set")
        self._entries = []
        for question in questions:
            matrix = matrices.get(question.q_id)
            if matrix is None:
                raise ValueError(f"no cached matrix for question {question.q_id!r}")
            if matrix.normalized is None:
                raise ValueError(f"matrix for question {question.q_id!r} is not normalized")
            golds = np.array(
                [row for row, pid in enumerate(matrix.candidates) if pid in question.gold_para_ids],
                dtype=np.int64,
            )
            if golds.size == 0:
                continue  # gold never retrieved: contributes 0 for any weights
            rows = np.arange(len(matrix.candidates))
            earlier = rows[:, None] < golds[None, :]  # (n, g): tie-break mask
            self._entries.append((matrix.normalized, golds, earlier))
        self._n_questions = len(questions)

    def batch(self, population: np.ndarray) -> np.ndarray:
        population = np.asarray(population, dtype=np.float64)
        reciprocal = np.zeros(population.shape[0], dtype=np.float64)
        for normalized, golds, earlier in self._entries:
            scores = normalized @ population.T  # (n, m)
            gold_scores = scores[golds]  # (g, m)
            beaten = (scores[:, None, :] > gold_scores[None, :, :]).sum(axis=0)
            tied_earlier = ((scores[:, None, :] == gold_scores[None, :, :]) & earlier[:, :, None]).sum(axis=0)
            ranks = 1 + beaten + tied_earlier
            reciprocal += (1.0 / ranks).max(axis=0)
        return reciprocal / self._n_questions

    def __call__(self, weights: WeightVector) -> float:
        return float(self.batch(weights.as_array().reshape(1, -1))[0])


def tune_weights(
    questions: Sequence[Question],
    matrices: Mapping[str, FeatureMatrix],
    config: DeConfig,
) -> TuningResult:
    """Run the optimizer against mean MRR over the given training questions."""
    objective = MrrObjective(questions, matrices)
    return differential_evolution(objective, config, batch_objective=objective.batch)


@dataclass(frozen=True)
class CrossValidationResult:
    fold_test_mrrs: tuple[float, ...]
    fold_weights: tuple[WeightVector, ...]
    fold_histories: tuple[tuple[float, ...], ...]
    mean_test_mrr: float
    average_weights: WeightVector


def cross_validate(
    questions: QuestionSet,
    matrices: Mapping[str, FeatureMatrix],
    rounds: int,
    config: DeConfig,
) -> CrossValidationResult:
    """Disjoint k-fold protocol: tune on all-but-one fold, score the held-out fold.

    Reports the mean of the per-round test MRRs and the arithmetic mean of the
    per-round best weights. Every round runs the optimizer from its own
    generator seeded with config.seed, so rounds are order-independent and two
    rounds with identical training data produce identical weights.
    """
    if rounds < 2:
        raise InputError(f"cross-validation needs at least 2 rounds, got {rounds}")
    if len(questions) % rounds != 0:
        raise InputError(f"{len(questions)} questions do not divide into {rounds} equal folds")
    fold_size = len(questions) // rounds
    if fold_size == 0:
        raise InputError("fold size is zero")

    ordered = list(questions)
    test_mrrs = []
    weights = []
    histories = []
    for r in range(rounds):
        test = ordered[r * fold_size : (r + 1) * fold_size]
        train = ordered[: r * fold_size] + ordered[(r + 1) * fold_size :]
        result = tune_weights(train, matrices, config)
        test_objective = MrrObjective(test, matrices)
        test_mrrs.append(float(test_objective(result.best_weights)))
        weights.append(result.best_weights.as_array())
        histories.append(result.history)

    return CrossValidationResult(
        fold_test_mrrs=tuple(test_mrrs),
        fold_weights=tuple(WeightVector.from_array(w) for w in weights),
        fold_histories=tuple(histories),
        mean_test_mrr=float(np.mean(test_mrrs)),
        average_weights=WeightVector.from_array(np.mean(np.stack(weights), axis=0)),
    )


def format_tuning_report(result: CrossValidationResult) -> str:
    """Tab-separated tuning report: per-round test MRR, the mean, the averaged
    weights, and the optimizer history of every round."""
    lines = ["round\ttest_mrr"]
    for r, value in enumerate(result.fold_test_mrrs, start=1):
        lines.append(f"{r}\t{value!r}")
    lines.append("")
    lines.append("summary\tvalue")
    lines.append(f"rounds\t{len(result.fold_test_mrrs)}")
    lines.append(f"mean_test_mrr\t{result.mean_test_mrr!r}")
    lines.append("")
    lines.append("feature\taverage_weight")
    for feature, value in result.average_weights.as_mapping().items():
        lines.append(f"{feature.value}\t{value!r}")
    lines.append("")
    lines.append("round\tgeneration\tbest_objective")
    for r, history in enumerate(result.fold_histories, start=1):
        for generation, value in enumerate(history):
            lines.append(f"{r}\t{generation}\t{value!r}")
    return "\n".join(lines) + "\n"

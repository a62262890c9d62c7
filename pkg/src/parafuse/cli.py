"""Command-line entry point: build artifacts, retrieve, tune, evaluate, and
generate synthetic data.

Configuration comes from a flat `key = value` file plus flag overrides; flags
win. Exit status is 0 on success, 1 on internal errors, 2 on user or
configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Corpus, QuestionSet, gen_synthetic, load_corpus, load_questions, save_corpus, save_questions
from .errors import InputError
from .features import EvaluatorSet, generate_queries
from .fusion import FeatureMatrix, WeightVector, collect_candidates, combine, load_weights, save_weights, zscore_normalize
from .index import IndexVariant, build_index, load_index, save_index
from .lda import load_lda, save_lda, train_lda
from .seeds import DOMAIN_LDA, derive_seed
from .textproc import LexiconSet
from .tuner import DeConfig, MrrObjective, cross_validate, format_tuning_report

_DATA = resources.files("parafuse") / "data"

_INDEX_FILES = {variant: f"{variant.value}.fidx" for variant in IndexVariant}
_MODEL_FILES = {10: "lda_10.flda", 100: "lda_100.flda"}


@dataclass
class RunConfig:
    corpus: str | None = None
    questions: str | None = None
    stopwords: str = str(_DATA / "stopwords.txt")
    lemmas: str = str(_DATA / "lemmas.tsv")
    synonyms: str = str(_DATA / "synonyms.tsv")
    gazetteer: str = str(_DATA / "gazetteer.txt")
    index_dir: str = "artifacts"
    model_dir: str = "artifacts"
    k: int = 100
    folds: int = 20
    seed: int = 0
    de_population: int = 40
    de_weight: float = 0.7
    de_crossover: float = 0.9
    de_generations: int = 200
    lda_iterations: int = 1000

    def de_config(self) -> DeConfig:
        try:
            return DeConfig(
                population_size=self.de_population,
                differential_weight=self.de_weight,
                crossover_rate=self.de_crossover,
                generations=self.de_generations,
                seed=self.seed,
            )
        except ValueError as exc:
            raise InputError(f"bad optimizer configuration: {exc}") from exc

    def validate(self) -> None:
        if self.k < 1:
            raise InputError(f"k must be >= 1, got {self.k}")
        if self.lda_iterations < 1:
            raise InputError(f"lda_iterations must be >= 1, got {self.lda_iterations}")
        self.de_config()


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_config_file(path: str) -> dict[str, str]:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"config file not found: {p}")
    values: dict[str, str] = {}
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise InputError(f"{p}:{lineno}: expected `key = value`, got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _FIELD_TYPES:
            raise InputError(f"{p}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def _build_run_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    file_values = _parse_config_file(args.config) if getattr(args, "config", None) else {}
    for key, raw in file_values.items():
        kind = _FIELD_TYPES[key]
        try:
            if kind == "int":
                setattr(config, key, int(raw))
            elif kind == "float":
                setattr(config, key, float(raw))
            else:
                setattr(config, key, raw)
        except ValueError as exc:
            raise InputError(f"config key {key!r}: bad value {raw!r}") from exc
    for key in _FIELD_TYPES:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            setattr(config, key, flag_value)
    config.validate()
    return config


def _require(config: RunConfig, *keys: str) -> None:
    for key in keys:
        if getattr(config, key) is None:
            raise InputError(f"missing required setting {key!r} (flag --{key.replace('_', '-')} or config file)")


def _load_lexicons(config: RunConfig) -> LexiconSet:
    return LexiconSet.load(config.stopwords, config.lemmas, config.synonyms, config.gazetteer)


def _load_engine(config: RunConfig) -> tuple[Corpus, LexiconSet, dict[IndexVariant, object], EvaluatorSet]:
    _require(config, "corpus")
    corpus = load_corpus(config.corpus)
    lexicons = _load_lexicons(config)
    index_dir = Path(config.index_dir)
    indices = {variant: load_index(index_dir / name) for variant, name in _INDEX_FILES.items()}
    model_dir = Path(config.model_dir)
    model_10 = load_lda(model_dir / _MODEL_FILES[10])
    model_100 = load_lda(model_dir / _MODEL_FILES[100])
    evaluators = EvaluatorSet(corpus, lexicons, model_10, model_100)
    return corpus, lexicons, indices, evaluators


def _build_matrices(
    questions: QuestionSet,
    lexicons: LexiconSet,
    indices: Mapping[IndexVariant, object],
    evaluators: EvaluatorSet,
    k: int,
) -> dict[str, FeatureMatrix]:
    matrices = {}
    for question in questions:
        bundle = generate_queries(question.text, lexicons)
        matrix = collect_candidates(question.text, bundle, indices, evaluators, k, q_id=question.q_id)
        matrices[question.q_id] = zscore_normalize(matrix)
    return matrices


def _log(message: str) -> None:
    print(message, file=sys.stderr)


# -- subcommands -----------------------------------------------------------------


def _cmd_gen_synthetic(args: argparse.Namespace) -> int:
    corpus, questions = gen_synthetic(args.paragraphs, args.n_questions, args.seed)
    save_corpus(corpus, args.out_corpus)
    save_questions(questions, args.out_questions)
    _log(f"wrote {len(corpus)} paragraphs to {args.out_corpus} and {len(questions)} questions to {args.out_questions}")
    return 0


def _cmd_build(args: argparse.Namespace) -> int:
    config = _build_run_config(args)
    _require(config, "corpus")
    stage = "loading inputs"
    try:
        corpus = load_corpus(config.corpus)
        lexicons = _load_lexicons(config)

        index_dir = Path(config.index_dir)
        index_dir.mkdir(parents=True, exist_ok=True)
        for variant, name in _INDEX_FILES.items():
            stage = f"building {variant.value} index"
            _log(stage)
            save_index(build_index(corpus, variant, lexicons), index_dir / name)

        model_dir = Path(config.model_dir)
        model_dir.mkdir(parents=True, exist_ok=True)
        for n_topics, name in _MODEL_FILES.items():
            stage = f"training {n_topics}-topic model"
            _log(f"{stage} ({config.lda_iterations} iterations)")
            model = train_lda(
                corpus,
                n_topics,
                stopwords=lexicons.stopwords,
                iterations=config.lda_iterations,
                seed=derive_seed(config.seed, DOMAIN_LDA, n_topics),
            )
            save_lda(model, model_dir / name)
    except InputError as exc:
        raise InputError(f"{stage}: {exc}") from exc
    _log(f"build complete: {len(_INDEX_FILES)} indices in {index_dir}, {len(_MODEL_FILES)} models in {model_dir}")
    return 0


def _cmd_retrieve(args: argparse.Namespace) -> int:
    config = _build_run_config(args)
    if args.limit < 1:
        raise InputError(f"--limit must be >= 1, got {args.limit}")
    corpus, lexicons, indices, evaluators = _load_engine(config)
    weights = load_weights(args.weights) if args.weights else WeightVector.uniform()

    bundle = generate_queries(args.question, lexicons)
    matrix = zscore_normalize(collect_candidates(args.question, bundle, indices, evaluators, config.k, q_id="adhoc"))
    ranking = combine(matrix, weights)

    print("rank\tpara_id\tscore\ttext")
    for rank, (para_id, score) in enumerate(ranking.entries[: args.limit], start=1):
        snippet = corpus.get(para_id).text[:120]
        print(f"{rank}\t{para_id}\t{score!r}\t{snippet}")
    if not ranking.entries:
        _log("no candidates: every query came back empty for this question")
    return 0


def _cmd_tune(args: argparse.Namespace) -> int:
    config = _build_run_config(args)
    _require(config, "questions")
    corpus, lexicons, indices, evaluators = _load_engine(config)
    questions = load_questions(config.questions, corpus)

    _log(f"computing feature matrices for {len(questions)} questions")
    matrices = _build_matrices(questions, lexicons, indices, evaluators, config.k)
    _log(f"cross-validating over {config.folds} folds")
    result = cross_validate(questions, matrices, config.folds, config.de_config())

    save_weights(result.average_weights, args.out_weights)
    Path(args.report).write_text(format_tuning_report(result), encoding="utf-8")
    _log(f"wrote weights to {args.out_weights} and report to {args.report}")
    print(repr(result.mean_test_mrr))
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config = _build_run_config(args)
    _require(config, "questions")
    corpus, lexicons, indices, evaluators = _load_engine(config)
    questions = load_questions(config.questions, corpus)
    weights = load_weights(args.weights) if args.weights else WeightVector.uniform()

    matrices = _build_matrices(questions, lexicons, indices, evaluators, config.k)
    objective = MrrObjective(list(questions), matrices)
    print(repr(objective(weights)))
    return 0


# -- argument parsing --------------------------------------------------------------


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--corpus", help="corpus file (one JSON record per line)")
    parser.add_argument("--questions", help="question file (one JSON record per line)")
    parser.add_argument("--stopwords", help="stopword list, one word per line")
    parser.add_argument("--lemmas", help="lemma lexicon TSV")
    parser.add_argument("--synonyms", help="synonym lexicon TSV")
    parser.add_argument("--gazetteer", help="gazetteer, one entity per line")
    parser.add_argument("--index-dir", dest="index_dir", help="directory for .fidx files")
    parser.add_argument("--model-dir", dest="model_dir", help="directory for .flda files")
    parser.add_argument("--k", type=int, help="retrieval depth per query (default 100)")
    parser.add_argument("--folds", type=int, help="cross-validation folds (default 20)")
    parser.add_argument("--seed", type=int, help="top-level seed (default 0)")
    parser.add_argument("--de-population", dest="de_population", type=int, help="optimizer population size")
    parser.add_argument("--de-weight", dest="de_weight", type=float, help="optimizer differential weight")
    parser.add_argument("--de-crossover", dest="de_crossover", type=float, help="optimizer crossover rate")
    parser.add_argument("--de-generations", dest="de_generations", type=int, help="optimizer generations")
    parser.add_argument("--lda-iterations", dest="lda_iterations", type=int, help="topic model training iterations")


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parafuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic", help="generate a synthetic corpus and question set")
    p.add_argument("--paragraphs", type=int, required=True)
    p.add_argument("--n-questions", dest="n_questions", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-corpus", dest="out_corpus", required=True)
    p.add_argument("--out-questions", dest="out_questions", required=True)
    p.set_defaults(func=_cmd_gen_synthetic)

    p = sub.add_parser("build", help="build the four indices and the two topic models")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("retrieve", help="rank paragraphs for one question")
    _add_config_flags(p)
    p.add_argument("--question", required=True, help="question text")
    p.add_argument("--weights", help="weight file (default: uniform weights)")
    p.add_argument("--limit", type=int, default=10, help="rows to print (default 10)")
    p.set_defaults(func=_cmd_retrieve)

    p = sub.add_parser("tune", help="cross-validated weight tuning")
    _add_config_flags(p)
    p.add_argument("--out-weights", dest="out_weights", required=True, help="where to write averaged weights")
    p.add_argument("--report", required=True, help="where to write the tuning report")
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("evaluate", help="mean reciprocal rank over the question set")
    _add_config_flags(p)
    p.add_argument("--weights", help="weight file (default: uniform weights)")
    p.set_defaults(func=_cmd_evaluate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports and exits
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

"""
=====================================
Command line (:mod:`IncomeVerification.cli`)
=====================================

.. currentmodule:: IncomeVerification.cli

The ``income-verification`` command. Every subcommand reads an optional
JSON run configuration, applies its flags on top and writes
``<out-dir>/manifest.json``.

Exit codes: 0 on success, 1 on invalid usage, configuration or input, 2 on
any other failure.

.. autosummary::
    :toctree: generated/

    build_parser
    main

"""

import argparse
import json
from pathlib import Path
import sys

import pandas as pd

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import (
    ConfigurationError, ContractViolation, RejectedInput
)
from IncomeVerification.canon import load_alias_table
from IncomeVerification.core import Money, identity_from_dict, stats_table
from IncomeVerification.datagen import (
    SynthConfig, generate_synthetic, write_synthetic, ColumnMap, ingest_h1b,
    simulate_stated_income, write_examples, read_examples, sample_examples,
    load_corpus, read_match_labels, true_incomes,
)
from IncomeVerification.extract import extract_corpus, load_path_specs, load_patterns
from IncomeVerification.match import PairDecisionTree
from IncomeVerification.retrieval import CorpusIndex, load_industry_table
from IncomeVerification.pipeline import (
    VARIANTS, RunConfig, make_backend, ExternalResources, match_training_pairs,
    fit_matcher, train_model, save_model, load_model, predict_income,
    verify_income, evaluate_models, verification_report, ablate, STUDIES,
    plot_source_count, write_manifest,
)


__all__ = ['build_parser', 'main']


logger = log.get_logger('cli')

USAGE_ERROR = 1
RUNTIME_ERROR = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser exiting with 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f'{self.prog}: error: {message}')


def _common_arguments():
    common = _Parser(add_help=False)
    common.add_argument('--config', help='JSON run configuration.')
    common.add_argument('--seed', type=int)
    common.add_argument('--tau', type=float)
    common.add_argument('--alias-table')
    common.add_argument('--index-in', help='Prebuilt corpus index.')
    common.add_argument('--matcher', help='Trained matcher tree.')
    common.add_argument('--out-dir')
    common.add_argument('--threads', type=int)
    common.add_argument('--sample-n', type=int, help='Subsample the datasets.')
    common.add_argument('--sample-seed', type=int, default=0)
    return common


def build_parser():
    """Parser of all subcommands."""
    parser = _Parser(
        prog='income-verification',
        description='Predict and verify annual incomes.',
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    common = _common_arguments()

    synth = subparsers.add_parser(
        'synth', parents=[common], help='Generate synthetic datasets and corpus.'
    )
    synth.add_argument('--preset', default='client')
    synth.add_argument('--n-rows', type=int)
    synth.set_defaults(func=cmd_synth)

    ingest = subparsers.add_parser(
        'ingest', parents=[common], help='Ingest an H-1B disclosure CSV.'
    )
    ingest.add_argument('--input', required=True)
    ingest.add_argument('--column-map')
    ingest.add_argument(
        '--simulate-stated', action='store_true',
        help='Add simulated stated incomes to rows without one.',
    )
    ingest.set_defaults(func=cmd_ingest)

    index = subparsers.add_parser(
        'index', parents=[common], help='Build the corpus index.'
    )
    index.add_argument('--index-out')
    index.set_defaults(func=cmd_index)

    matcher = subparsers.add_parser(
        'train-matcher', parents=[common], help='Train the record matcher.'
    )
    matcher.set_defaults(func=cmd_train_matcher)

    train = subparsers.add_parser('train', parents=[common], help='Train a model.')
    train.add_argument('--variant', choices=VARIANTS)
    train.set_defaults(func=cmd_train)

    for name, func, text in [
            ('predict', cmd_predict, 'Predict the income of one identity.'),
            ('verify', cmd_verify, 'Verify the stated income of one identity.')]:
        sub = subparsers.add_parser(name, parents=[common], help=text)
        sub.add_argument('--input', required=True, help='Identity JSON.')
        sub.add_argument('--model', help='Model directory; <out-dir>/model if unset.')
        sub.add_argument('--variant', choices=VARIANTS)
        sub.set_defaults(func=func)

    evaluate = subparsers.add_parser(
        'evaluate', parents=[common], help='Cross-validate and test models.'
    )
    evaluate.add_argument(
        '--variant', choices=VARIANTS, action='append',
        help='Repeat for several variants; all if unset.',
    )
    evaluate.set_defaults(func=cmd_evaluate)

    ablation = subparsers.add_parser(
        'ablate', parents=[common], help='Run ablation studies.'
    )
    ablation.add_argument('--study', choices=STUDIES + ['all'], default='all')
    ablation.set_defaults(func=cmd_ablate)

    stats = subparsers.add_parser(
        'stats', parents=[common], help='Tabulate dataset statistics.'
    )
    stats.add_argument(
        '--dataset', action='append', metavar='NAME=PATH',
        help='Dataset CSV; train and test of the configuration if unset.',
    )
    stats.set_defaults(func=cmd_stats)

    return parser


def _single_variant(args):
    variant = getattr(args, 'variant', None)
    return variant if isinstance(variant, str) else None


def load_config(args):
    """Run configuration of the parsed arguments."""
    config = RunConfig.from_json(args.config) if args.config else RunConfig()
    config.update(
        seed=args.seed,
        tau=args.tau,
        alias_table=args.alias_table,
        index=args.index_in,
        matcher=args.matcher,
        out_dir=args.out_dir,
        threads=args.threads,
        variant=_single_variant(args),
    )
    return config


def _out_dir(config):
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def _examples(path, args):
    examples = read_examples(path)
    return sample_examples(examples, args.sample_n, args.sample_seed)


def _tables(config):
    industry_table = load_industry_table(config.industry_table)
    return industry_table, load_alias_table(config.alias_table)


def _external_corpus(config):
    if config.external_corpus is None:
        return None
    return pd.read_csv(config.external_corpus, keep_default_na=False)


def _resources(config, backend):
    """External resources of the configured corpus, matcher and index."""
    config.check_paths(required=('corpus', 'matcher'))
    industry_table, alias_table = _tables(config)
    corpus = load_corpus(config.corpus, backend)
    index = CorpusIndex.load(config.index) if config.index else None
    return ExternalResources.build(
        corpus, PairDecisionTree.load(config.matcher), config, index,
        industry_table, alias_table,
        load_path_specs(config.path_specs), load_patterns(config.patterns),
    )


def _needs_resources(variants):
    return any(v in ('external_gbt', 'combined') for v in variants)


def _write_json(data, path):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + '\n')


def _write_csv(df, path):
    df.to_csv(path, index=False, float_format='%.6f')
    logger.info(f'Wrote {path}.')


def cmd_synth(args, config):
    overrides = {'seed': config.seed}
    if args.n_rows is not None:
        overrides['n_rows'] = args.n_rows
    synth_config = SynthConfig.preset(args.preset, **overrides)
    data = generate_synthetic(synth_config)
    paths = write_synthetic(data, _out_dir(config))
    return {
        'synth_config': synth_config.to_dict(),
        'outputs': {name: str(path) for name, path in paths.items()},
    }


def cmd_ingest(args, config):
    column_map = ColumnMap.from_json(args.column_map) if args.column_map else None
    result = ingest_h1b(args.input, column_map)
    examples = sample_examples(result.examples, args.sample_n, args.sample_seed)
    if args.simulate_stated:
        examples = simulate_stated_income(examples, seed=config.seed)

    out_dir = _out_dir(config)
    write_examples(examples, out_dir / 'dataset.csv')
    _write_csv(
        pd.DataFrame(result.skipped, columns=['row', 'reason']),
        out_dir / 'skipped.csv',
    )
    logger.info(f'Ingested {len(examples)} rows, skipped {len(result.skipped)}.')
    return {'input': str(args.input), 'n_examples': len(examples)}


def cmd_index(args, config, backend):
    config.check_paths(required=('corpus',))
    corpus = load_corpus(config.corpus, backend)
    index = CorpusIndex.from_documents(
        corpus.records, k1=config.retrieval.k1, b=config.retrieval.b
    )
    path = Path(args.index_out) if args.index_out else _out_dir(config) / 'index.json'
    path.parent.mkdir(parents=True, exist_ok=True)
    index.save(path)
    logger.info(f'Indexed {len(corpus)} documents into {path}.')
    return {'index': str(path)}


def cmd_train_matcher(args, config, backend):
    config.check_paths(required=('train', 'match_labels', 'corpus'))
    industry_table, alias_table = _tables(config)

    examples = read_examples(config.train)
    if config.test is not None:
        examples += read_examples(config.test)
    identities = {e.identity.identity_id: e.identity for e in examples}

    corpus = load_corpus(config.corpus, backend)
    records, _ = extract_corpus(
        corpus.records, load_path_specs(config.path_specs),
        load_patterns(config.patterns),
    )
    pairs = match_training_pairs(
        read_match_labels(config.match_labels), identities, records,
        industry_table, alias_table, config.matcher_config,
    )
    tree, metrics = fit_matcher(pairs, config.matcher_config, config.seed)

    out_dir = _out_dir(config)
    tree.save(out_dir / 'matcher.json')
    _write_json(metrics, out_dir / 'matcher_metrics.json')
    print(json.dumps(metrics, sort_keys=True))
    return {'matcher': str(out_dir / 'matcher.json'), 'metrics': metrics}


def cmd_train(args, config, backend):
    config.check_paths(required=('train',))
    train = _examples(config.train, args)
    resources = None
    if _needs_resources([config.variant]):
        resources = _resources(config, backend)

    model = train_model(
        config.variant, train, config, config.seed, resources,
        _external_corpus(config), backend,
    )
    directory = _out_dir(config) / 'model'
    save_model(model, directory)
    return {'model': str(directory), 'n_examples': len(train)}


def _load_identity(path):
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except (OSError, ValueError) as e:
        raise ConfigurationError(f"Cannot read identity {path}: {e}") from e
    if not isinstance(data, dict):
        raise RejectedInput(f"Identity {path} is not a JSON object.")
    return identity_from_dict(data)


def _model_and_identity(args, config):
    directory = Path(args.model) if args.model else Path(config.out_dir) / 'model'
    industry_table, alias_table = _tables(config)
    model = load_model(directory, industry_table, alias_table)
    index = CorpusIndex.load(config.index) if config.index else None
    return model, index, _load_identity(args.input)


def cmd_predict(args, config):
    model, index, identity = _model_and_identity(args, config)
    predicted = predict_income(model, identity, index)
    result = {
        'identity_id': identity.identity_id,
        'predicted_income': predicted.dollars,
    }
    _write_json(result, _out_dir(config) / 'prediction.json')
    print(json.dumps(result, sort_keys=True))
    return {'input': str(args.input)}


def cmd_verify(args, config):
    model, index, identity = _model_and_identity(args, config)
    if identity.stated_income is None:
        raise RejectedInput("Verification needs a stated income.")

    predicted = predict_income(model, identity, index)
    decision = verify_income(predicted, identity.stated_income, config.tau)
    result = decision.to_dict()
    result['identity_id'] = identity.identity_id

    if hasattr(model, 'resources'):
        evidence = model.resources.salary_range(identity)
        if evidence is not None:
            result['salary_range'] = {
                key: value.dollars if isinstance(value, Money) else value
                for key, value in evidence._asdict().items()
            }

    _write_json(result, _out_dir(config) / 'decision.json')
    print(json.dumps(result, sort_keys=True))
    return {'input': str(args.input)}


def cmd_evaluate(args, config, backend):
    config.check_paths(required=('train', 'test'))
    variants = args.variant or VARIANTS
    train = _examples(config.train, args)
    test = _examples(config.test, args)
    resources = _resources(config, backend) if _needs_resources(variants) else None

    report, models = evaluate_models(
        variants, train, test, config, resources, _external_corpus(config),
        backend, return_models=True,
    )
    verification = verification_report(models, test, config.tau)

    out_dir = _out_dir(config)
    _write_csv(report, out_dir / 'prediction_report.csv')
    _write_csv(verification, out_dir / 'verification_report.csv')
    print(report.to_string(index=False))
    print(verification.to_string(index=False))
    return {'variants': list(variants)}


def cmd_ablate(args, config, backend):
    config.check_paths(required=('train', 'test'))
    studies = STUDIES if args.study == 'all' else [args.study]
    train = _examples(config.train, args)
    test = _examples(config.test, args)
    resources = None
    if any(study != 'input_features' for study in studies):
        resources = _resources(config, backend)

    out_dir = _out_dir(config)
    for study in studies:
        report = ablate(study, train, test, config, resources, backend=backend)
        _write_csv(report, out_dir / f'ablation_{study}.csv')
        if study == 'sources_count':
            plot_source_count(report, out_dir / 'source_count.png')
        print(report.to_string(index=False))
    return {'studies': studies}


def cmd_stats(args, config):
    datasets = {}
    if args.dataset:
        for item in args.dataset:
            name, sep, path = item.partition('=')
            if not sep:
                raise ConfigurationError(f"Expected NAME=PATH, got {item!r}.")
            datasets[name] = path
    else:
        for field in ('train', 'test'):
            if getattr(config, field) is not None:
                datasets[field.capitalize()] = getattr(config, field)
    if not datasets:
        raise ConfigurationError("No dataset given.")

    table = stats_table({
        name: true_incomes(_examples(path, args)) for name, path in datasets.items()
    })
    _write_csv(table, _out_dir(config) / 'dataset_stats.csv')
    print(table.to_string(index=False))
    return {'datasets': datasets}


_USES_BACKEND = {
    cmd_index, cmd_train_matcher, cmd_train, cmd_evaluate, cmd_ablate,
}


def run(args):
    """Execute parsed arguments and write the run manifest."""
    config = load_config(args)
    config.check_paths()
    if args.func in _USES_BACKEND:
        extra = args.func(args, config, make_backend(config.threads))
    else:
        extra = args.func(args, config)

    extra = dict(extra or {})
    extra['sample_n'] = args.sample_n
    extra['sample_seed'] = args.sample_seed
    write_manifest(config.out_dir, config, args.command, extra)


def main(argv=None):
    """Entry point of ``income-verification``; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(e, file=sys.stderr)
        return USAGE_ERROR

    try:
        run(args)
    except (ConfigurationError, ContractViolation, RejectedInput) as e:
        logger.error(str(e))
        print(f'error: {e}', file=sys.stderr)
        return USAGE_ERROR
    except Exception as e:
        logger.exception(f'{args.command} failed: {e}')
        print(f'error: {e}', file=sys.stderr)
        return RUNTIME_ERROR

    return 0


if __name__ == '__main__':
    sys.exit(main())

from collections import namedtuple

import numpy as np
import pandas as pd

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import ContractViolation
from IncomeVerification.core.metrics import compute_metrics
from IncomeVerification.core.rng import derive_seed
from .config import MODEL_NAMES, RunConfig
from .folds import kfold_indices
from .models import train_model


__all__ = [
    'CVResult', 'kfold_cv', 'model_spec', 'evaluate_models', 'score_model',
    'PREDICTION_COLUMNS',
]


logger = log.get_logger('pipeline')

PREDICTION_COLUMNS = ['Model', 'CV MAE', 'Test Set MAE', 'Test Set MRE']

CVResult = namedtuple('CVResult', ['mae', 'fold_maes', 'folds'])
CVResult.__doc__ = """Cross-validation MAE, per-fold MAEs and the folds."""


def _usable(examples, needs_stated):
    if not needs_stated:
        return list(examples)
    return [e for e in examples if e.identity.stated_income is not None]


def model_spec(
        variant, config=None, resources=None, external_corpus=None, backend=None):
    """Training callable ``fit(train_examples, seed) -> model`` of a variant."""
    config = config or RunConfig()

    def fit(train_examples, seed):
        return train_model(
            variant, train_examples, config, seed, resources, external_corpus,
            backend if variant in ('external_gbt', 'combined') else None,
        )

    fit.variant = variant
    fit.needs_stated = variant in ('external_gbt', 'combined')
    return fit


@log.log_time('pipeline')
def kfold_cv(model_spec, data, k=5, seed=0, backend=None):
    """k-fold cross-validation MAE.

    Parameters
    ----------
    model_spec : callable
        ``fit(train_examples, seed)`` returning a model with
        ``predict(identities)``.
    data : list of LabeledExample
    k : int, optional
    seed : int, optional
        Fixes the folds; models of one seed share them.
    backend : ParallelizationBackendBase, optional
        Trains folds in parallel; each fold is seeded independently.

    Returns
    -------
    CVResult
        ``mae`` is the mean of the fold MAEs.

    Raises
    ------
    ContractViolation
        If k < 2 or k exceeds the number of examples.
    """
    folds = kfold_indices(len(data), k, seed)

    def fold_mae(fold):
        i, (train_rows, valid_rows) = fold
        model = model_spec([data[r] for r in train_rows], derive_seed(seed, 'cv', i))
        valid = [data[r] for r in valid_rows]
        predictions = model.predict([e.identity for e in valid])
        return compute_metrics(predictions, [e.true_income for e in valid]).mae

    if backend is None:
        fold_maes = [fold_mae(fold) for fold in enumerate(folds)]
    else:
        fold_maes = backend.evaluate(fold_mae, list(enumerate(folds)))

    fold_maes = [float(m) for m in fold_maes]
    return CVResult(float(np.mean(fold_maes)), fold_maes, folds)


def score_model(model, test):
    """MetricsReport of a model on test examples."""
    predictions = model.predict([e.identity for e in test])
    return compute_metrics(predictions, [e.true_income for e in test])


@log.log_time('pipeline')
def evaluate_models(
        variants, train, test, config=None, resources=None, external_corpus=None,
        backend=None, k=None, seed=None, return_models=False):
    """Cross-validate, train and test model variants.

    All variants share the same folds. External and combined models only
    see examples with a stated income.

    Parameters
    ----------
    variants : list of str
    train, test : list of LabeledExample
    config : RunConfig, optional
    resources : ExternalResources, optional
    external_corpus : pandas.DataFrame, optional
    backend : ParallelizationBackendBase, optional
    k, seed : int, optional
        Default to ``config.k`` and ``config.seed``.
    return_models : bool, optional
        If True, also return the models trained on the full training set.

    Returns
    -------
    report : pandas.DataFrame
        Columns ``Model, CV MAE, Test Set MAE, Test Set MRE``.
    models : dict
        Report name -> model; only if ``return_models``.
    """
    config = config or RunConfig()
    k = config.k if k is None else k
    seed = config.seed if seed is None else seed

    rows = []
    models = {}
    for variant in variants:
        spec = model_spec(variant, config, resources, external_corpus, backend)
        variant_train = _usable(train, spec.needs_stated)
        variant_test = _usable(test, spec.needs_stated)
        if not variant_train or not variant_test:
            raise ContractViolation(f"No usable examples for variant {variant!r}.")

        cv = kfold_cv(spec, variant_train, k, seed)
        model = spec(variant_train, derive_seed(seed, 'full'))
        metrics = score_model(model, variant_test)

        name = MODEL_NAMES[variant]
        models[name] = model
        rows.append({
            'Model': name,
            'CV MAE': cv.mae,
            'Test Set MAE': metrics.mae,
            'Test Set MRE': metrics.mre,
        })
        logger.info(
            f'{name}: CV MAE {cv.mae:.3f}, test MAE {metrics.mae:.3f}, '
            f'test MRE {metrics.mre:.3f}.'
        )

    report = pd.DataFrame(rows, columns=PREDICTION_COLUMNS)
    if return_models:
        return report, models
    return report

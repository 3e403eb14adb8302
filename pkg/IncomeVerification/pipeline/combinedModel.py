import json
from pathlib import Path

import numpy as np

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import (
    ConfigurationError, ContractViolation
)
from IncomeVerification.dataStructure import dumps
from IncomeVerification.core.money import to_dollars
from IncomeVerification.core.rng import derive_seed
from IncomeVerification.extfeat import EXTERNAL_DIM
from IncomeVerification.learners import GBTEnsemble, gbt_train
from .config import RunConfig
from .externalModel import split_examples
from .folds import kfold_indices
from .internalModel import InternalModel, train_internal


__all__ = ['STACKING_DIM', 'CombinedModel', 'train_combined', 'stacking_inputs']


logger = log.get_logger('pipeline')

STACKING_DIM = EXTERNAL_DIM + 1

MODEL_FORMAT = 'combined-model'
MODEL_VERSION = 2


def stacking_inputs(external_features, internal_predictions):
    """External features followed by the internal prediction in dollars.

    Raises
    ------
    ContractViolation
        If the widths or lengths do not fit.
    """
    external_features = np.atleast_2d(np.asarray(external_features, dtype=float))
    internal_predictions = np.asarray(internal_predictions, dtype=float)

    if external_features.shape[1] != EXTERNAL_DIM:
        raise ContractViolation(
            f"Expected {EXTERNAL_DIM} external features, "
            f"got {external_features.shape[1]}."
        )
    if len(external_features) != len(internal_predictions):
        raise ContractViolation(
            f"Length mismatch: {len(external_features)} feature rows, "
            f"{len(internal_predictions)} internal predictions."
        )

    S = np.hstack([external_features, internal_predictions[:, None]])
    if S.shape[1] != STACKING_DIM:
        raise ContractViolation(f"Stacking input has width {S.shape[1]}.")
    return S


class CombinedModel():
    """Gradient boosting over the external features and the internal prediction.

    Parameters
    ----------
    internal : InternalModel
    resources : ExternalResources
    ensemble : GBTEnsemble
        Predicts the true income in dollars from 36 inputs.
    top_k : int, optional
    """

    def __init__(self, internal, resources, ensemble, top_k=5):
        if ensemble.n_features != STACKING_DIM:
            raise ContractViolation(
                f"Stacking ensemble expects {ensemble.n_features} inputs, "
                f"not {STACKING_DIM}."
            )
        self.internal = internal
        self.resources = resources
        self.ensemble = ensemble
        self.top_k = int(top_k)

    def stacking_inputs(self, identities, backend=None):
        F = self.resources.feature_matrix(identities, self.top_k, backend)
        return stacking_inputs(F, self.internal.predict(identities))

    def predict(self, identities, backend=None):
        """Predicted incomes in dollars; every identity needs a stated income."""
        missing = [i.identity_id for i in identities if i.stated_income is None]
        if missing:
            raise ContractViolation(
                f"Combined predictions require a stated income, missing for {missing}."
            )
        if len(identities) == 0:
            return np.zeros(0)

        return self.ensemble.predict(self.stacking_inputs(identities, backend))

    def save(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.internal.save(directory / 'internal')
        self.ensemble.save(directory / 'ensemble.json')
        header = {
            'format': MODEL_FORMAT,
            'version': MODEL_VERSION,
            'top_k': self.top_k,
        }
        (directory / 'model.json').write_text(dumps(header, indent=2))

    @classmethod
    def load(cls, directory, resources):
        directory = Path(directory)
        header = json.loads((directory / 'model.json').read_text())
        if header.get('format') != MODEL_FORMAT \
                or header.get('version') != MODEL_VERSION:
            raise ConfigurationError(
                f"Unsupported model format {header.get('format')!r} "
                f"version {header.get('version')!r} in {directory}."
            )
        return cls(
            InternalModel.load(directory / 'internal'), resources,
            GBTEnsemble.load(directory / 'ensemble.json'), header['top_k'],
        )

    def __repr__(self):
        return f'CombinedModel(internal={self.internal.variant!r}, top_k={self.top_k})'


def out_of_fold_predictions(
        train_set, variant, config, seed, external_corpus=None, backend=None):
    """Internal predictions for every example by a model that never saw it."""
    folds = kfold_indices(
        len(train_set), config.stacking_folds, derive_seed(seed, 'oof')
    )

    def fold_predictions(fold):
        i, (train_rows, valid_rows) = fold
        model = train_internal(
            [train_set[r] for r in train_rows], variant, config,
            derive_seed(seed, 'oof-fold', i), external_corpus,
        )
        return model.predict([train_set[r].identity for r in valid_rows])

    if backend is None:
        results = [fold_predictions(fold) for fold in enumerate(folds)]
    else:
        results = backend.evaluate(fold_predictions, list(enumerate(folds)))

    predictions = np.zeros(len(train_set))
    for (_, valid_rows), values in zip(folds, results):
        predictions[valid_rows] = values
    return predictions


@log.log_time('pipeline')
def train_combined(
        train_set, internal, resources, config=None, seed=0,
        external_corpus=None, backend=None):
    """Train the stacking model of the combined flow.

    Parameters
    ----------
    train_set : list of LabeledExample
    internal : InternalModel
        Trained on the full training set; used at prediction time.
    resources : ExternalResources
    config : RunConfig, optional
        ``out_of_fold`` selects out-of-fold internal predictions (from
        ``stacking_folds`` models of the same variant) as stacking input;
        otherwise the predictions of ``internal`` on its own training data
        are used. ``stacking_gbt`` holds the ensemble hyperparameters.
    seed : int, optional
    external_corpus : pandas.DataFrame, optional
        Needed to retrain external or tuned internal variants per fold.
    backend : ParallelizationBackendBase, optional

    Returns
    -------
    CombinedModel

    Raises
    ------
    ContractViolation
        If no example has a stated income or input widths do not fit.
    """
    config = config or RunConfig()
    top_k = config.retrieval.top_k

    usable, n_excluded = split_examples(train_set)
    if n_excluded:
        logger.warning(f'Excluded {n_excluded} examples without stated income.')
    if not usable:
        raise ContractViolation("No training example has a stated income.")

    identities = [e.identity for e in usable]
    if config.out_of_fold and len(usable) >= config.stacking_folds:
        internal_predictions = out_of_fold_predictions(
            usable, internal.variant, config, seed, external_corpus, backend
        )
    else:
        if config.out_of_fold:
            logger.warning(
                f'{len(usable)} examples are too few for {config.stacking_folds} '
                f'stacking folds; stacking in-sample predictions.'
            )
        internal_predictions = internal.predict(identities)

    F = resources.feature_matrix(identities, top_k, backend)
    S = stacking_inputs(F, internal_predictions)
    target = to_dollars([e.true_income for e in usable])

    ensemble = gbt_train(S, target, **config.stacking_gbt.kwargs())
    logger.info(f'Trained combined model on {len(usable)} examples.')

    return CombinedModel(internal, resources, ensemble, top_k)

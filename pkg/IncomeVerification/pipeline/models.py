import copy
import json
from pathlib import Path

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import ConfigurationError
from IncomeVerification.core.money import Money
from .combinedModel import CombinedModel, train_combined
from .config import INTERNAL_VARIANTS, VARIANTS, RunConfig
from .externalModel import ExternalModel, ExternalResources, train_external
from .internalModel import InternalModel, train_internal


__all__ = ['train_model', 'save_model', 'load_model', 'predict_income']


logger = log.get_logger('pipeline')


def _require_resources(variant, resources):
    if resources is None:
        raise ConfigurationError(
            f"Variant {variant!r} needs a corpus index and a matcher."
        )


def train_model(
        variant, train_set, config=None, seed=0, resources=None,
        external_corpus=None, backend=None):
    """Train any model variant.

    Parameters
    ----------
    variant : str
        One of ``VARIANTS``.
    train_set : list of LabeledExample
    config : RunConfig, optional
    seed : int, optional
    resources : ExternalResources, optional
        Required by ``external_gbt`` and ``combined``.
    external_corpus : pandas.DataFrame, optional
        Required by the external and tuned word vector variants.
    backend : ParallelizationBackendBase, optional

    Returns
    -------
    InternalModel, ExternalModel or CombinedModel

    Raises
    ------
    ConfigurationError
        If the variant is unknown or a required input is missing.
    """
    config = config or RunConfig()

    if variant in INTERNAL_VARIANTS:
        return train_internal(train_set, variant, config, seed, external_corpus)

    if variant == 'external_gbt':
        _require_resources(variant, resources)
        return train_external(train_set, resources, config, seed, backend)

    if variant == 'combined':
        _require_resources(variant, resources)
        internal = train_internal(
            train_set, config.internal_variant, config, seed, external_corpus
        )
        return train_combined(
            train_set, internal, resources, config, seed, external_corpus, backend
        )

    raise ConfigurationError(
        f"Unknown variant {variant!r}; expected one of {VARIANTS}."
    )


def _relative_to(path, directory):
    try:
        return str(path.resolve().relative_to(directory.resolve()))
    except ValueError:
        return str(path.resolve())


def save_model(model, directory, resources_directory=None):
    """Save a trained model; external machinery goes to ``resources``.

    Parameters
    ----------
    model : InternalModel, ExternalModel or CombinedModel
    directory : str or pathlib.Path
    resources_directory : str or pathlib.Path, optional
        Defaults to ``<directory>/resources``. The manifest records the path,
        relative to ``directory`` when it lies inside it.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    if isinstance(model, InternalModel):
        kind = 'internal'
    elif isinstance(model, ExternalModel):
        kind = 'external'
    elif isinstance(model, CombinedModel):
        kind = 'combined'
    else:
        raise ConfigurationError(f"Cannot save {type(model).__name__}.")

    model.save(directory / kind)
    header = {'format': 'income-model', 'version': 1, 'kind': kind}
    if kind != 'internal':
        resources_directory = Path(resources_directory or directory / 'resources')
        model.resources.save(resources_directory)
        header['resources'] = _relative_to(resources_directory, directory)

    (directory / 'artifact.json').write_text(json.dumps(header, indent=2))
    logger.info(f'Saved {kind} model to {directory}.')


def load_model(directory, industry_table=None, alias_table=None):
    """Load a model written by ``save_model``."""
    directory = Path(directory)
    try:
        header = json.loads((directory / 'artifact.json').read_text())
    except OSError as e:
        raise ConfigurationError(f"No model artifact in {directory}: {e}") from e
    if header.get('format') != 'income-model' or header.get('version') != 1:
        raise ConfigurationError(
            f"Unsupported model format {header.get('format')!r} "
            f"version {header.get('version')!r} in {directory}."
        )

    kind = header['kind']
    if kind == 'internal':
        return InternalModel.load(directory / kind)

    resources = ExternalResources.load(
        directory / header.get('resources', 'resources'), industry_table, alias_table
    )
    if kind == 'external':
        return ExternalModel.load(directory / kind, resources)
    return CombinedModel.load(directory / kind, resources)


def predict_income(model, identity, corpus_index=None):
    """Predict the income of one identity.

    Parameters
    ----------
    model : InternalModel, ExternalModel or CombinedModel
    identity : Identity
    corpus_index : CorpusIndex, optional
        Searched instead of the index of the model's external resources; the
        model itself is left unchanged.

    Returns
    -------
    Money
        Deterministic, never negative.
    """
    if corpus_index is not None and hasattr(model, 'resources'):
        model = copy.copy(model)
        model.resources = model.resources.with_index(corpus_index)

    prediction = float(model.predict([identity])[0])
    return Money.from_dollars(round(max(prediction, 0.0), 2))

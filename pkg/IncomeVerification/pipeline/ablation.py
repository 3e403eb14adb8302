import matplotlib.pyplot as plt
import pandas as pd

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import ConfigurationError
from IncomeVerification.core.rng import derive_seed
from IncomeVerification.extfeat import N_SLOTS
from .config import RunConfig
from .evaluation import kfold_cv, score_model
from .externalModel import split_examples, train_external
from .internalModel import train_bow_ablation


__all__ = ['STUDIES', 'ablate', 'plot_source_count', 'ablation_columns']


logger = log.get_logger('pipeline')

STUDIES = ['sources_count', 'input_features', 'salary_features']

INPUT_FEATURE_ROWS = [
    ('All features', None),
    ('- Job Title', 'job_title'),
    ('- Employer Name', 'employer'),
    ('- State', 'state'),
    ('- City', 'city'),
]

SALARY_FEATURE_ROWS = [
    ('All features', ()),
    ('- Low', ('low',)),
    ('- Median', ('median',)),
    ('- High', ('high',)),
]


def ablation_columns(study):
    label = '# sources' if study == 'sources_count' else 'Features'
    return [label, 'CV MAE', 'Test Set MAE', 'Test Set MRE']


def _row(label, fit, train, test, config, seed):
    cv = kfold_cv(fit, train, config.k, seed)
    model = fit(train, derive_seed(seed, 'full'))
    metrics = score_model(model, test)
    logger.info(
        f'{label}: CV MAE {cv.mae:.3f}, test MAE {metrics.mae:.3f}, '
        f'test MRE {metrics.mre:.3f}.'
    )
    return [label, cv.mae, metrics.mae, metrics.mre]


@log.log_time('pipeline')
def ablate(study, train, test, config=None, resources=None, seed=None, backend=None):
    """Run one ablation study.

    ``sources_count`` retrains the external model with the best 1 to 5
    sources. ``input_features`` retrains BOW + GBT without one input field.
    ``salary_features`` retrains the external model without the low, median
    or high salary features of every source.

    Parameters
    ----------
    study : {'sources_count', 'input_features', 'salary_features'}
    train, test : list of LabeledExample
    config : RunConfig, optional
    resources : ExternalResources, optional
        Required by the external studies.
    seed : int, optional
        Defaults to ``config.seed``; all rows share the same folds.
    backend : ParallelizationBackendBase, optional
        Used to prefetch the sources of all identities once.

    Returns
    -------
    pandas.DataFrame
        A row label column followed by ``CV MAE, Test Set MAE, Test Set MRE``.

    Raises
    ------
    ConfigurationError
        If the study is unknown or the external resources are missing.
    """
    config = config or RunConfig()
    seed = config.seed if seed is None else seed

    if study not in STUDIES:
        raise ConfigurationError(f"Unknown study {study!r}; expected one of {STUDIES}.")

    rows = []
    if study == 'input_features':
        for label, group in INPUT_FEATURE_ROWS:
            def fit(examples, fold_seed, group=group):
                return train_bow_ablation(examples, group, config)
            rows.append(_row(label, fit, train, test, config, seed))
        return pd.DataFrame(rows, columns=ablation_columns(study))

    if resources is None:
        raise ConfigurationError(f"Study {study!r} needs a corpus index and a matcher.")

    train, _ = split_examples(train)
    test, _ = split_examples(test)
    resources.prefetch([e.identity for e in train + test], backend)

    if study == 'sources_count':
        grid = [(k, k, ()) for k in range(1, N_SLOTS + 1)]
    else:
        top_k = config.retrieval.top_k
        grid = [(label, top_k, groups) for label, groups in SALARY_FEATURE_ROWS]

    for label, top_k, groups in grid:
        def fit(examples, fold_seed, top_k=top_k, groups=groups):
            return train_external(
                examples, resources, config, fold_seed, None, top_k, groups
            )
        rows.append(_row(label, fit, train, test, config, seed))

    return pd.DataFrame(rows, columns=ablation_columns(study))


def plot_source_count(report, path=None):
    """Test MAE against the number of sources of a ``sources_count`` report.

    Parameters
    ----------
    report : pandas.DataFrame
    path : str or pathlib.Path, optional
        If given, the figure is saved there and closed.

    Returns
    -------
    fig : matplotlib.figure.Figure
    ax : matplotlib.axes.Axes
    """
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(report['# sources'], report['Test Set MAE'], marker='o')
    ax.set_xlabel('Number of sources')
    ax.set_ylabel('Test Set MAE')
    ax.set_xticks(list(report['# sources']))
    ax.grid(True, alpha=0.3)
    fig.tight_layout()

    if path is not None:
        fig.savefig(path)
        plt.close(fig)

    return fig, ax

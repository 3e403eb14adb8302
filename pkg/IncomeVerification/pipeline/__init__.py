"""
============================================
Pipeline (:mod:`IncomeVerification.pipeline`)
============================================

.. currentmodule:: IncomeVerification.pipeline

Run configuration, the internal, external and combined model flows, the
verification decision, k-fold evaluation, ablation studies and run
manifests.

Configuration
=============

.. autosummary::
    :toctree: generated/

    RunConfig
    GBTConfig
    FFNConfig
    LSTMConfig
    WordVectorConfig
    MatcherConfig
    RetrievalConfig

Models
======

.. autosummary::
    :toctree: generated/

    InternalModel
    train_internal
    ExternalResources
    ExternalModel
    train_external
    fit_matcher
    CombinedModel
    train_combined
    train_model
    save_model
    load_model
    predict_income

Verification and evaluation
===========================

.. autosummary::
    :toctree: generated/

    verify_income
    verification_report
    kfold_indices
    kfold_cv
    evaluate_models
    ablate
    plot_source_count
    write_manifest

Infrastructure
==============

.. autosummary::
    :toctree: generated/

    ResultsCache
    SequentialBackend
    make_backend

"""

from .config import *
from .cache import *
from .parallelizationBackend import *
from .folds import *
from .internalModel import *
from .externalModel import *
from .combinedModel import *
from .models import *
from .verification import *
from .evaluation import *
from .ablation import *
from .manifest import *

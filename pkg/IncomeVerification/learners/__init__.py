"""
========================================
Learners (:mod:`IncomeVerification.learners`)
========================================

.. currentmodule:: IncomeVerification.learners

Learning primitives implemented on numpy (and numba for the hot loops).

Word vectors
============

.. autosummary::
    :toctree: generated/

    Embeddings
    train_word_vectors

Bag of words
============

.. autosummary::
    :toctree: generated/

    BowFeaturizer
    bow_featurize

Neural regressors
=================

.. autosummary::
    :toctree: generated/

    FFNParams
    ffn_train
    ffn_predict
    LSTMParams
    lstm_regress_train
    lstm_predict

Gradient boosted trees
======================

.. autosummary::
    :toctree: generated/

    GBTEnsemble
    gbt_train
    gbt_predict

"""

from .wordVectors import *
from .bow import *
from .ffn import *
from .lstm import *
from .gbt import *

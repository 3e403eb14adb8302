"""
IncomeVerification
==================

IncomeVerification predicts the annual income of a person from identity and
employment information and checks a stated income against the prediction.
Internal text models are combined with features extracted from a local
corpus of public salary records.
"""
# Version information
name = 'IncomeVerification'
__version__ = '0.1.0'

# Imports
from .IncomeVerificationError import *

from . import log

from .settings import Settings
settings = Settings()

from . import dataStructure
from . import core
from . import canon
from . import retrieval
from . import extract
from . import match
from . import extfeat
from . import learners
from . import datagen
from . import pipeline

import numpy as np
import pandas as pd
from sklearn.metrics import precision_recall_fscore_support

from IncomeVerification.IncomeVerificationError import ContractViolation
from IncomeVerification.dataStructure import Structure, Bool, Float, UnsignedFloat
from IncomeVerification.core.money import Money, MoneyParameter, to_dollars


__all__ = [
    'DEFAULT_TAU', 'VerificationDecision', 'verify_income', 'is_verifiable',
    'verification_report', 'VERIFICATION_COLUMNS',
]


DEFAULT_TAU = 0.15

VERIFICATION_COLUMNS = ['Model', 'Precision', 'Recall', 'F1 score']


class VerificationDecision(Structure):
    """Outcome of comparing a stated income with a predicted one.

    Attributes
    ----------
    predicted : Money
    stated : Money
    relative_gap : float
        |stated − predicted| / predicted.
    verified : bool
        True iff |stated − predicted| <= tau · predicted.
    tau : float
    """

    predicted = MoneyParameter()
    stated = MoneyParameter()
    relative_gap = UnsignedFloat()
    verified = Bool()
    tau = Float()

    _parameters = ['predicted', 'stated', 'relative_gap', 'verified', 'tau']

    def to_dict(self):
        return {
            'predicted': self.predicted.dollars,
            'stated': self.stated.dollars,
            'relative_gap': self.relative_gap,
            'verified': self.verified,
            'tau': self.tau,
        }


def verify_income(predicted, stated, tau=DEFAULT_TAU):
    """Decide whether a stated income is consistent with a prediction.

    Parameters
    ----------
    predicted, stated : Money or float
        Dollar amounts; both must be positive.
    tau : float, optional
        Relative tolerance, >= 0.

    Returns
    -------
    VerificationDecision

    Raises
    ------
    ContractViolation
        If an amount is not positive or tau is negative.

    Examples
    --------
    >>> verify_income(Money.from_dollars(50000), Money.from_dollars(100000)).verified
    False
    """
    predicted = Money.from_dollars(predicted)
    stated = Money.from_dollars(stated)
    if predicted.cents <= 0 or stated.cents <= 0:
        raise ContractViolation(
            f"Verification needs positive amounts, got predicted {predicted} "
            f"and stated {stated}."
        )
    if not tau >= 0:
        raise ContractViolation(f"tau must be >= 0, got {tau}.")

    gap = abs(stated.cents - predicted.cents)
    return VerificationDecision(
        predicted=predicted,
        stated=stated,
        relative_gap=gap / predicted.cents,
        verified=bool(gap <= tau * predicted.cents),
        tau=float(tau),
    )


def is_verifiable(stated, true, tau=DEFAULT_TAU):
    """Ground truth of the verification task: |stated − true| <= tau · true."""
    stated = to_dollars(stated)
    true = to_dollars(true)
    return np.abs(stated - true) <= tau * true


def verification_report(models, test, tau=DEFAULT_TAU, predictions=None):
    """Precision, recall and F1 of the verification decision per model.

    The positive class is "verified". An identity is verifiable if its
    stated income is within ``tau`` of its true income; a model verifies it
    if the stated income is within ``tau`` of the model's prediction.
    Zero predictions never verify.

    Parameters
    ----------
    models : dict
        Report name -> model with ``predict(identities)``.
    test : list of LabeledExample
        Examples without stated income are skipped.
    tau : float, optional
    predictions : dict, optional
        Report name -> precomputed predictions for the usable examples.

    Returns
    -------
    pandas.DataFrame
        Columns ``Model, Precision, Recall, F1 score``.
    """
    usable = [e for e in test if e.identity.stated_income is not None]
    if not usable:
        raise ContractViolation("No test example has a stated income.")
    identities = [e.identity for e in usable]
    stated = to_dollars([i.stated_income for i in identities])
    y_true = is_verifiable(stated, [e.true_income for e in usable], tau)

    rows = []
    for name, model in models.items():
        if predictions is not None and name in predictions:
            predicted = np.asarray(predictions[name], dtype=float)
        else:
            predicted = model.predict(identities)
        y_pred = (predicted > 0) & (np.abs(stated - predicted) <= tau * predicted)
        precision, recall, f1, _ = precision_recall_fscore_support(
            y_true, y_pred, average='binary', zero_division=0
        )
        rows.append({
            'Model': name,
            'Precision': float(precision),
            'Recall': float(recall),
            'F1 score': float(f1),
        })

    return pd.DataFrame(rows, columns=VERIFICATION_COLUMNS)

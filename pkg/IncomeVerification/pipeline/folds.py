import numpy as np
from sklearn.model_selection import KFold

from IncomeVerification.IncomeVerificationError import ContractViolation
from IncomeVerification.core.rng import derive_seed, make_rng


__all__ = ['kfold_indices']


def kfold_indices(n, k, seed=0):
    """Seeded k-fold partition of ``range(n)``.

    Rows are shuffled with the Philox generator and cut into ``k``
    near-equal contiguous folds.

    Parameters
    ----------
    n : int
        Number of examples.
    k : int
        Number of folds, 2 <= k <= n.
    seed : int, optional

    Returns
    -------
    list of (np.ndarray, np.ndarray)
        Sorted training and validation indices per fold. Validation sets
        partition ``range(n)``.

    Raises
    ------
    ContractViolation
        If k < 2 or k > n.
    """
    if k < 2:
        raise ContractViolation(f"Need at least 2 folds, got k={k}.")
    if k > n:
        raise ContractViolation(f"Cannot split {n} examples into {k} folds.")

    order = make_rng(derive_seed(seed, 'folds')).permutation(n)
    return [
        (np.sort(order[train]), np.sort(order[valid]))
        for train, valid in KFold(n_splits=k).split(order)
    ]

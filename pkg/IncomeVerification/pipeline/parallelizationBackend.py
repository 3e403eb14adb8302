from abc import abstractmethod
from collections.abc import Iterable
import multiprocessing

from IncomeVerification.dataStructure import Structure
from IncomeVerification.dataStructure import Constant, RangedInteger, UnsignedInteger


cpu_count = multiprocessing.cpu_count()

__all__ = ['ParallelizationBackendBase', 'SequentialBackend', 'make_backend']


class ParallelizationBackendBase(Structure):
    """Base class of the backends running per-fold and per-identity work.

    Attributes
    ----------
    n_cores : int
        Number of cores to be used. If set to 0, all available cores are used.
        For values below 0, (n_cpus + 1 + n_cores) are used.
    """

    n_cores = RangedInteger(lb=-cpu_count, ub=cpu_count, default=1)

    _parameters = ['n_cores']

    @property
    def _n_cores(self):
        if self.n_cores == 0:
            return cpu_count

        if self.n_cores < 0:
            return cpu_count + 1 + self.n_cores
        else:
            return self.n_cores

    @abstractmethod
    def evaluate(self, function: callable, items: Iterable) -> list:
        """Evaluate ``function`` for every item.

        Parameters
        ----------
        function : callable
        items : Iterable

        Returns
        -------
        list
            Results in input order.
        """
        pass

    def __str__(self):
        return self.__class__.__name__


class SequentialBackend(ParallelizationBackendBase):
    """Evaluate items one after another in the calling process."""

    n_cores = Constant(value=1)

    def evaluate(self, function: callable, items: Iterable) -> list:
        return [function(item) for item in items]


try:
    from joblib import Parallel, delayed
    __all__.append('Joblib')
except ModuleNotFoundError:
    pass


class Joblib(ParallelizationBackendBase):
    """Backend using joblib worker processes.

    Attributes
    ----------
    verbose : int
        joblib verbosity level.
    """

    verbose = UnsignedInteger(default=0)
    _parameters = ['verbose']

    def evaluate(self, function: callable, items: Iterable) -> list:
        backend = Parallel(n_jobs=self._n_cores, verbose=self.verbose)
        return backend(delayed(function)(x) for x in items)


try:
    import pathos
    __all__.append('Pathos')
except ModuleNotFoundError:
    pass


class Pathos(ParallelizationBackendBase):
    """Backend using a pathos process pool."""

    def evaluate(self, function: callable, items: Iterable) -> list:
        with pathos.pools.ProcessPool(ncpus=self._n_cores) as pool:
            results = pool.map(function, list(items))
        return results


def make_backend(threads=1):
    """Return the backend of a ``--threads`` setting.

    1 selects ``SequentialBackend``, larger values ``Joblib``.
    """
    if threads <= 1:
        return SequentialBackend()
    return Joblib(n_cores=min(int(threads), cpu_count))

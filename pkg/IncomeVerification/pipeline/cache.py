from collections import defaultdict
from pathlib import Path
import shutil
import tempfile

from diskcache import Cache


__all__ = ['ResultsCache']


_MISSING = object()


class ResultsCache():
    """Memo of intermediate pipeline results.

    ``ExternalResources`` stores the matched and imputed sources of every
    identity under the tag ``'sources'``, so evaluation folds and ablations
    run retrieval and matching once per identity. Entries live in a dict or,
    with ``use_diskcache``, in a diskcache database.

    Parameters
    ----------
    use_diskcache : bool, optional
        If True, keep entries in a diskcache database.
    directory : str or pathlib.Path, optional
        Database directory; a fresh temporary directory if not set. An
        existing directory is emptied.

    Attributes
    ----------
    hits, misses : int
        Lookups through ``memoize`` that found or computed their value.
    """

    def __init__(self, use_diskcache=False, directory=None):
        self.use_diskcache = use_diskcache
        self.directory = Path(directory) if directory is not None else None
        self.hits = 0
        self.misses = 0
        self._tags = defaultdict(set)
        self._open()

    def _open(self):
        if not self.use_diskcache:
            self._store = {}
            return

        if self.directory is None:
            self.directory = Path(tempfile.mkdtemp(prefix='income-verification-'))
        elif self.directory.exists():
            shutil.rmtree(self.directory, ignore_errors=True)
        self.directory.mkdir(parents=True, exist_ok=True)

        self._store = Cache(self.directory.as_posix(), size_limit=2**32)

    def __contains__(self, key):
        return key in self._store

    def __len__(self):
        return len(self._store)

    def get(self, key):
        """Return the entry of ``key``.

        Raises
        ------
        KeyError
            If ``key`` is not cached.
        """
        if self.use_diskcache:
            value = self._store.get(key, default=_MISSING)
        else:
            value = self._store.get(key, _MISSING)

        if value is _MISSING:
            raise KeyError(key)

        return value

    def set(self, key, value, tag=None):
        """Store ``value`` under ``key``, optionally tagged for ``prune``."""
        if self.use_diskcache:
            self._store.set(key, value, tag=tag)
        else:
            self._store[key] = value
            if tag is not None:
                self._tags[tag].add(key)

    def memoize(self, key, function, *args, tag=None):
        """Return the entry of ``key``; compute and store it on a miss.

        Parameters
        ----------
        key : hashable
        function : callable
            Called as ``function(*args)`` if ``key`` is not cached.
        tag : str, optional
            Tag of a newly stored entry.
        """
        try:
            value = self.get(key)
        except KeyError:
            self.misses += 1
            value = function(*args)
            self.set(key, value, tag)
        else:
            self.hits += 1

        return value

    def prune(self, tag):
        """Remove every entry stored with ``tag``."""
        if self.use_diskcache:
            self._store.evict(tag)
            return

        for key in self._tags.pop(tag, ()):
            self._store.pop(key, None)

    def clear(self):
        """Remove all entries; a diskcache database is deleted and reopened."""
        if self.use_diskcache:
            self._store.close()
            shutil.rmtree(self.directory, ignore_errors=True)
        self._tags.clear()
        self.hits = self.misses = 0
        self._open()

    def close(self):
        """Close a diskcache database; it reopens on the next access."""
        if self.use_diskcache:
            self._store.close()

    def __repr__(self):
        backend = 'diskcache' if self.use_diskcache else 'dict'
        return f'ResultsCache({backend}, entries={len(self)})'

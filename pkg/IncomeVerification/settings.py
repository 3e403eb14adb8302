"""
===========================================
Settings (:mod:`IncomeVerification.settings`)
===========================================

.. currentmodule:: IncomeVerification.settings

General settings shared by all modules.

.. autosummary::
    :toctree: generated/

    Settings

"""

from pathlib import Path

from IncomeVerification.dataStructure import Structure
from IncomeVerification.dataStructure import Bool, Switch, RangedInteger


__all__ = ['Settings']


class Settings(Structure):
    """General settings.

    Attributes
    ----------
    working_directory : pathlib.Path
        Working directory. If not set, the current directory is used.
    save_log : bool
        Whether log files are written to ``log_directory``.
    debug_mode : bool
        Whether to enable debug mode.
    LOG_LEVEL : str
        One of 'DEBUG', 'INFO', 'WARNING', 'ERROR', or 'CRITICAL'.
    n_threads : int
        Number of worker processes for parallel stages. 1 keeps every run
        bit-reproducible.
    """

    _save_log = Bool(default=False)
    debug_mode = Bool(default=False)
    LOG_LEVEL = Switch(
        valid=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
        default='INFO'
    )
    n_threads = RangedInteger(lb=1, default=1)

    def __init__(self):
        super().__init__()
        self.working_directory = None

    @property
    def working_directory(self):
        """pathlib.Path: Absolute path of the working directory."""
        if self._working_directory is None:
            _working_directory = Path('./')
        else:
            _working_directory = Path(self._working_directory)

        return _working_directory.absolute()

    @working_directory.setter
    def working_directory(self, working_directory):
        self._working_directory = working_directory

    @property
    def save_log(self):
        """bool: If True, save log files."""
        return self._save_log

    @save_log.setter
    def save_log(self, save_log):
        from IncomeVerification import log
        log.update_loggers(self.log_directory, save_log)

        self._save_log = save_log

    @property
    def log_directory(self):
        """pathlib.Path: Log directory."""
        return self.working_directory / 'log'

    def set_log_level(self, level):
        """Set ``LOG_LEVEL`` and apply it to every existing logger."""
        import logging

        from IncomeVerification import log

        self.LOG_LEVEL = level
        for logger in log.loggers.values():
            logger.setLevel(getattr(logging, level))

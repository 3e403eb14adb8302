"""
=====================================
Logging (:mod:`IncomeVerification.log`)
=====================================

.. currentmodule:: IncomeVerification.log

Loggers of IncomeVerification. Each name gets one cached logger; if
``settings.save_log`` is set, records are also written to
``<working_directory>/log/<name>.log``.

.. autosummary::
    :toctree: generated/

    loggers
    get_logger
    log_time
    log_exceptions
    log_results

"""

from functools import wraps
import logging
from pathlib import Path
import time

import pathos


__all__ = [
    'loggers', 'get_logger', 'update_loggers',
    'log_time', 'log_exceptions', 'log_results',
]


LOG_FORMAT = logging.Formatter(
    '%(asctime)s:%(levelname)s:%(name)s:%(message)s'
)

loggers = {}


def get_logger(name, level=None):
    """Retrieve logger from loggers dictionary, creating it on first access.

    Parameters
    ----------
    name : str
        The name of the logger.
    level : str, optional
        Logging level, e.g. 'INFO'. If None, ``settings.LOG_LEVEL`` is used
        for newly created loggers.

    Returns
    -------
    logging.Logger
        The logger object.
    """
    try:
        logger = loggers[name]
    except KeyError:
        logger = pathos.logger(name=name)
        loggers[name] = logger

        from IncomeVerification import settings
        if level is None:
            level = settings.LOG_LEVEL
        if settings.save_log:
            add_file_handler(settings.log_directory, logger, name, level)

    if level is not None:
        logger.setLevel(getattr(logging, level))

    return logger


def update_loggers(log_directory, save_log):
    """Add or remove file handlers of all loggers.

    Parameters
    ----------
    log_directory : str or pathlib.Path
        The directory to store the log files.
    save_log : bool
        If True, log files are written.
    """
    for name, logger in loggers.items():
        update_file_handlers(log_directory, logger, name, save_log)


def update_file_handlers(log_directory, logger, name, save_log):
    """Replace the file handlers of a logger."""
    for hdlr in list(logger.handlers):
        if isinstance(hdlr, logging.FileHandler):
            logger.removeHandler(hdlr)
            hdlr.close()

    if save_log:
        add_file_handler(log_directory, logger, name, logger.level)


def add_file_handler(log_directory, logger, name, level, overwrite=False):
    """Add a file handler writing ``<log_directory>/<name>.log``."""
    log_directory = Path(log_directory)
    log_directory.mkdir(exist_ok=True, parents=True)

    mode = 'w' if overwrite else 'a'

    file_handler = logging.FileHandler(log_directory / f'{name}.log', mode=mode)
    file_handler.setFormatter(LOG_FORMAT)
    if isinstance(level, str):
        level = getattr(logging, level)
    file_handler.setLevel(level)

    logger.addHandler(file_handler)


def log_time(logger_name, level=None):
    """Log execution time of function at DEBUG level.

    Parameters
    ----------
    logger_name : str
        name of the logger
    """
    def log_time_decorator(function):
        @wraps(function)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            result = function(*args, **kwargs)
            elapsed = time.perf_counter() - start
            logger = get_logger(logger_name, level=level)
            logger.debug(f'Execution of {function.__name__} took {elapsed:.3f} s')
            return result
        return wrapper
    return log_time_decorator


def log_exceptions(logger_name, level=None):
    """Log exceptions raised by function and re-raise them.

    Parameters
    ----------
    logger_name : str
        name of the logger
    """
    def log_exception_decorator(function):
        @wraps(function)
        def wrapper(*args, **kwargs):
            logger = get_logger(logger_name, level=level)
            try:
                return function(*args, **kwargs)
            except Exception:
                logger.exception(f"There was an exception in {function.__name__}")
                raise

        return wrapper
    return log_exception_decorator


def log_results(logger_name, level=None):
    """Log arguments and results of function at DEBUG level.

    Parameters
    ----------
    logger_name : str
        name of the logger
    """
    def log_results_decorator(function):
        @wraps(function)
        def wrapper(*args, **kwargs):
            logger = get_logger(logger_name, level=level)
            logger.debug(f'{function.__name__} was called with {args}, {kwargs}')
            results = function(*args, **kwargs)
            logger.debug(f'Results: {results}')

            return results
        return wrapper
    return log_results_decorator

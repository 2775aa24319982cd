import functools
import logging
import time
from pathlib import Path
from typing import Any, Callable, TypeVar, cast

F = TypeVar('F', bound=Callable[..., Any])

logger = logging.getLogger(__name__)


def log_function_call(func: F) -> F:
    """
    Decorator to log function entry and exit with elapsed time.
    """
    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        func_name = func.__name__
        logger.info(f"Starting {func_name}")

        start_time = time.perf_counter()
        try:
            result = func(*args, **kwargs)
            elapsed = time.perf_counter() - start_time
            logger.info(f"Completed {func_name} in {elapsed:.2f}s")
            return result
        except Exception as e:
            logger.exception(f"Error in {func_name}: {str(e)}")
            raise

    return cast(F, wrapper)


def log_file_loading(func: F) -> F:
    """
    Decorator for input readers whose first argument is a file path.
    """
    @functools.wraps(func)
    def wrapper(file_path: Any, *args: Any, **kwargs: Any) -> Any:
        logger.info(f"Loading file: {file_path}")
        logger.debug(f"Loading file with extension: {Path(str(file_path)).suffix.lower() or '(none)'}")

        start_time = time.perf_counter()
        try:
            result = func(file_path, *args, **kwargs)
            elapsed = time.perf_counter() - start_time
            logger.info(f"Loaded file {file_path} in {elapsed:.3f}s")
            return result
        except Exception as e:
            logger.error(f"Error loading {file_path}: {str(e)}")
            raise

    return cast(F, wrapper)


def log_fit_outcome(func: F) -> F:
    """
    Decorator for estimation functions returning an object with
    ``discrepancy``, ``iterations`` and ``converged`` attributes.
    """
    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        elapsed = time.perf_counter() - start_time
        logger.debug(
            f"{func.__name__}: F={result.discrepancy:.6g} after {result.iterations} iterations "
            f"(converged={result.converged}) in {elapsed:.3f}s"
        )
        return result

    return cast(F, wrapper)

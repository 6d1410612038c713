import contextvars
import functools
from concurrent.futures import Future, ThreadPoolExecutor, as_completed
from typing import Any, Callable, Dict, Iterable, List, TypeVar

from rootcloak.config import ExecutorSettings
from rootcloak.event_progress import ProgressAction
from rootcloak.logging.logger import get_logger

logger = get_logger(__name__)

# Type variable for the return type of tasks
R = TypeVar("R")


class BatchExecutor:
    """
    Runs independent numerical tasks (ray traces, grid scans) on a thread pool.

    numpy and scipy release the GIL inside LAPACK and the integrator's array
    work, so threads give real overlap without pickling the field.
    """

    def __init__(self, config: ExecutorSettings | None = None, label: str = "batch") -> None:
        self.config = config or ExecutorSettings()
        self.label = label

    def _run_task(self, func: Callable[..., R], item: Any, **kwargs: Any) -> R | BaseException:
        try:
            return func(item, **kwargs)
        except Exception as e:
            return e

    def map(
        self,
        func: Callable[..., R],
        inputs: Iterable[Any],
        **kwargs: Any,
    ) -> List[R | BaseException]:
        """
        Run `func(item)` for each item, returning results (or the raised exception)
        in input order.
        """
        items = list(inputs)
        total = len(items)
        results: List[R | BaseException | None] = [None] * total
        if total == 0:
            return []

        if self.config.max_workers == 1:
            for index, item in enumerate(items):
                results[index] = self._run_task(func, item, **kwargs)
                self._progress(index + 1, total)
        else:
            with ThreadPoolExecutor(max_workers=self.config.max_workers) as pool:
                futures: Dict[Future, int] = {}
                for index, item in enumerate(items):
                    ctx = contextvars.copy_context()
                    task = functools.partial(self._run_task, func, item, **kwargs)
                    futures[pool.submit(ctx.run, task)] = index
                for completed, future in enumerate(as_completed(futures), start=1):
                    results[futures[future]] = future.result()
                    self._progress(completed, total)

        failures = sum(isinstance(r, BaseException) for r in results)
        if failures:
            logger.warning(f"{failures} of {total} tasks failed", name="executor.failures", target=self.label, failures=failures)
        logger.debug(
            f"Finished {self.label}",
            name="executor.finished",
            progress_action=ProgressAction.FINISHED,
            target=self.label,
            completed=total,
            total=total,
        )
        return results

    def map_strict(self, func: Callable[..., R], inputs: Iterable[Any], **kwargs: Any) -> List[R]:
        """Like map, but re-raises the first exception in input order."""
        results = self.map(func, inputs, **kwargs)
        for result in results:
            if isinstance(result, BaseException):
                raise result
        return results

    def _progress(self, completed: int, total: int) -> None:
        logger.debug(
            f"{self.label} {completed}/{total}",
            name="executor.progress",
            progress_action=ProgressAction.TRACING,
            target=self.label,
            completed=completed,
            total=total,
        )

"""Run blocking jobs in worker threads.

Benchmark trials and audit shards are independent numpy computations. They are
submitted to a `WorkerPool`, which runs them in threads under a capacity limit
and records how each one ended.
"""
from __future__ import annotations

import logging
import typing as t
from contextlib import AsyncExitStack
from enum import Enum
from types import TracebackType

import anyio
import anyio.to_thread
from anyio.abc import TaskGroup as AnyIOTaskGroup

from .func import as_result
from .results import NOTHING, Err, Option, Result, Some

logger = logging.getLogger(__name__)

T = t.TypeVar("T")  # Success type
E = t.TypeVar("E")  # Error type
TE = t.TypeVar("TE", bound=BaseException)


class JobStatus(str, Enum):
    """Enumeration of job status."""

    CREATED = "CREATED"
    """Job has been submitted but did not start yet."""

    PENDING = "PENDING"
    """Job is running in a worker thread."""

    CANCELLED = "CANCELLED"
    """Job is finished due to cancellation."""

    SUCCESS = "SUCCESS"
    """Job returned Ok."""

    FAILURE = "FAILURE"
    """Job returned Err."""

    EXCEPTION = "EXCEPTION"
    """Job raised an exception."""


class Job(t.Generic[T, E]):
    """A blocking function returning a `Result`, run once by a `WorkerPool`."""

    def __init__(
        self, func: t.Callable[[], Result[T, E]], *, name: Option[str] = NOTHING
    ) -> None:
        self._func = func
        self._name = name
        self._status = JobStatus.CREATED
        self._result: Option[Result[T, E]] = NOTHING
        self._exception: Option[BaseException] = NOTHING
        self._done = anyio.Event()

    @property
    def name(self) -> Option[str]:
        return self._name

    @property
    def status(self) -> JobStatus:
        return self._status

    def done(self) -> bool:
        return self._status in (
            JobStatus.SUCCESS,
            JobStatus.FAILURE,
            JobStatus.EXCEPTION,
            JobStatus.CANCELLED,
        )

    def result(self) -> Option[Result[T, E]]:
        return self._result

    def exception(self) -> Option[BaseException]:
        """Exception raised by the job, if any."""
        return self._exception

    def unwrap_result(self) -> Result[T, E]:
        return self._result.unwrap()

    async def wait(self) -> JobStatus:
        with anyio.CancelScope(shield=True):
            await self._done.wait()
        return self._status

    async def __call__(self, limiter: anyio.CapacityLimiter) -> None:
        try:
            async with limiter:
                self._status = JobStatus.PENDING
                result = await anyio.to_thread.run_sync(self._func)
            self._result = Some(result)
            self._status = JobStatus.SUCCESS if result else JobStatus.FAILURE
        # Raise back cancelled errors
        except anyio.get_cancelled_exc_class():
            self._status = JobStatus.CANCELLED
            raise
        # Silence exceptions
        except Exception as exc:
            self._status = JobStatus.EXCEPTION
            self._exception = Some(exc)
            logger.debug("job %s raised %r", self._name.unwrap_or("<unnamed>"), exc)
        finally:
            self._done.set()


class WorkerPool:
    """Async context manager running submitted jobs in at most `concurrent_limit` threads."""

    def __init__(self, concurrent_limit: int | None = None) -> None:
        if concurrent_limit is not None and concurrent_limit < 1:
            raise ValueError(f"concurrent_limit must be at least 1, got {concurrent_limit}")
        self._concurrent_limit = concurrent_limit
        self._closed = False
        self._stack: Option[AsyncExitStack] = NOTHING
        self._task_group: Option[AnyIOTaskGroup] = NOTHING
        self._limiter: Option[anyio.CapacityLimiter] = NOTHING

    @property
    def concurrent_limit(self) -> int | None:
        """Maximum number of jobs running at the same time."""
        return self._concurrent_limit

    def closed(self) -> bool:
        return self._closed

    def cancel(self) -> None:
        for task_group in self._task_group:
            task_group.cancel_scope.cancel()

    async def open(self) -> None:
        stack = AsyncExitStack()
        await stack.__aenter__()
        self._stack = Some(stack)
        # Default limiter of anyio worker threads is 40
        self._limiter = Some(anyio.CapacityLimiter(self._concurrent_limit or 40))
        self._task_group = Some(await stack.enter_async_context(anyio.create_task_group()))

    async def close(
        self,
        exc_type: t.Type[BaseException] | None = None,
        exc: BaseException | None = None,
        tb: TracebackType | None = None,
    ) -> None:
        for stack in self._stack:
            await stack.__aexit__(exc_type, exc, tb)
        self._closed = True

    async def __aenter__(self) -> WorkerPool:
        await self.open()
        return self

    async def __aexit__(
        self,
        exc_type: t.Type[BaseException] | None = None,
        exc: BaseException | None = None,
        traceback: TracebackType | None = None,
    ) -> None:
        if exc_type is not None:
            self.cancel()
        await self.close()

    @t.overload
    def submit_job(
        self, func: t.Callable[[], Result[T, E]], *, name: str | None = None
    ) -> Job[T, E]:
        ...

    @t.overload
    def submit_job(
        self,
        func: t.Callable[[], T],
        *,
        catch: tuple[t.Type[TE], ...] | t.Type[TE],
        name: str | None = None,
    ) -> Job[T, TE]:
        ...

    def submit_job(
        self,
        func: t.Callable[[], t.Any],
        *,
        catch: tuple[t.Type[t.Any], ...] | t.Type[t.Any] | None = None,
        name: str | None = None,
    ) -> Job[t.Any, t.Any]:
        if not self._task_group or not self._limiter:
            raise RuntimeError("Worker pool is not started yet")
        if self.closed():
            raise RuntimeError("Worker pool is closed")
        if catch:
            func = as_result(func, catch=catch)
        job = Job[t.Any, t.Any](func, name=Some(name) if name else NOTHING)
        self._task_group.unwrap().start_soon(job, self._limiter.unwrap(), name=name)
        return job


def run_jobs(
    funcs: t.Sequence[t.Callable[[], T]],
    *,
    concurrent_limit: int | None = None,
    catch: tuple[t.Type[Exception], ...] | t.Type[Exception] = Exception,
) -> list[Result[T, Exception]]:
    """Run blocking functions and return their results in submission order.

    Exceptions of type `catch` become `Err` values. A limit of 1, or a single
    function, runs everything in the calling thread.
    """
    if concurrent_limit == 1 or len(funcs) <= 1:
        return [as_result(func, catch=catch)() for func in funcs]

    async def main() -> list[Job[T, Exception]]:
        async with WorkerPool(concurrent_limit) as pool:
            return [
                pool.submit_job(func, catch=catch, name=f"job-{index}")
                for index, func in enumerate(funcs)
            ]

    jobs = anyio.run(main)
    results: list[Result[T, Exception]] = []
    for job in jobs:
        if job.status is JobStatus.EXCEPTION:
            results.append(Err(t.cast(Exception, job.exception().unwrap())))
        else:
            results.append(job.unwrap_result())
    return results

"""步长细化重试工具"""

import logging
from functools import wraps
from typing import Callable, Optional, Tuple, Type

from core.exceptions import BranchTrackingError

logger = logging.getLogger(__name__)


def refine_on_failure(
    step_arg: str = "step",
    max_attempts: int = 4,
    factor: float = 0.5,
    exceptions: Tuple[Type[Exception], ...] = (BranchTrackingError,),
    on_retry: Optional[Callable] = None,
):
    """
    失败后缩小步长重试的装饰器

    被装饰函数必须以关键字参数接收步长；每次失败后步长乘以 ``factor``，
    最后一次仍失败则抛出原异常。

    Args:
        step_arg: 步长关键字参数名
        max_attempts: 最大尝试次数
        factor: 步长缩小倍数
        exceptions: 需要重试的异常类型
        on_retry: 重试时的回调函数 (attempt, exc, new_step)

    Example:
        @refine_on_failure(step_arg="step", max_attempts=4)
        def unwrap_phase(z, *, step=0.01):
            ...
    """

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            step = kwargs.get(step_arg)
            if step is None:
                raise TypeError(f"{func.__name__} needs keyword argument '{step_arg}'")

            for attempt in range(1, max_attempts + 1):
                try:
                    return func(*args, **{**kwargs, step_arg: step})
                except exceptions as e:
                    if attempt >= max_attempts:
                        logger.error(
                            "%s failed after %d refinements (last %s=%.3e): %s",
                            func.__name__, max_attempts, step_arg, step, e,
                        )
                        raise

                    new_step = step * factor
                    logger.warning(
                        "%s failed (attempt %d/%d, %s=%.3e): %s",
                        func.__name__, attempt, max_attempts, step_arg, step, e,
                    )
                    logger.info("Retrying with %s=%.3e", step_arg, new_step)

                    if on_retry:
                        try:
                            on_retry(attempt, e, new_step)
                        except Exception as callback_error:
                            logger.error("Refinement callback error: %s", callback_error)

                    step = new_step

        return wrapper

    return decorator

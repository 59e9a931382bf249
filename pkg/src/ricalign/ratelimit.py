"""Thread-safe token bucket."""

from __future__ import annotations

import threading
import time
from typing import Callable

# refill arithmetic can land a hair below a whole token
_EPS = 1e-9


class TokenBucket:
    """Allow ``rate`` acquisitions per second with bursts up to ``capacity``.

    The bucket starts full. ``clock`` and ``sleep`` are injectable so tests
    can drive time by hand.
    """

    def __init__(self, rate: float = 5.0, capacity: float | None = None,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = float(rate)
        self.capacity = float(capacity if capacity is not None else max(1.0, rate))
        self._tokens = self.capacity
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def _refill(self) -> None:
        now = self._clock()
        self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
        self._last = now

    def try_acquire(self) -> bool:
        with self._lock:
            self._refill()
            if self._tokens >= 1.0 - _EPS:
                self._tokens -= 1.0
                return True
            return False

    def acquire(self) -> None:
        while True:
            with self._lock:
                self._refill()
                if self._tokens >= 1.0 - _EPS:
                    self._tokens -= 1.0
                    return
                wait = max((1.0 - self._tokens) / self.rate, _EPS)
            self._sleep(wait)

"""Global operation counters.

The sparse-op counter is a first-class observable: the inference path is
required to perform zero sparse multiplies, and tests assert on the
counter delta rather than trusting the code path by inspection.
"""


class OpCounter:
    def __init__(self) -> None:
        self._count = 0

    @property
    def value(self) -> int:
        return self._count

    def add(self, n: int = 1) -> None:
        self._count += n

    def reset(self) -> None:
        self._count = 0


sparse_ops = OpCounter()

"""Exception types shared across the package."""


class KirchhoffError(Exception):
    """Base class for all errors raised by this package."""


class NoArborescenceError(KirchhoffError):
    """The digraph has no spanning arborescence (not exactly one initial SCC)."""

    def __init__(self, initial_count: int):
        super().__init__(
            f"digraph has {initial_count} initial strongly connected components; "
            "an arborescence needs exactly one"
        )
        self.initial_count = initial_count


class CapExceededError(KirchhoffError):
    """An expansion or enumeration would exceed its configured cap."""

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what}: size {size} exceeds cap {cap}")
        self.size = size
        self.cap = cap


class DepthExceededError(KirchhoffError):
    """The deletion-contraction recursion hit ``max_depth``."""

    def __init__(self, depth: int, subproblem):
        super().__init__(
            f"recursion depth {depth} exceeded on subproblem with "
            f"{len(subproblem.vertices)} vertices and {len(subproblem.edges)} edges: "
            f"{subproblem.describe()}"
        )
        self.depth = depth
        self.subproblem = subproblem

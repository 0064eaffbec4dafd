class WorkCapExceeded(RuntimeError):
    """Raised when the Rule k witness search for one vertex exceeds its budget."""

    def __init__(self, vertex: int, cap: int):
        self.vertex = vertex
        self.cap = cap
        super().__init__(f"witness search for vertex {vertex} exceeded the work cap of {cap} subsets")

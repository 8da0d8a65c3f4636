"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid physical or run configuration."""


class ContractError(ValueError):
    """Arguments violate an operation's preconditions (e.g. dimension mismatch)."""


class CapabilityError(RuntimeError):
    """Problem size exceeds what a dense/test-scale routine is allowed to handle."""


class UndefinedPhaseError(ValueError):
    """Phase requested for an amplitude too small to carry one."""


class NormDriftError(RuntimeError):
    """The propagated state lost unitarity beyond tolerance."""

    def __init__(self, time: float, drift: float, tol: float):
        self.time = time
        self.drift = drift
        self.tol = tol
        super().__init__(
            f"norm drift {drift:.3e} exceeds tolerance {tol:.1e} at t = {time:.6g}"
        )

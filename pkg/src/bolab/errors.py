"""Exception types shared across the package."""


class BolabError(Exception):
    """Base class for all package-specific errors."""


class InvalidFrequency(BolabError):
    """A frequency vector maps to gaps outside the nonnegative cone."""


class ChartDomain(BolabError):
    """Action offset leaves the chart domain (I_n + gamma*_n < 0)."""


class DimensionMismatch(BolabError):
    """Incompatible leading-mode counts between a point and its reference."""


class DivisionGuard(BolabError):
    """A certificate constant underflowed to zero."""


class ParamDomain(BolabError):
    """Poisson-kernel parameter outside (0, 1)."""


class UnsupportedPerturbation(BolabError):
    """Unknown perturbation kind."""


class BlowupDetected(BolabError):
    """A Fourier coefficient exceeded the blowup ceiling or became non-finite."""

    def __init__(self, time, max_coeff):
        super().__init__(f"blowup at t={time:.6g}: max|u_hat|={max_coeff:.3e}")
        self.time = time
        self.max_coeff = max_coeff


class SizeTooSmall(BolabError):
    """Requested operator truncation is too small to be meaningful."""


class NoConvergence(BolabError):
    """An iterative procedure did not reach its tolerance."""


class ConfigError(BolabError):
    """Experiment configuration failed schema or consistency validation."""

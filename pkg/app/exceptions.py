from typing import Optional


class ContinuationToolkitError(Exception):
    """Base class for every error raised by the toolkit"""


class SingularJacobian(ContinuationToolkitError):
    """The Newton linear system is singular at rounding scale"""

    def __init__(self, message: str, min_singular_value: float, norm: float):
        super().__init__(message)
        self.min_singular_value = min_singular_value
        self.norm = norm


class NoConvergence(ContinuationToolkitError):
    """Newton iteration exhausted its budget"""

    def __init__(self, message: str, last_iterate=None, residual_inf: Optional[float] = None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual_inf = residual_inf


class RankDeficient(ContinuationToolkitError):
    """The bordered tangent system lost rank (branch point on the curve)"""


class StepUnderflow(ContinuationToolkitError):
    """Arclength step fell below ds_min"""


class DegenerateField(ContinuationToolkitError):
    """Operation needs a field bounded away from zero"""


class BlowupDetected(ContinuationToolkitError):
    """Time stepper produced a state above the configured L-infinity cap"""


class ConfigError(ContinuationToolkitError):
    """Run configuration failed to load or validate"""


class BranchFileError(ContinuationToolkitError):
    """Branch file could not be read"""


class BranchSchemaError(BranchFileError):
    """Branch file is malformed or truncated"""


class BranchVersionError(BranchSchemaError):
    """Branch file was written with an unsupported schema version"""

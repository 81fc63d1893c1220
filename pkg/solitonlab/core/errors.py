"""
Exception types shared by the engines and the command line.

Every error carries the process exit code the CLI reports for it.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple


class SolitonLabError(Exception):
    """Base class; `exit_code` is what `solitonlab` returns for it."""

    exit_code: int = 1


class ConfigParseError(SolitonLabError):
    """Raised when a scenario file line cannot be parsed."""

    exit_code = 2

    def __init__(self, message: str, *, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class ConfigValidationError(SolitonLabError):
    """Raised when a parsed value is outside its valid range."""

    exit_code = 3

    def __init__(self, message: str, *, key: Optional[str] = None) -> None:
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class OverlapError(ConfigValidationError):
    """Raised when two solitons of a scenario start too close to each other."""

    def __init__(self, pair: Tuple[int, int], overlap: float, bound: float) -> None:
        super().__init__(
            f"solitons {pair[0]} and {pair[1]} overlap {overlap:.3e} > {bound:.3e}",
            key="solitons",
        )
        self.pair = pair
        self.overlap = overlap


class DomainError(SolitonLabError, ValueError):
    """Raised when an argument is outside the mathematical domain of an operation."""

    exit_code = 4


class ConvergenceError(SolitonLabError):
    """Raised when the stationary root search does not converge."""

    exit_code = 5

    def __init__(self, message: str, *, best_residual: float, iterations: int) -> None:
        super().__init__(f"{message} (best residual {best_residual:.3e} after {iterations} iterations)")
        self.best_residual = best_residual
        self.iterations = iterations


class StepSizeUnderflowError(SolitonLabError):
    """Raised when the adaptive integrator step falls below the minimum step."""

    exit_code = 6

    def __init__(
        self,
        *,
        time: float,
        step_size: float,
        regularized_history: Sequence[Tuple[float, bool]],
    ) -> None:
        flagged = sum(1 for _, flag in regularized_history if flag)
        super().__init__(
            f"step size {step_size:.3e} underflow at t={time:.6g} "
            f"({flagged} of {len(regularized_history)} recent solves regularized)"
        )
        self.time = time
        self.step_size = step_size
        self.regularized_history: List[Tuple[float, bool]] = list(regularized_history)


class NormDriftError(SolitonLabError):
    """Raised when the lattice norm drifts beyond the configured bound."""

    exit_code = 7

    def __init__(self, *, time: float, drift: float, bound: float) -> None:
        super().__init__(f"relative norm drift {drift:.3e} > {bound:.3e} at t={time:.6g}")
        self.time = time
        self.drift = drift


class BoundaryLeakError(SolitonLabError):
    """Raised when the wave function reaches the lattice boundary."""

    exit_code = 8

    def __init__(self, *, time: float, amplitude: float, bound: float) -> None:
        super().__init__(f"boundary amplitude {amplitude:.3e} > {bound:.3e} at t={time:.6g}")
        self.time = time
        self.amplitude = amplitude


class ScheduleError(SolitonLabError):
    """Raised when requested output times are not covered by a run."""

    exit_code = 9


class HermiticityError(SolitonLabError, AssertionError):
    """A Hermitian bracket sum came out with a non-negligible imaginary part."""

    exit_code = 10

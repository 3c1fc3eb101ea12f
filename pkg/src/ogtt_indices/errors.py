"""Exception hierarchy shared across the package.

Every error raised by this package derives from OgttError so callers can
catch one base class.  The split below mirrors the CLI exit codes:
input/schema problems (exit 1), pipeline/training/convergence problems
(exit 2).  Plain OSError is left alone and maps to exit 3 at the CLI.
"""

from __future__ import annotations


class OgttError(Exception):
    """Base class for all package errors."""


class ParameterError(OgttError, ValueError):
    """A model parameter value violates its documented range."""


class InputError(OgttError, ValueError):
    """Caller-supplied data is invalid (records, labels, empty inputs)."""


class SchemaError(InputError):
    """A CSV file does not match the documented column schema."""


class ConfigError(InputError):
    """A fit configuration (object or file) is invalid."""


class ModelError(InputError):
    """A classifier model is structurally invalid or not usable."""


class NonConvergenceError(OgttError, RuntimeError):
    """No optimizer start converged; carries the best-effort result."""

    def __init__(self, message: str, best: object = None):
        super().__init__(message)
        self.best = best


class TrainingError(OgttError, RuntimeError):
    """Separator training cannot proceed (degenerate or one-class data)."""


class GenerationError(OgttError, RuntimeError):
    """Synthetic cohort generation could not satisfy its constraints."""


class PipelineError(OgttError, RuntimeError):
    """A cohort run failed midway (not an input problem)."""

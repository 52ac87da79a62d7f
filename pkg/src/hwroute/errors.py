"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: parameter/input problems exit 2,
I/O problems exit 3, internal invariant breaches exit 4.
"""


class HwrouteError(Exception):
    """Base class for all package errors."""


class ParameterError(HwrouteError):
    """Invalid model or run parameters (user-remediable)."""


class InputError(HwrouteError):
    """Malformed or inconsistent input data (bad coordinates, bad files)."""


class GenerationError(HwrouteError):
    """A generator could not produce a valid instance (e.g. zero highway
    nodes drawn); the message suggests a remediation such as reseeding."""


class RoutingPolicyError(HwrouteError):
    """A routing policy was applied to an instance of the wrong model."""


class InvariantError(HwrouteError):
    """An internal consistency check failed; indicates a bug."""

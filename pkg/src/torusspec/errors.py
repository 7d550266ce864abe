"""Exception types raised by the library.

Every error carries a short machine-readable ``code`` so the CLI can emit
structured error objects.
"""

from __future__ import annotations


class TorusSpecError(Exception):
    """Base class for all library errors."""

    code = "error"

    def payload(self) -> dict:
        return {"code": self.code, "message": str(self)}


class ConfigError(TorusSpecError):
    code = "config"


class DegenerateLatticeError(TorusSpecError):
    code = "degenerate-lattice"


class NotInDualLatticeError(TorusSpecError):
    code = "not-in-dual-lattice"


class SingularResolventError(TorusSpecError):
    code = "singular-resolvent"


class NoKernelError(TorusSpecError):
    code = "no-kernel"


class IllConditionedContourError(TorusSpecError):
    code = "ill-conditioned-contour"


class UnexpectedRankError(TorusSpecError):
    code = "unexpected-rank"


class UnreliableContourError(TorusSpecError):
    code = "unreliable-contour"


class RootBracketingError(TorusSpecError):
    code = "root-bracketing"


class BranchAmbiguityError(TorusSpecError):
    code = "branch-ambiguity"


class ClassificationWindowError(TorusSpecError):
    code = "classification-window"


class NonGraphEndError(TorusSpecError):
    code = "non-graph-end"


class WrongBranchError(TorusSpecError):
    code = "wrong-branch"


class ZeroOfSectionError(TorusSpecError):
    code = "zero-of-section"

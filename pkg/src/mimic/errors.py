"""Exception hierarchy shared by the IR, checker, plugins, and CLI."""


class MimicError(Exception):
    """Base class for all diagnostics raised by this package."""


# --- graph construction -----------------------------------------------------

class IrError(MimicError):
    pass


class ArityMismatch(IrError):
    pass


class NotMutable(IrError):
    pass


class AlreadySealed(IrError):
    pass


class IndexOutOfRange(IrError):
    pass


class MissingOperand(IrError):
    pass


# --- typing -----------------------------------------------------------------

class TypingError(MimicError):
    """A typing-rule violation detected during construction or re-checking.

    kind is one of: SortMismatch, NotAFunction, NotAssignable, IndexOutOfBounds,
    HeterogeneousSortExtract, UnresolvedPlaceholder, FilterNotBoolean.
    """

    def __init__(self, kind, offending, expected=None, found=None, message=""):
        self.kind = kind
        self.offending = offending
        self.expected = expected
        self.found = found
        self.message = message
        super().__init__(self.render(lambda n: f"<node {n}>"))

    def render(self, show, severity="error"):
        """Format per the CLI contract.

        show maps a node id to printed text; expected/found may be absent.
        """
        base = f"{severity}: {self.kind} at node {self.offending}"
        if self.expected is not None or self.found is not None:
            exp = show(self.expected) if self.expected is not None else "?"
            fnd = show(self.found) if self.found is not None else "?"
            base += f": expected {exp}, found {fnd}"
        elif self.message:
            base += f": {self.message}"
        return base


# --- normalization / evaluation ---------------------------------------------

class BudgetExceeded(MimicError):
    pass


class StepBudgetExceeded(MimicError):
    pass


class UndefinedBehavior(MimicError):
    pass


class UnsafeBitcast(MimicError):
    pass


class SizeTooLarge(MimicError):
    pass


class Stuck(MimicError):
    pass


class NoRuntimeSemantics(MimicError):
    pass


# --- plugins / passes ---------------------------------------------------------

class DuplicatePlugin(MimicError):
    pass


class RegistrationError(MimicError):
    pass


class PassNotFound(MimicError):
    pass


class UnsupportedConstruct(MimicError):
    pass


class StateBlowupExceeded(MimicError):
    pass


# --- surface language ---------------------------------------------------------

class SurfaceError(MimicError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class LexError(SurfaceError):
    pass


class ParseError(SurfaceError):
    pass


class NameNotFound(SurfaceError):
    pass

"""Exception hierarchy shared across the package."""


class TjurinaError(Exception):
    """Base class for all package errors."""


class ParseError(TjurinaError):
    """Input text does not conform to the polynomial grammar."""


class NotHomogeneous(TjurinaError):
    """Expanded polynomial mixes total degrees."""


class ZeroPolynomial(TjurinaError):
    """Expanded polynomial is identically zero."""


class DegreeMismatch(TjurinaError):
    """Graded operation applied to operands of different degrees."""


class FieldMismatch(TjurinaError):
    """Operands live over different coefficient fields."""


class NotStabilized(TjurinaError):
    """Hilbert function still changing at the scan cap; input likely non-reduced."""


class NotReduced(TjurinaError):
    """Operation requires a reduced curve."""


class InternalInconsistency(TjurinaError):
    """A computed invariant failed a cross-check; signals a bug, never ignored."""


class FreeCurve(TjurinaError):
    """Operation undefined for free curves (m = 2)."""


class NegativeResult(TjurinaError):
    """Closed formula produced a negative value on inconsistent candidate data."""


class PreconditionViolated(TjurinaError):
    """Operation called outside its stated domain."""


class OutOfRange(TjurinaError):
    """Enumeration parameters exceed the configured safety bounds."""

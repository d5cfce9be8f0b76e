"""Exception types shared across the package."""


class NormalFormError(Exception):
    """Base class for all errors raised by this package."""


class ContextMismatch(NormalFormError):
    """Two objects built over different truncation contexts were combined."""


class ModelError(NormalFormError):
    """A frequency model violates a structural assumption (zero frequency,
    missing mode coverage, or a numeric value that contradicts the declared
    symbolic independence inside the enumeration window)."""


class UniqueFactorizationViolation(NormalFormError):
    """An enumerated resonance element admits more than one factorization
    over the extracted generators."""


class CutoffTooSmall(NormalFormError):
    """A generator touches the degree cutoff boundary, so the enumeration
    window cannot certify completeness."""


class ResonantTermInRange(NormalFormError):
    """A homological solve met a term with exactly zero divisor."""


class HypothesisViolation(NormalFormError):
    """The input field does not have the shape required by the normalization
    theorem (non-diagonal kernel terms below the resonance-degree threshold,
    or unremoved non-resonant low-order terms)."""


class AlreadyNormal(NormalFormError):
    """Signal: an iteration step was requested but the field carries no
    removable component."""


class NonterminatingSeries(NormalFormError):
    """A Lie series was requested for a generator of order zero, so the
    series would not terminate at any truncation degree."""


class ProblemFileError(NormalFormError):
    """A problem description file is malformed (bad JSON, unknown keys,
    missing sections, or unparsable values)."""

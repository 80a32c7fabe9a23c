"""Exception taxonomy shared by all wittkit modules.

Every exception carries a stable ``code`` string so the CLI can map failures
to machine-readable diagnostics without string matching on messages.
"""


class WittkitError(Exception):
    code = "Error"

    def __init__(self, message="", **info):
        super().__init__(message or self.code)
        self.info = info


class ZeroElement(WittkitError):
    code = "ZeroElement"


class ZeroSlot(WittkitError):
    code = "ZeroSlot"


class ZeroArgument(WittkitError):
    code = "ZeroArgument"


class FieldMismatch(WittkitError):
    code = "FieldMismatch"


class UnsupportedField(WittkitError):
    code = "UnsupportedField"


class UndecidableLayer(WittkitError):
    code = "UndecidableLayer"


class UnsupportedLocalField(WittkitError):
    """Reserved extension point: decisions over local fields we do not model
    natively (e.g. completions of biquadratic number fields)."""

    code = "UnsupportedLocalField"


class UnsupportedResidueField(WittkitError):
    code = "UnsupportedResidueField"


class BadDiscriminant(WittkitError):
    code = "BadDiscriminant"


class DegenerateGram(WittkitError):
    code = "DegenerateGram"


class EvenValuation(WittkitError):
    code = "EvenValuation"


class UnsupportedExponent(WittkitError):
    code = "UnsupportedExponent"


class NotASimilarityFactor(WittkitError):
    code = "NotASimilarityFactor"


class FormIsSplit(WittkitError):
    code = "FormIsSplit"


class NotTorsion(WittkitError):
    code = "NotTorsion"


class DepthLimitExceeded(WittkitError):
    """Raised when a certificate recursion would need decisions beyond the
    supported tower depth.  ``partial`` holds the trace built so far."""

    code = "DepthLimitExceeded"

    def __init__(self, message="", partial=None, **info):
        super().__init__(message, **info)
        self.partial = partial


class SearchExhausted(WittkitError):
    code = "SearchExhausted"


class CertificateSearchExhausted(WittkitError):
    code = "CertificateSearchExhausted"


class DecompositionNotFound(WittkitError):
    code = "DecompositionNotFound"


class DuplicateIndexSets(WittkitError):
    code = "DuplicateIndexSets"


class DegreeNot8(WittkitError):
    code = "DegreeNot8"


class DegreeNot2n(WittkitError):
    code = "DegreeNot2n"


class UnknownExample(WittkitError):
    code = "UnknownExample"


class DegenerateExtension(WittkitError):
    code = "DegenerateExtension"


class PreconditionFailed(WittkitError):
    code = "PreconditionFailed"


class ParseError(WittkitError):
    """Grammar error in a field/element/form expression; ``position`` is the
    0-based offset into the source string."""

    code = "ParseError"

    def __init__(self, message, position=None, **info):
        super().__init__(message, **info)
        self.position = position

    def __str__(self):
        base = super().__str__()
        if self.position is not None:
            return "%s (at position %d)" % (base, self.position)
        return base

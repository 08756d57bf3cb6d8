"""Exception hierarchy.

Every error carries a machine-readable ``code`` (the class name), an HTTP
``status`` used by the service and a ``detail`` mapping.
"""


class MetaError(Exception):
    status = 400

    def __init__(self, message, **detail):
        super().__init__(message)
        self.message = message
        self.detail = detail

    @property
    def code(self):
        return type(self).__name__

    def to_dict(self):
        return {"error_code": self.code, "message": self.message, "detail": self.detail}


# parsing / validation (400)
class ParseError(MetaError):
    status = 400


class NoConsistentSeparator(ParseError):
    pass


class AmbiguousHeader(ParseError):
    pass


class RowArityMismatch(ParseError):
    pass


class NonNumericCell(ParseError):
    pass


class InvariantViolation(ParseError):
    pass


class ColumnConflict(ParseError):
    pass


class InvalidParameter(ParseError):
    pass


# statistical preconditions (422)
class StatisticalError(MetaError):
    status = 422


class MissingRequiredColumns(StatisticalError):
    def __init__(self, missing, message=None):
        missing = list(missing)
        super().__init__(message or "missing required columns: " + ", ".join(missing),
                         missing=missing)
        self.missing = missing


class InsufficientSubjects(StatisticalError):
    pass


class DegenerateVariance(StatisticalError):
    pass


class AllZeroArm(StatisticalError):
    pass


class EmptyInput(StatisticalError):
    pass


class MixedMeasures(StatisticalError):
    pass


class UnsupportedMeasure(StatisticalError):
    pass


# wiki access
class NotCsvTitle(MetaError):
    status = 400


class NoLinkSource(MetaError):
    status = 400


class UpstreamError(MetaError):
    status = 502


class HttpFailure(UpstreamError):
    def __init__(self, status_code, message=None, **detail):
        super().__init__(message or f"upstream HTTP failure ({status_code})",
                         upstream_status=status_code, **detail)
        self.status_code = status_code


class EmptyPage(UpstreamError):
    pass

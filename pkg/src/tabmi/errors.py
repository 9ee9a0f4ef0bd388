"""Exception hierarchy shared across the package."""


class TabmiError(Exception):
    """Base class for all package errors."""


class SchemaError(TabmiError):
    pass


class MissingColumnError(TabmiError):
    pass


class TypeMismatchError(TabmiError):
    def __init__(self, row: int, feature: str, value: str):
        self.row = row
        self.feature = feature
        self.value = value
        super().__init__(f"row {row}, feature {feature!r}: cannot parse {value!r}")


class EmptyTableError(TabmiError):
    pass


class OutOfRangeError(TabmiError):
    pass


class UnseenCategoryError(TabmiError):
    pass


class UnknownFeatureError(TabmiError):
    pass


class BackendUnavailableError(TabmiError):
    pass


class NoLegalCandidateError(TabmiError):
    pass


class EmptyPrefixError(TabmiError):
    pass


class DegenerateTargetError(TabmiError):
    pass


class MalformedPolygonError(TabmiError):
    pass


class IntegrityError(TabmiError):
    pass

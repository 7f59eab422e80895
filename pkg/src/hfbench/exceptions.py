"""Error types.

Every error raised for bad input derives from :class:`FairnessError` (itself a
``ValueError``) so callers and the CLI can tell input problems apart from bugs.
Each class carries a short ``code`` that also shows up in parse reports.
"""


class FairnessError(ValueError):
    code = "FairnessError"


# manifest
class ManifestError(FairnessError):
    """Raised with every violation found, not only the first one."""

    code = "ManifestError"

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(f"{c}: {m}" for c, m in self.violations)
        super().__init__(msg or "invalid manifest")

    @property
    def codes(self):
        return [c for c, _ in self.violations]


class ManifestSyntaxError(FairnessError):
    code = "SyntaxError"

    def __init__(self, msg, lineno, colno):
        self.lineno = lineno
        self.colno = colno
        super().__init__(f"{msg} (line {lineno}, column {colno})")


# ingest
class MissingColumn(FairnessError):
    code = "MissingColumn"


class EmptyLog(FairnessError):
    code = "EmptyLog"

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


# metrics
class EmptyInput(FairnessError):
    code = "EmptyInput"


class EmptyConfusion(FairnessError):
    code = "EmptyConfusion"


class UndefinedRate(FairnessError):
    code = "UndefinedRate"


class SingleGroup(FairnessError):
    code = "SingleGroup"


class EmptyGroup(FairnessError):
    code = "EmptyGroup"


class InfeasiblePoint(FairnessError):
    code = "InfeasiblePoint"


class ZeroNormalization(FairnessError):
    code = "ZeroNormalization"


class KMismatch(FairnessError):
    code = "KMismatch"


class ThresholdMismatch(FairnessError):
    code = "ThresholdMismatch"


class NonFiniteValue(FairnessError):
    code = "NonFiniteValue"


# aggregation / selection / ranking
class IdentityMismatch(FairnessError):
    code = "IdentityMismatch"


class DuplicateTask(FairnessError):
    code = "DuplicateTask"


class EmptyHistory(FairnessError):
    code = "EmptyHistory"


class WrongSplit(FairnessError):
    code = "WrongSplit"


class MixedBaselines(FairnessError):
    code = "MixedBaselines"


class UnknownKey(FairnessError):
    code = "UnknownKey"


class DegenerateSpec(FairnessError):
    code = "DegenerateSpec"


class EmptyTable(FairnessError):
    code = "EmptyTable"


class EmptySeries(FairnessError):
    code = "EmptySeries"

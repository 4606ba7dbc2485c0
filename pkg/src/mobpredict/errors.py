"""Exception hierarchy shared by all stages."""


class MobPredictError(Exception):
    """Base class; the CLI maps it to a data-error exit code."""


class MalformedLine(MobPredictError):
    def __init__(self, reason: str, lineno: int | None = None, line: str | None = None):
        self.reason = reason
        self.lineno = lineno
        self.line = line
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(f"{where}{reason}")


class NoBuildingPrefix(MobPredictError):
    pass


class EmptyTrace(MobPredictError):
    pass


class ColdModel(MobPredictError):
    pass


class NumericalDivergence(MobPredictError):
    pass


class EmptyAfterFilter(MobPredictError):
    pass


class SeriesTooShort(MobPredictError):
    pass


class ConfigInvalid(MobPredictError):
    pass


class MissingCoordinates(MobPredictError):
    def __init__(self, buildings):
        self.buildings = sorted(buildings)
        super().__init__("no coordinates for buildings: " + ", ".join(self.buildings))


class DegenerateInput(MobPredictError):
    pass


class EmptyInput(MobPredictError):
    pass


class IoFailure(MobPredictError):
    pass

class SzilardError(Exception):
    """Base class for physics-level failures (as opposed to bad arguments)."""


class InsufficientLevelsError(SzilardError):
    pass


class PauliCapacityError(SzilardError):
    pass


class InstanceTooLargeError(SzilardError):
    pass


class InfeasibleOutcomeError(SzilardError):
    pass


class SpectrumFormatError(ValueError):
    pass

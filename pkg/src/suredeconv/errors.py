"""Exception hierarchy. Each family carries a distinct CLI exit code."""


class SureDeconvError(Exception):
    exit_code = 1


class ShapeMismatch(SureDeconvError):
    exit_code = 3


class LengthMismatch(SureDeconvError):
    exit_code = 3


class ImaginaryResidueTooLarge(SureDeconvError):
    exit_code = 4


class EmptyObservableSet(SureDeconvError):
    exit_code = 5


class NoAdmissibleChi(SureDeconvError):
    exit_code = 5


class KernelLargerThanGrid(SureDeconvError):
    exit_code = 6


class ZeroBlurredSignal(SureDeconvError):
    exit_code = 6


class WeightsUnset(SureDeconvError):
    exit_code = 7


class SingularSystem(SureDeconvError):
    exit_code = 7


class NotOrthonormalFlavor(SureDeconvError):
    exit_code = 7


class UnsupportedDepth(SureDeconvError):
    exit_code = 8


class UnknownFilter(SureDeconvError):
    exit_code = 8


class InvalidCovariance(SureDeconvError):
    exit_code = 9

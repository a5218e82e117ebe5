"""Exception hierarchy shared by every module.

Validation problems (bad parameters, bad config) derive from ``ValueError``;
numerical failures (quadrature, ODE, inversion, Monte Carlo diagnostics)
derive from ``RuntimeError``. The CLI maps the two families to exit codes.
"""


class JcirError(Exception):
    pass


class ValidationError(JcirError, ValueError):
    pass


class NumericalError(JcirError, RuntimeError):
    pass


class QuadratureError(NumericalError):
    pass


class OdeError(NumericalError):
    pass


class InversionError(NumericalError):
    pass


class SamplingError(NumericalError):
    pass


class NoiseFloorError(NumericalError):
    pass

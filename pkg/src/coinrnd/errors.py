"""Exception hierarchy shared by every coinrnd module."""


class CoinRndError(Exception):
    """Base class for all errors raised by coinrnd."""


# market data ---------------------------------------------------------------


class MalformedInstrument(CoinRndError, ValueError):
    def __init__(self, name):
        super().__init__(f"malformed instrument name: {name!r}")
        self.name = name


class MalformedLine(CoinRndError, ValueError):
    def __init__(self, line_no, reason=""):
        msg = f"malformed snapshot line {line_no}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.line_no = line_no


class EmptySnapshot(CoinRndError, ValueError):
    pass


class NoQuotesForMaturity(CoinRndError, ValueError):
    pass


class NoExchangeOnline(CoinRndError, ValueError):
    pass


# parity / forward ------------------------------------------------------------


class InsufficientStrikes(CoinRndError, ValueError):
    pass


class DegenerateRegression(CoinRndError, ValueError):
    pass


class NoCombinedPoints(CoinRndError, ValueError):
    pass


class ParityViolation(CoinRndError, ValueError):
    pass


# model / calibration -----------------------------------------------------------


class InvalidHorizon(CoinRndError, ValueError):
    pass


class TooFewPoints(CoinRndError, ValueError):
    pass


class ConvergenceFailure(CoinRndError, RuntimeError):
    def __init__(self, iterations, last_cost):
        super().__init__(
            f"least squares did not converge after {iterations} iterations "
            f"(cost={last_cost:.3e})"
        )
        self.iterations = iterations
        self.last_cost = last_cost


# density tools -------------------------------------------------------------


class GridTooSmall(CoinRndError, ValueError):
    pass


class NoSolution(CoinRndError, ValueError):
    pass


# validation ----------------------------------------------------------------


class TooShortSeries(CoinRndError, ValueError):
    pass


class MissingFit(CoinRndError, KeyError):
    def __init__(self, timestamp):
        super().__init__(f"no fit available at timestamp {timestamp}")
        self.timestamp = timestamp


class TooFewSamples(CoinRndError, ValueError):
    pass


class SearchFailure(CoinRndError, RuntimeError):
    pass


# oracle ----------------------------------------------------------------------


class QuadratureFailure(CoinRndError, RuntimeError):
    pass

"""Exception types shared by the package."""


class SingerError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SingerError, ValueError):
    pass


class FieldTooLarge(ConfigError):
    pass


class ZeroElement(SingerError, ValueError):
    pass


class PrecisionExhausted(SingerError, ArithmeticError):
    """The tracked precision window is too small to decide the answer."""


class DivisionByZero(SingerError, ZeroDivisionError):
    pass


class NoRoot(SingerError, ValueError):
    pass


class NotInvertible(SingerError, ArithmeticError):
    pass


class Singular(SingerError, ArithmeticError):
    pass


class SizeCapExceeded(SingerError, RuntimeError):
    pass


class NotInStabilizer(SingerError, ValueError):
    pass


class SearchExhausted(SingerError, RuntimeError):
    pass


class WordSearchExhausted(SearchExhausted):
    pass


class NotUnipotent(SingerError, ValueError):
    pass


class WrongDimension(SingerError, ValueError):
    pass

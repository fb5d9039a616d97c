"""Exception hierarchy shared by every module of the package."""


class PretopoError(Exception):
    """Base class for all errors raised by pretopomd."""


# -- ingestion -------------------------------------------------------------

class DataError(PretopoError, ValueError):
    pass


class EmptyFile(DataError):
    pass


class MissingColumn(DataError):
    def __init__(self, name):
        super().__init__(f"missing column {name!r}")
        self.name = name


class UnparseableNumeric(DataError):
    def __init__(self, row, col, value=None):
        super().__init__(f"cannot parse {value!r} as a number (row {row}, column {col})")
        self.row = row
        self.col = col
        self.value = value


class UnknownCategoryLevel(DataError):
    def __init__(self, row, col, value):
        super().__init__(f"value {value!r} is not a declared level (row {row}, column {col})")
        self.row = row
        self.col = col
        self.value = value


class TooManyLevels(DataError):
    def __init__(self, col, n_levels, max_levels):
        super().__init__(f"column {col!r} has {n_levels} distinct values (max {max_levels})")
        self.col = col


class UnknownFeature(DataError):
    def __init__(self, name):
        super().__init__(f"unknown feature {name!r}")
        self.name = name


class IncompatibleKinds(DataError):
    pass


class EmptyTable(DataError):
    pass


# -- distances / spaces ----------------------------------------------------

class IncompatibleMetric(PretopoError, ValueError):
    pass


class NonFiniteValue(PretopoError, ValueError):
    pass


class SingletonMatrix(PretopoError, ValueError):
    pass


class ConfigError(PretopoError, ValueError):
    """Invalid configuration; ``key`` names the offending entry when known."""

    def __init__(self, message, key=None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class UnknownPrenetworkInRule(ConfigError):
    def __init__(self, names):
        names = sorted(names)
        super().__init__(f"rule references undeclared prenetwork(s): {', '.join(names)}", key="dnf")
        self.names = names


# -- rules -----------------------------------------------------------------

class RuleError(PretopoError, ValueError):
    pass


class RuleSyntaxError(RuleError):
    def __init__(self, position, expected, found=None):
        where = "end of input" if found is None else repr(found)
        super().__init__(f"at position {position}: expected {expected}, found {where}")
        self.position = position
        self.expected = expected
        self.found = found


class NegationUnsupported(RuleError):
    def __init__(self, position):
        super().__init__(f"negation is not allowed in positive rules (position {position})")
        self.position = position


class EmptyInput(RuleError):
    pass


class UnboundVariable(RuleError, KeyError):
    def __init__(self, name):
        super().__init__(f"no truth value bound for {name!r}")
        self.name = name

    def __str__(self):
        return self.args[0]


# -- seeding / hierarchy / metrics -----------------------------------------

class IsolatedStart(PretopoError, ValueError):
    def __init__(self, start):
        super().__init__(f"element {start} has no out-edges to walk along")
        self.start = start


class EmptySetInFamily(PretopoError, ValueError):
    pass


class UndefinedIndex(PretopoError, ValueError):
    pass


class LengthMismatch(PretopoError, ValueError):
    pass


class UnknownElement(PretopoError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ''


class UnknownSetId(PretopoError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ''

class ExselError(Exception):
    exit_code = 1


class ValidationError(ExselError, ValueError):
    exit_code = 2


class ZeroColumn(ValidationError):
    def __init__(self, index):
        self.index = index
        super().__init__("Column " + str(index) + " has (near) zero norm")


class BadDim(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass


class InvalidProblem(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, line, message="could not parse value"):
        self.line = line
        super().__init__("Line " + str(line) + ": " + message)


class RaggedRows(ValidationError):
    def __init__(self, line, expected, found):
        self.line = line
        self.expected = expected
        self.found = found
        super().__init__("Line " + str(line) + ": expected " + str(expected) + " fields, found " + str(found))


class NoConvergence(ExselError, RuntimeError):
    def __init__(self, iterations, gap, target_index=None):
        self.iterations = iterations
        self.gap = gap
        self.target_index = target_index
        message = "No convergence after " + str(iterations) + " sweeps, duality gap " + str(gap)
        if target_index is not None:
            message += " (target " + str(target_index) + ")"
        super().__init__(message)

    def for_target(self, target_index):
        return NoConvergence(self.iterations, self.gap, target_index)


class TooFewPoints(ValidationError):
    pass


class ZeroCode(ExselError, ValueError):
    def __init__(self, index):
        self.index = index
        super().__init__("Code of point " + str(index) + " is zero; the exemplars cannot represent it")


class EmptyGraph(ExselError, ValueError):
    pass


class NoExemplarsForClass(ValidationError):
    def __init__(self, label):
        self.label = label
        super().__init__("No exemplars carry class " + str(label))


class LengthMismatch(ValidationError):
    pass


class EmptySelection(ValidationError):
    pass


class UnsupportedDim(ValidationError):
    pass


class DegenerateHull(ExselError, ValueError):
    pass


class NotInSpan(ExselError, ValueError):
    def __init__(self, index):
        self.index = index
        super().__init__("Point " + str(index) + " lies outside the span of the exemplars")

"""Exception hierarchy shared by every module of the package."""


class TransportError(ValueError):
    """Base class for all errors raised by nltrans."""


# problem model

class DimensionMismatchError(TransportError):
    pass


class NegativeQuantityError(TransportError):
    pass


class UnbalancedError(TransportError):
    def __init__(self, gap):
        self.gap = gap
        super().__init__(f"problem is unbalanced: sum(supply) - sum(demand) = {gap:g}")


class InvalidCostModelError(TransportError):
    def __init__(self, cell, rule):
        self.cell = cell
        self.rule = rule
        super().__init__(f"invalid cost model at cell {cell}: {rule}")


class NegativeArgumentError(TransportError):
    pass


# tableau

class RowSumViolationError(TransportError):
    def __init__(self, row, gap):
        self.row = row
        self.gap = gap
        super().__init__(f"row {row} misses its supply by {gap:g}")


class ColSumViolationError(TransportError):
    def __init__(self, col, gap):
        self.col = col
        self.gap = gap
        super().__init__(f"column {col} misses its demand by {gap:g}")


class NegativeCellError(TransportError):
    def __init__(self, cell, value):
        self.cell = cell
        self.value = value
        super().__init__(f"cell {cell} holds negative quantity {value:g}")


class OutOfRangeCellError(TransportError):
    pass


class NotATreeError(TransportError):
    pass


class EnteringIsBasicError(TransportError):
    pass


class EmptyLoopError(TransportError):
    pass


class ThetaTooLargeError(TransportError):
    pass


# solvers / oracle

class WrongCostClassError(TransportError):
    pass


class InfeasibleEndpointError(TransportError):
    pass


class TooLargeError(TransportError):
    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f"{count} spanning trees exceed the enumeration cap of {cap}")


class NotConvexError(TransportError):
    pass


class NotConcaveError(TransportError):
    pass

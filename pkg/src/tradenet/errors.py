"""Exception hierarchy shared across the package."""


class TradeNetError(ValueError):
    """Base class for all data and contract errors raised by tradenet."""


class GraphError(TradeNetError):
    def __init__(self, msg, pair=None):
        super().__init__(msg)
        self.pair = pair


class DuplicateEdge(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class NonPositiveWeight(GraphError):
    pass


class TooFewNodes(TradeNetError):
    pass


class EmptyNetwork(TradeNetError):
    pass


# ingest

class MalformedRow(TradeNetError):
    def __init__(self, msg, line=None):
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)
        self.line = line


class UnknownColumn(TradeNetError):
    pass


class NegativeValue(MalformedRow):
    pass


class NonPositiveGdp(MalformedRow):
    pass


# fitting

class TooFewSamples(TradeNetError):
    pass


class NonPositiveSample(TradeNetError):
    pass


class DegenerateSigma(TradeNetError):
    pass


class TooFewBins(TradeNetError):
    pass


class InsufficientOverlap(TradeNetError):
    pass


class DegenerateAbscissa(TradeNetError):
    pass


class TooFewEdges(TradeNetError):
    pass


class TooFewDegreeClasses(TradeNetError):
    pass


# null models / simulation

class IsolatedPositiveStrength(TradeNetError):
    pass


class InfeasibleStrengths(TradeNetError):
    pass


class NonConvergence(RuntimeError):
    def __init__(self, msg, residual=None, sweeps=None):
        super().__init__(msg)
        self.residual = residual
        self.sweeps = sweeps


class CoincidentPoints(TradeNetError):
    pass


class BudgetExhausted(RuntimeError):
    def __init__(self, msg, transactions=None, last_drift=None):
        super().__init__(msg)
        self.transactions = transactions
        self.last_drift = last_drift

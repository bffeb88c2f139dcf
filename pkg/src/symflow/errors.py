"""Exception hierarchy.  All errors derive from :class:`SymflowError`."""


class SymflowError(Exception):
    pass


class FieldMismatch(SymflowError, ValueError):
    pass


class SingularMatrix(SymflowError, ArithmeticError):
    pass


class NonConvergence(SymflowError, ArithmeticError):
    pass


class IncompatibleAutomorphism(SymflowError, ValueError):
    pass


class ValidationFailure(SymflowError):
    def __init__(self, properties, residuals):
        self.properties = list(properties)
        self.residuals = dict(residuals)
        detail = ", ".join(f"{p}={self.residuals[p]:.3e}" for p in self.properties)
        super().__init__(f"automorphism check failed: {detail}")

    @property
    def property(self):
        return self.properties[0]


class HypothesisViolated(SymflowError, ValueError):
    pass


class NotCritical(SymflowError):
    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class OutsideDomain(SymflowError, ValueError):
    pass


class NotCriticalCenter(SymflowError, ValueError):
    pass


class SingularEvaluation(SymflowError, ArithmeticError):
    def __init__(self, t):
        super().__init__(f"closed-form flow denominator singular at t={t}")
        self.t = t


class StepRejected(SymflowError):
    pass


class RelationViolated(SymflowError):
    def __init__(self, relation, point_index, residual):
        super().__init__(f"{relation} fails at point {point_index} (residual {residual:.3e})")
        self.relation = relation
        self.point_index = point_index
        self.residual = residual


class NotSquareRoot(SymflowError, ValueError):
    pass


class StructureViolated(SymflowError):
    pass

"""Exception hierarchy shared by all modules."""


class ReflektError(Exception):
    """Base class for every error raised by the package."""


class InputError(ReflektError):
    """Malformed or inconsistent user input (bad JSON, wrong version tag...)."""


class UnknownVertex(ReflektError):
    pass


class NotATree(ReflektError):
    pass


class GraphMismatch(ReflektError):
    pass


class NotASource(ReflektError):
    pass


class NotASink(ReflektError):
    pass


class Mismatch(ReflektError):
    """Two objects that must live over the same base (quiver, field...) do not."""


class CyclicQuiver(ReflektError):
    pass


class NotStabilized(ReflektError):
    """Coset enumeration did not close within the requested bound."""


class SizeLimit(ReflektError):
    pass


class UnknownObject(ReflektError):
    pass


class BadMorphism(ReflektError):
    pass


class BadSquareData(ReflektError):
    pass


class ChainMismatch(ReflektError):
    pass


class NotLoopfree(ReflektError):
    pass


class NotLoopfreeSource(NotLoopfree):
    pass


class NotLoopfreeD(NotLoopfree):
    pass


class BaseMismatch(ReflektError):
    pass


class ShapeMismatch(ReflektError):
    pass


class NotInvertible(ReflektError):
    pass


class NotFunctorial(ReflektError):
    pass

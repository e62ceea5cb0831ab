"""Exception hierarchy shared by all modules."""


class GaussHarmError(Exception):
    """Base class for library errors."""


class MeshError(GaussHarmError):
    pass


class NonManifold(MeshError):
    pass


class NonOrientable(MeshError):
    pass


class DegenerateFace(MeshError):
    pass


class NotClosed(MeshError):
    pass


class Disconnected(MeshError):
    pass


class OpenLoop(GaussHarmError):
    pass


class FrameDegenerate(GaussHarmError):
    pass


class NonPositiveWeight(GaussHarmError):
    pass


class SolverDivergence(GaussHarmError):
    pass


class EigensolverStall(GaussHarmError):
    pass


class FactorizationFailure(GaussHarmError):
    pass


class NoSignChange(GaussHarmError):
    pass


class StepFailure(GaussHarmError):
    pass


class SelfIntersection(GaussHarmError):
    pass

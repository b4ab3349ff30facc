"""Exception types raised by the benchmark.

Every failure that turns into an empty report row derives from
:class:`BenchmarkError`, so the runner can catch one base class and
record ``str(exc)`` as the failure reason.
"""


class BenchmarkError(Exception):
    """Base class for expected, per-mesh failures."""


class MeshError(BenchmarkError, ValueError):
    """A mesh violates the structural invariants of :class:`TriMesh`."""


class ZeroArea(BenchmarkError):
    """Total 3D or UV area is below the tiny-area threshold."""


class MalformedRecord(BenchmarkError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MixedUVPresence(BenchmarkError):
    """Some faces carry texture coordinates and others do not."""


class RemeshedMesh(BenchmarkError):
    """Candidate triangles no longer correspond to the reference triangles."""


class DegenerateTriangle(BenchmarkError):
    pass


class AllDegenerate(BenchmarkError):
    """Every triangle of the mesh is degenerate in 3D."""


class ZeroVariance(BenchmarkError):
    pass


class CorrespondenceFailure(BenchmarkError):
    """A cut candidate mesh cannot be matched back to the original edges."""


class UVMismatch(BenchmarkError):
    """Surface connectivity cannot be made to agree with UV connectivity."""


class NonManifold(BenchmarkError):
    pass


class NotADisk(BenchmarkError):
    pass


class SolverDiverged(BenchmarkError):
    pass


class ManifestError(Exception):
    """The corpus manifest is unreadable or inconsistent."""


class OutputIOError(Exception):
    pass

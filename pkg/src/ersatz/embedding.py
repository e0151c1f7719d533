"""Delay embedding, increments, and the increment transform of embedded points."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEstimateError, DomainError, LengthError
from .synthesis import Trajectory, as_samples


@dataclass(frozen=True)
class EmbeddingSpec:
    """Embedding dimension ``m`` and delay ``tau`` (in samples)."""

    m: int = 1
    tau: int = 1

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"embedding dimension m must be >= 1, got {self.m}")
        if int(self.tau) != self.tau or self.tau < 1:
            raise DomainError(f"delay tau must be >= 1, got {self.tau}")

    @property
    def span(self):
        return (self.m - 1) * self.tau

    def count(self, length):
        """Number of embedded points for a series of ``length`` samples."""
        return length - self.span


@dataclass(frozen=True)
class EmbeddedPointSet:
    """``N x m`` array of delay vectors; row ``i`` is time ``t = i + (m-1) tau``.

    Column ``j`` of a row holds ``x_{t - j tau}``: the first coordinate is the
    most recent sample.
    """

    points: np.ndarray
    spec: EmbeddingSpec
    source_length: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def count(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.count


def takens_embed(traj, spec):
    """Delay vectors ``(x_t, x_{t-tau}, ..., x_{t-(m-1)tau})`` for every valid ``t``."""
    x = as_samples(traj)
    n = x.shape[0]
    if spec.span >= n:
        raise LengthError(
            f"(m-1)*tau = {spec.span} must be smaller than the series length {n}"
        )
    count = n - spec.span
    cols = [x[spec.span - j * spec.tau : spec.span - j * spec.tau + count] for j in range(spec.m)]
    return EmbeddedPointSet(np.column_stack(cols), spec, n)


def increment_series(traj, tau):
    """``delta_tau x_t = x_t - x_{t-tau}``; a noise :class:`Trajectory` when given one."""
    x = as_samples(traj)
    if int(tau) != tau or tau < 1:
        raise DomainError(f"tau must be a positive integer, got {tau}")
    if tau >= x.shape[0]:
        raise LengthError(f"tau = {tau} must be smaller than the series length {x.shape[0]}")
    d = x[tau:] - x[:-tau]
    if isinstance(traj, Trajectory):
        return Trajectory(d, "noise", traj.spec)
    return d


def increment_matrix(m):
    """The ``m x m`` band matrix mapping a delay vector onto ``(x_t, increments...)``."""
    if m < 1:
        raise DomainError("m must be >= 1")
    q = np.zeros((m, m))
    q[0, 0] = 1.0
    for i in range(1, m):
        q[i, i - 1] = 1.0
        q[i, i] = -1.0
    return q


def increment_transform(pts):
    """Map each ``(x_t, x_{t-tau}, ...)`` to ``(x_t, dx_t, dx_{t-tau}, ...)``."""
    p = pts.points
    out = np.empty_like(p)
    out[:, 0] = p[:, 0]
    out[:, 1:] = p[:, :-1] - p[:, 1:]
    return EmbeddedPointSet(out, pts.spec, pts.source_length)


def inverse_increment_transform(pts):
    """Inverse of :func:`increment_transform`."""
    p = pts.points
    out = np.empty_like(p)
    out[:, 0] = p[:, 0]
    if p.shape[1] > 1:
        out[:, 1:] = p[:, :1] - np.cumsum(p[:, 1:], axis=1)
    return EmbeddedPointSet(out, pts.spec, pts.source_length)


def increment_std(traj, tau):
    """Sample standard deviation of the increments of size ``tau``."""
    sd = float(np.std(increment_series(as_samples(traj), tau)))
    if sd == 0.0:
        raise DegenerateEstimateError(f"increments of size {tau} are constant")
    return sd

"""SO(3) / so(3) algebra on plain numpy arrays.

Vectors are shape ``(3,)`` float arrays and matrices are ``(3, 3)``. The hat
map follows the convention ``hat(x) @ y == cross(x, y)``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NonSkewInput, NonSymmetricInput, NotARotation

# Below this rotation angle the Rodrigues coefficients switch to their
# Taylor series to avoid 0/0.
SMALL_ANGLE = 1e-8

ROTATION_TOL = 1e-12

_I3 = np.eye(3)


def cross(a, b):
    """Cross product of two 3-vectors (np.cross is ~10x slower on tiny inputs)."""
    a0, a1, a2 = a
    b0, b1, b2 = b
    return np.array((a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0))


def hat(v) -> np.ndarray:
    v0, v1, v2 = v
    return np.array(((0.0, -v2, v1), (v2, 0.0, -v0), (-v1, v0, 0.0)))


def _vee(m: np.ndarray) -> np.ndarray:
    # vee of the skew part, no checking
    return 0.5 * np.array((m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]))


def vee(m, tol: float = 1e-10) -> np.ndarray:
    """Inverse of :func:`hat`.

    Raises NonSkewInput if ``m + m.T`` exceeds ``tol`` (scaled by ``max(1, |m|)``).
    """
    m = np.asarray(m, dtype=float)
    scale = max(1.0, float(np.linalg.norm(m)))
    resid = float(np.linalg.norm(m + m.T))
    if resid > tol * scale:
        raise NonSkewInput(f"matrix is not skew-symmetric (|m + m^T| = {resid:.3e})")
    return _vee(m)


def rodrigues_coefficients(theta: float) -> tuple[float, float]:
    """Return ``(sin t / t, (1 - cos t) / t**2)`` accurate for all ``t >= 0``."""
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        return 1.0 - t2 / 6.0, 0.5 - t2 / 24.0
    half = 0.5 * theta
    s = math.sin(half) / half
    # 1 - cos t = 2 sin^2(t/2) avoids cancellation for small t
    return math.sin(theta) / theta, 0.5 * s * s


def rodrigues_exp(f) -> np.ndarray:
    """Matrix exponential of ``hat(f)`` by Rodrigues' formula."""
    f = np.asarray(f, dtype=float)
    theta = math.sqrt(f @ f)
    a, b = rodrigues_coefficients(theta)
    S = hat(f)
    return _I3 + a * S + b * (S @ S)


def is_symmetric(m: np.ndarray, tol: float = 1e-14) -> bool:
    scale = max(1.0, float(np.abs(m).max()))
    return float(np.abs(m - m.T).max()) <= tol * scale


def std_from_nonstd(J_d) -> np.ndarray:
    """Standard inertia ``J = tr(J_d) I - J_d`` from the nonstandard one."""
    J_d = np.asarray(J_d, dtype=float)
    if not is_symmetric(J_d):
        raise NonSymmetricInput("nonstandard inertia must be symmetric")
    return np.trace(J_d) * _I3 - J_d


def nonstd_from_std(J) -> np.ndarray:
    """Inverse of :func:`std_from_nonstd`: ``J_d = tr(J)/2 I - J``."""
    J = np.asarray(J, dtype=float)
    if not is_symmetric(J):
        raise NonSymmetricInput("standard inertia must be symmetric")
    return 0.5 * np.trace(J) * _I3 - J


def orthogonality_error(R) -> float:
    """Frobenius norm of ``I - R^T R``."""
    R = np.asarray(R, dtype=float)
    E = _I3 - R.T @ R
    return math.sqrt(float(np.sum(E * E)))


def as_rotation(R, tol: float = ROTATION_TOL) -> np.ndarray:
    """Validate ``R`` as an element of SO(3) and return it as a float array.

    No re-orthogonalization is performed; a matrix off the group is rejected.
    """
    R = np.array(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        raise NotARotation("rotation must be a finite 3x3 matrix")
    err = orthogonality_error(R)
    if err > tol:
        raise NotARotation(f"|I - R^T R| = {err:.3e} exceeds {tol:.1e}")
    if np.linalg.det(R) <= 0.0:
        raise NotARotation("rotation must have positive determinant")
    return R


def solve3(A: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Solve the 3x3 system ``A x = b`` through the adjugate.

    Returns None when ``A`` is numerically singular.
    """
    r0, r1, r2 = A
    c12 = cross(r1, r2)
    det = float(r0 @ c12)
    scale = float(np.abs(A).max())
    if scale == 0.0 or abs(det) <= 1e-14 * scale**3:
        return None
    return (b[0] * c12 + b[1] * cross(r2, r0) + b[2] * cross(r0, r1)) / det

"""(n-1)-fold vector cross products in R^n, Gram determinants, Gram-Schmidt.

The cross product of n-1 vectors in R^n is the unique multilinear map whose
value is orthogonal to every argument, has squared length equal to the Gram
determinant of the arguments, and completes them to a positively oriented
basis. In coordinates it is the vector of signed cofactors of the n x (n-1)
matrix whose columns are the arguments.

All functions accept leading batch dimensions: ``vs`` has shape
``(..., k, n)`` (k vectors of dimension n).
"""
import numpy as np

from .errors import DegenerateInputError, InputError

MAX_DIM = 8
DEFAULT_DEPENDENCE_TOL = 1e-24
# generic weights for ordering arguments canonically
_ORDER_KEY = np.sqrt(np.array([2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0])) - 1.0


def _as_stack(vs):
    arr = np.asarray(vs, dtype=float)
    if arr.ndim < 2:
        raise InputError("expected a sequence of vectors")
    if not np.all(np.isfinite(arr)):
        raise InputError("vector components must be finite")
    return arr


def cross(vs):
    """Cross product of ``n - 1`` vectors in ``R^n``.

    Linearly dependent input gives the zero vector, not an error.

    >>> cross([[1, 0, 0], [0, 1, 0]])
    array([0., 0., 1.])
    """
    arr = _as_stack(vs)
    k, n = arr.shape[-2:]
    if n < 2:
        raise InputError("ambient dimension must be at least 2")
    if n > MAX_DIM:
        raise InputError(f"ambient dimension {n} exceeds the supported maximum {MAX_DIM}")
    if k != n - 1:
        raise InputError(f"cross product in R^{n} takes {n - 1} vectors, got {k}")
    # Arguments are put in a canonical order first and the permutation parity
    # is applied afterwards, so swapping two arguments negates the result
    # exactly rather than up to roundoff in the determinants.
    key = arr @ _ORDER_KEY[:n]
    perm = np.argsort(key, axis=-1, kind="stable")
    canon = np.take_along_axis(arr, perm[..., None], axis=-2)
    inversions = sum(
        (perm[..., i] > perm[..., j]).astype(int) for i in range(k) for j in range(i + 1, k)
    )
    parity = np.where(np.asarray(inversions) % 2 == 0, 1.0, -1.0)
    cols = np.swapaxes(canon, -1, -2)
    out = np.empty(arr.shape[:-2] + (n,))
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(n):
            minor = np.delete(cols, i, axis=-2)
            sign = 1.0 if (i + n - 1) % 2 == 0 else -1.0
            out[..., i] = sign * np.linalg.det(minor)
    out *= parity[..., None]
    out += 0.0  # no negative zeros
    # repeated arguments: exactly zero
    if k > 1:
        same = np.any(np.all(canon[..., 1:, :] == canon[..., :-1, :], axis=-1), axis=-1)
        out[same] = 0.0
    return out


def gram_det(vs):
    """Determinant of the matrix of pairwise inner products of ``vs``."""
    arr = _as_stack(vs)
    if arr.shape[-2] == 0:
        raise InputError("gram_det needs at least one vector")
    gram = arr @ np.swapaxes(arr, -1, -2)
    return np.linalg.det(gram)


def orthonormalize(vs, tol=DEFAULT_DEPENDENCE_TOL):
    """Gram-Schmidt in the given order.

    Returns an array of the same shape whose rows are orthonormal, span the
    same flag of subspaces, and have positive inner product with the
    corresponding input rows. Projections are applied twice per vector, which
    keeps the output orthonormal to roundoff even for poorly separated input.

    Raises DegenerateInputError (with ``.index``) when the Gram determinant of
    the first ``i + 1`` inputs drops below ``tol``.
    """
    arr = _as_stack(vs)
    if arr.ndim != 2:
        raise InputError("orthonormalize works on a single (k, n) stack")
    k, n = arr.shape
    if k > n:
        raise InputError(f"cannot orthonormalize {k} vectors in R^{n}")
    out = np.zeros_like(arr)
    volume = 1.0
    for i in range(k):
        r = arr[i].copy()
        for _ in range(2):
            r -= out[:i].T @ (out[:i] @ r)
        norm = np.linalg.norm(r)
        volume *= norm * norm
        if volume < tol or norm == 0.0:
            raise DegenerateInputError(
                f"vector {i} is linearly dependent on its predecessors "
                f"(Gram determinant {volume:.3e} < {tol:.1e})",
                index=i,
            )
        out[i] = r / norm
    return out


def normalize(v, axis=-1):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=axis, keepdims=True)

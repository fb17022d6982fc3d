"""
Vector, quasi-norm, mixed and operator norms.

Vectors are 1-d and matrices 2-d float64 numpy arrays. The column of a matrix is the unit the mixed norms reduce
over first: ``mixed_norm(W, p, q) = ||(||w_1||_p, ..., ||w_n2||_p)||_q``.
"""
import numpy as np

from sparsecert.misc.exceptions import DomainError

INF = np.inf


def as_vector(v) -> np.ndarray:
    """
    converts the input to a finite 1-d float64 array

    :param v: array like of length >= 1
    :return:
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise DomainError("a vector must be 1-dimensional and non-empty, got shape {}".format(arr.shape))
    if not np.all(np.isfinite(arr)):
        raise DomainError("vector entries must be finite")
    return arr


def as_matrix(W) -> np.ndarray:
    """
    converts the input to a finite 2-d float64 array

    :param W: array like of shape (n1, n2), n1, n2 >= 1
    :return:
    """
    arr = np.asarray(W, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DomainError("a matrix must be 2-dimensional and non-empty, got shape {}".format(arr.shape))
    if not np.all(np.isfinite(arr)):
        raise DomainError("matrix entries must be finite")
    return arr


def _check_exponent(p, name: str = "p") -> None:
    if p is None or np.isnan(p) or p <= 0:
        raise DomainError("norm exponent {} must be positive, got {}".format(name, p))


def _reduce(magnitudes: np.ndarray, p, axis=None) -> np.ndarray:
    # magnitudes are already absolute values
    if p == INF:
        return np.max(magnitudes, axis=axis)
    if p == 1:
        return np.sum(magnitudes, axis=axis)
    if p == 0.5:
        return np.sum(np.sqrt(magnitudes), axis=axis) ** 2
    if p == 2:
        return np.sqrt(np.sum(magnitudes * magnitudes, axis=axis))
    return np.sum(magnitudes ** p, axis=axis) ** (1.0 / p)


def lp_norm(v, p) -> float:
    """
    l_p norm of a vector; for p < 1 the quasi-norm (sum |v_i|^p)^(1/p) and for p = INF the maximum magnitude

    :param v: vector
    :param p: positive exponent or INF
    :return:
    """
    _check_exponent(p)
    v = as_vector(v)
    return float(_reduce(np.abs(v), p))


def column_norms(W, p) -> np.ndarray:
    """
    the l_p norm of every column of W

    :param W: matrix
    :param p: positive exponent or INF
    :return: vector of length n2
    """
    _check_exponent(p)
    W = as_matrix(W)
    return _reduce(np.abs(W), p, axis=0)


def mixed_norm(W, p, q) -> float:
    """
    mixed (p, q) norm: the l_q norm of the vector of column l_p norms

    :param W: matrix
    :param p: exponent applied within columns
    :param q: exponent applied across columns, INF allowed
    :return:
    """
    _check_exponent(p, "p")
    _check_exponent(q, "q")
    return float(_reduce(column_norms(W, p), q))


def linf_operator_norm(W) -> float:
    """
    sup over ||eta||_inf <= 1 of ||W^T eta||_inf. Every row of W^T is a column of W, so this is the maximum column
    l_1 norm, evaluated through the same reduction as mixed_norm(W, 1, INF).

    :param W: matrix
    :return:
    """
    return float(_reduce(column_norms(W, 1), INF))

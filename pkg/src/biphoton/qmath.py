"""Small dense complex linear algebra for two-qubit work.

Matrices are plain ``numpy`` arrays of shape (4, 4) or (2, 2) with complex
dtype. Basis ordering is fixed to HH, HV, VH, VV everywhere in the package.

The eigenvalue solver is hand-written (Hessenberg reduction followed by
Wilkinson-shifted complex QR) and works on Python complex scalars, which is
faster than numpy for matrices this small.
"""

import cmath
import math

import numpy as np

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

_EPS = np.finfo(float).eps
MAX_QR_ITER = 60


class EigenConvergenceError(ArithmeticError):
    """Raised when the QR iteration fails to deflate within its cap."""


def as_matrix(a, n=4):
    m = np.asarray(a, dtype=complex)
    if m.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def kron2(a, b):
    """Kronecker product of two 2x2 matrices, row-major in HH, HV, VH, VV."""
    return np.kron(as_matrix(a, 2), as_matrix(b, 2))


def matmul4(a, b):
    return as_matrix(a) @ as_matrix(b)


def adjoint4(a):
    return as_matrix(a).conj().T


def conj4(a):
    return as_matrix(a).conj()


def trace4(a):
    return complex(np.trace(as_matrix(a)))


def det4(a):
    """Determinant by cofactor expansion along the first row.

    Kept independent of any LU/QR path so it can serve as a check on eig4.
    """
    m = as_matrix(a).tolist()

    def det3(r):
        return (r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
                - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
                + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]))

    total = 0j
    for j in range(4):
        minor = [[m[i][k] for k in range(4) if k != j] for i in range(1, 4)]
        total += (-1) ** j * m[0][j] * det3(minor)
    return total


def _hessenberg(h):
    """In-place Householder reduction of a list-of-lists matrix to upper Hessenberg form."""
    n = len(h)
    for k in range(n - 2):
        x = [h[i][k] for i in range(k + 1, n)]
        alpha = math.sqrt(sum(abs(v) ** 2 for v in x))
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = list(x)
        v[0] += phase * alpha
        vnorm2 = sum(abs(t) ** 2 for t in v)
        if vnorm2 == 0.0:
            continue
        # H <- P H P with P = I - 2 v v^H / (v^H v)
        for j in range(n):
            s = sum(v[i].conjugate() * h[k + 1 + i][j] for i in range(len(v)))
            s *= 2.0 / vnorm2
            for i in range(len(v)):
                h[k + 1 + i][j] -= v[i] * s
        for i in range(n):
            s = sum(h[i][k + 1 + j] * v[j] for j in range(len(v)))
            s *= 2.0 / vnorm2
            for j in range(len(v)):
                h[i][k + 1 + j] -= s * v[j].conjugate()
        for i in range(k + 2, n):
            h[i][k] = 0j


def _wilkinson_shift(a, b, c, d):
    # eigenvalue of [[a, b], [c, d]] closest to d
    tr_half = (a + d) / 2
    disc = cmath.sqrt(((a - d) / 2) ** 2 + b * c)
    l1, l2 = tr_half + disc, tr_half - disc
    return l1 if abs(l1 - d) <= abs(l2 - d) else l2


def _qr_step(h, lo, hi, mu):
    """One shifted QR sweep on the active block h[lo:hi+1, lo:hi+1] using Givens rotations."""
    for i in range(lo, hi + 1):
        h[i][i] -= mu
    rots = []
    for k in range(lo, hi):
        a, b = h[k][k], h[k + 1][k]
        r = math.hypot(abs(a), abs(b))
        if r == 0.0:
            c, s = 1.0 + 0j, 0j
        else:
            c, s = a / r, b / r
        cc, sc = c.conjugate(), s.conjugate()
        rowk, rowk1 = h[k], h[k + 1]
        for j in range(k, hi + 1):
            x, y = rowk[j], rowk1[j]
            rowk[j] = cc * x + sc * y
            rowk1[j] = -s * x + c * y
        rots.append((c, s))
    for idx, k in enumerate(range(lo, hi)):
        c, s = rots[idx]
        sc, cc = s.conjugate(), c.conjugate()
        for i in range(lo, min(k + 2, hi) + 1):
            x, y = h[i][k], h[i][k + 1]
            h[i][k] = x * c + y * s
            h[i][k + 1] = -x * sc + y * cc
    for i in range(lo, hi + 1):
        h[i][i] += mu


def eig4(m):
    """Eigenvalues of a general complex 4x4 matrix (unordered).

    Raises EigenConvergenceError if the QR iteration does not converge.
    """
    a = as_matrix(m)
    return _eig_general(a.tolist())


def _eig_general(h):
    n = len(h)
    _hessenberg(h)
    norm = max(1e-300, max(abs(v) for row in h for v in row))
    vals = [0j] * n
    hi = n - 1
    iters = 0
    while hi >= 0:
        if hi == 0:
            vals[0] = h[0][0]
            break
        # locate the start of the unreduced block ending at hi
        lo = hi
        while lo > 0:
            scale = abs(h[lo][lo]) + abs(h[lo - 1][lo - 1])
            if scale == 0.0:
                scale = norm
            if abs(h[lo][lo - 1]) <= _EPS * scale:
                h[lo][lo - 1] = 0j
                break
            lo -= 1
        if lo == hi:
            vals[hi] = h[hi][hi]
            hi -= 1
            iters = 0
            continue
        iters += 1
        if iters > MAX_QR_ITER:
            raise EigenConvergenceError(
                f"QR iteration did not converge after {MAX_QR_ITER} sweeps")
        if iters % 11 == 0:
            # exceptional shift breaks symmetric stalls
            mu = h[hi][hi] + 0.75 * abs(h[hi][hi - 1])
        else:
            mu = _wilkinson_shift(h[hi - 1][hi - 1], h[hi - 1][hi],
                                  h[hi][hi - 1], h[hi][hi])
        _qr_step(h, lo, hi, mu)
    return np.array(vals, dtype=complex)


def charpoly4(m):
    """Monic characteristic polynomial coefficients [1, c3, c2, c1, c0] via Faddeev-LeVerrier."""
    a = as_matrix(m)
    n = 4
    coeffs = [1.0 + 0j]
    mk = np.zeros_like(a)
    c = 1.0 + 0j
    for k in range(1, n + 1):
        mk = a @ mk + c * I4
        c = -np.trace(a @ mk) / k
        coeffs.append(c)
    return np.array(coeffs, dtype=complex)

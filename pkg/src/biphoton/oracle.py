"""Brute-force quadrature versions of the frequency integrals.

Nothing here uses the closed-form Gaussian characteristic function; these
routines exist to check it.
"""

from dataclasses import dataclass
import math

import numpy as np

from .optics import PATH_I, OpticsError, PostSelectionError
from .states import DensityMatrix


class ResolutionError(ValueError):
    """The grid is too coarse for the oscillation it has to integrate."""


@dataclass(frozen=True)
class QuadratureGrid:
    span: float = 8.0     # half-width of the window, in units of sigma
    points: int = 8193

    def __post_init__(self):
        if self.points < 1025 or self.points % 2 == 0:
            raise ValueError("points must be an odd integer >= 1025")
        if self.span < 6:
            raise ValueError("span must be at least 6 (units of sigma)")

    def offsets(self, sigma):
        """Frequency offsets from the centre and trapezoid weights."""
        x = np.linspace(-self.span * sigma, self.span * sigma, self.points)
        h = x[1] - x[0]
        w = np.full(self.points, h)
        w[0] = w[-1] = h / 2
        return x, w


def _guard(delta_alpha, sp, g):
    if abs(delta_alpha) * sp.sigma * g.span / g.points > 0.1:
        raise ResolutionError(
            f"delay {delta_alpha:.3g} s under-resolved on a {g.points}-point grid")


def numeric_characteristic(delta_alpha, sp, g=QuadratureGrid()):
    """Trapezoid value of the integral of f(w) exp(i delta_alpha w) over omega0 +- span*sigma."""
    _guard(delta_alpha, sp, g)
    x, w = g.offsets(sp.sigma)
    f = sp.density(sp.omega0 + x)
    carrier = complex(math.cos(delta_alpha * sp.omega0), math.sin(delta_alpha * sp.omega0))
    return carrier * complex(np.sum(w * f * np.exp(1j * delta_alpha * x)))


def _amplitude_factors(delays, sp, g):
    """Rows: exp(i d w) on the grid for each distinct delay d; plus sqrt of weight*f."""
    x, w = g.offsets(sp.sigma)
    f = sp.density(sp.omega0 + x)
    sqrt_wf = np.sqrt(w * f)
    rows = []
    for d in delays:
        _guard(d, sp, g)
        carrier = complex(math.cos(d * sp.omega0), math.sin(d * sp.omega0))
        rows.append(carrier * np.exp(1j * d * x) * sqrt_wf)
    return np.array(rows)


def numeric_reduce(s, sp_a, sp_b, g=QuadratureGrid(), dense=False):
    """Tensor-product trapezoid integral of |psi(w_a, w_b)><psi(w_a, w_b)| f(w_a) f(w_b).

    The frequency-resolved amplitude of every polarization component is a
    sum of products A_m(w_a) B_m(w_b), so the double sum over the grid
    factorises exactly into per-photon Gram matrices. ``dense=True`` forms
    psi on the full 2-D grid instead (only practical for small grids) and
    serves as a check on the factorisation.
    """
    terms = list(s)
    for t in terms:
        if t.path_a != PATH_I or t.path_b != PATH_I:
            raise OpticsError("state still has a split arm; merge before reducing")
    amps = np.array([t.amp for t in terms], dtype=complex)
    idx = np.array([2 * t.pol_a + t.pol_b for t in terms], dtype=int)
    A = _amplitude_factors([t.delay_a for t in terms], sp_a, g)
    B = _amplitude_factors([t.delay_b for t in terms], sp_b, g)

    if dense:
        psi = np.zeros((4, g.points, g.points), dtype=complex)
        for m in range(len(terms)):
            psi[idx[m]] += amps[m] * np.outer(A[m], B[m])
        rho = np.einsum("pij,qij->pq", psi, psi.conj())
    else:
        gram_a = A @ A.conj().T
        gram_b = B @ B.conj().T
        pair = np.outer(amps, amps.conj()) * gram_a * gram_b
        rho = np.zeros((4, 4), dtype=complex)
        np.add.at(rho, (idx[:, None], idx[None, :]), pair)

    tr = float(np.trace(rho).real)
    if tr < 1e-14:
        raise PostSelectionError("post-selection removed the whole state")
    rho = rho / tr
    return DensityMatrix(rho), min(tr, 1.0)

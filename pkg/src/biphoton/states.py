"""Two-qubit density matrices, concurrence and CHSH nonlocality."""

from dataclasses import dataclass
import math

import numpy as np

from .qmath import (SIGMA_X, SIGMA_Y, SIGMA_Z, I2, adjoint4, as_matrix, conj4,
                    eig4, kron2, matmul4, trace4)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
# eigenvalues of the spin-flipped product below this are rounding noise
CLAMP_TOL = 1e-10

YY = kron2(SIGMA_Y, SIGMA_Y)
TSIRELSON = 2 * math.sqrt(2)


class InvalidStateError(ValueError):
    pass


class DegenerateStateError(ValueError):
    pass


class DensityMatrix:
    """Physical two-qubit state in the HH, HV, VH, VV basis.

    Construction validates hermiticity, unit trace and positivity; pass
    ``check=False`` only for matrices already known to be valid.
    """

    __slots__ = ("m",)

    def __init__(self, m, check=True):
        m = as_matrix(m).copy()
        m.setflags(write=False)
        object.__setattr__(self, "m", m)
        if check:
            self._validate()

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    def _validate(self):
        m = self.m
        herm = np.max(np.abs(m - adjoint4(m)))
        if herm >= HERMITIAN_TOL:
            raise InvalidStateError(f"not Hermitian (max deviation {herm:.3g})")
        tr = trace4(m)
        if abs(tr - 1) >= TRACE_TOL:
            raise InvalidStateError(f"trace is {tr:.12g}, expected 1")
        lam_min = float(np.min(np.linalg.eigvalsh((m + adjoint4(m)) / 2)))
        if lam_min <= -PSD_TOL:
            raise InvalidStateError(f"not positive semidefinite (min eigenvalue {lam_min:.3g})")

    @classmethod
    def from_ket(cls, psi):
        psi = np.asarray(psi, dtype=complex).reshape(4)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.m, dtype=dtype)

    def __repr__(self):
        return f"DensityMatrix({np.array2string(self.m, precision=4)})"

    def allclose(self, other, atol=1e-10):
        return np.allclose(self.m, np.asarray(other), rtol=0, atol=atol)


def bell_density():
    return DensityMatrix.from_ket([1, 0, 0, 1])


def maximally_mixed():
    return DensityMatrix(np.eye(4) / 4)


def _rho(rho):
    return rho.m if isinstance(rho, DensityMatrix) else as_matrix(rho)


def spin_flip_eigenvalues(rho):
    """Eigenvalues of rho (Y x Y) rho* (Y x Y), real, clamped and sorted decreasing."""
    m = _rho(rho)
    r = matmul4(matmul4(m, YY), matmul4(conj4(m), YY))
    lam = eig4(r).real
    # rank-deficient states have zero eigenvalues that come back as ~1e-17
    # noise; under the square root that would cost 1e-8 in concurrence
    noise = 64 * np.finfo(float).eps * float(np.linalg.norm(r))
    lam[np.abs(lam) <= noise] = 0.0
    if np.any(lam < -CLAMP_TOL):
        raise InvalidStateError(
            f"spin-flipped product has a negative eigenvalue {lam.min():.3g}")
    lam = np.clip(lam, 0.0, None)
    return np.sort(lam)[::-1]


def concurrence(rho):
    """Wootters concurrence max(0, l1 - l2 - l3 - l4) with li the square roots
    of the spin-flipped product's eigenvalues."""
    s = np.sqrt(spin_flip_eigenvalues(rho))
    return float(max(0.0, s[0] - s[1] - s[2] - s[3]))


def x_state_concurrence(rho):
    """Closed-form concurrence for states supported on diagonal + anti-diagonal."""
    m = _rho(rho)
    p = m.real.diagonal()
    c1 = abs(m[0, 3]) - math.sqrt(max(p[1] * p[2], 0.0))
    c2 = abs(m[1, 2]) - math.sqrt(max(p[0] * p[3], 0.0))
    return 2 * max(0.0, c1, c2)


# -- CHSH -------------------------------------------------------------------

@dataclass(frozen=True)
class ChshSetting:
    """Linear polarizer angles (degrees), stored reduced to (-90, 90]."""

    theta1: float
    theta1p: float
    theta2: float
    theta2p: float

    def __post_init__(self):
        for name in ("theta1", "theta1p", "theta2", "theta2p"):
            object.__setattr__(self, name, reduce_angle(getattr(self, name)))

    def as_tuple(self):
        return (self.theta1, self.theta1p, self.theta2, self.theta2p)


def reduce_angle(theta):
    """Map an angle in degrees to (-90, 90]; polarizer axes are 180-degree periodic."""
    t = math.fmod(float(theta), 180.0)
    if t <= -90.0:
        t += 180.0
    elif t > 90.0:
        t -= 180.0
    return t


def _pol_vec(theta_deg):
    t = np.deg2rad(theta_deg)
    return np.stack([np.cos(t), np.sin(t)], axis=-1)


def coincidence_prob(rho, theta1, theta2):
    """<theta1 theta2| rho |theta1 theta2> for linear polarizers cos(t)|H> + sin(t)|V>."""
    m = _rho(rho)
    v = np.kron(_pol_vec(theta1), _pol_vec(theta2))
    p = complex(v @ m @ v)
    return min(1.0, max(0.0, p.real))


def _coincidence_grid(m, t1, t2):
    # probabilities for every pair in t1 x t2 (arrays of degrees)
    a = _pol_vec(np.asarray(t1, dtype=float))
    b = _pol_vec(np.asarray(t2, dtype=float))
    v = np.einsum("ia,jb->ijab", a, b).reshape(len(a), len(b), 4)
    return np.einsum("ijp,pq,ijq->ij", v, m, v).real


def _correlation_grid(m, t1, t2):
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    c = _coincidence_grid(m, t1, t2)
    cpp = _coincidence_grid(m, t1 + 90, t2 + 90)
    cp_ = _coincidence_grid(m, t1, t2 + 90)
    c_p = _coincidence_grid(m, t1 + 90, t2)
    num = c + cpp - cp_ - c_p
    den = c + cpp + cp_ + c_p
    if np.any(den <= 1e-12):
        raise DegenerateStateError("coincidence normalisation vanishes")
    return num / den


def correlation_E(rho, theta1, theta2):
    """Polarization correlation from the four orthogonal coincidence probabilities."""
    m = _rho(rho)
    c = coincidence_prob(m, theta1, theta2)
    cpp = coincidence_prob(m, theta1 + 90, theta2 + 90)
    cp_ = coincidence_prob(m, theta1, theta2 + 90)
    c_p = coincidence_prob(m, theta1 + 90, theta2)
    den = c + cpp + cp_ + c_p
    if den <= 1e-12:
        raise DegenerateStateError("coincidence normalisation vanishes")
    return (c + cpp - cp_ - c_p) / den


def chsh_S(rho, s):
    if not isinstance(s, ChshSetting):
        s = ChshSetting(*s)
    m = _rho(rho)
    return (correlation_E(m, s.theta1, s.theta2)
            + correlation_E(m, s.theta1, s.theta2p)
            + correlation_E(m, s.theta1p, s.theta2)
            - correlation_E(m, s.theta1p, s.theta2p))


def _s_from_angles(m, x):
    e = _correlation_grid(m, [x[0], x[1]], [x[2], x[3]])
    return e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1]


def maximize_chsh_linear(rho, coarse_step=5.0, resolution=0.01):
    """Maximise S over linear polarizer angles.

    A 5-degree grid over all four angles is searched exhaustively, then the
    best node is polished by coordinate descent with a halving step until the
    step drops below ``resolution``. Fully deterministic.
    """
    m = _rho(rho)
    half = np.arange(0.0, 90.0, coarse_step)
    # E(t + 90, .) = -E(t, .): only a quarter of the table needs evaluating
    e_half = _correlation_grid(m, half, half)
    e = np.block([[e_half, -e_half], [-e_half, e_half]])
    grid = np.concatenate([half, half + 90.0])
    s = (e[:, None, :, None] + e[:, None, None, :]
         + e[None, :, :, None] - e[None, :, None, :])
    idx = np.unravel_index(int(np.argmax(s)), s.shape)
    x = [grid[idx[0]], grid[idx[1]], grid[idx[2]], grid[idx[3]]]
    best = _s_from_angles(m, x)

    step = coarse_step / 2
    while step >= resolution:
        improved = True
        while improved:
            improved = False
            for k in range(4):
                for d in (step, -step):
                    trial = list(x)
                    trial[k] += d
                    val = _s_from_angles(m, trial)
                    if val > best + 1e-15:
                        best, x, improved = val, trial, True
        step /= 2
    return ChshSetting(*x), float(best)


def correlation_tensor(rho):
    m = _rho(rho)
    paulis = (SIGMA_X, SIGMA_Y, SIGMA_Z)
    return np.array([[trace4(matmul4(m, kron2(p, q))).real for q in paulis]
                     for p in paulis])


def horodecki_Smax(rho):
    """Analytic CHSH maximum over all projective measurements: 2 sqrt(u1 + u2)."""
    t = correlation_tensor(rho)
    u = np.sort(np.linalg.eigvalsh(t.T @ t))[::-1]
    return float(2 * math.sqrt(max(u[0] + u[1], 0.0)))


def local_unitary(ua, ub):
    return kron2(ua, ub)


def apply_unitary(rho, u):
    m = _rho(rho)
    u = as_matrix(u)
    return DensityMatrix(u @ m @ u.conj().T, check=False)


__all__ = [
    "DensityMatrix", "ChshSetting", "InvalidStateError", "DegenerateStateError",
    "bell_density", "maximally_mixed", "concurrence", "x_state_concurrence",
    "spin_flip_eigenvalues", "coincidence_prob", "correlation_E", "chsh_S",
    "maximize_chsh_linear", "horodecki_Smax", "correlation_tensor",
    "reduce_angle", "apply_unitary", "local_unitary", "I2", "TSIRELSON",
]

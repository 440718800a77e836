"""Simulated polarization tomography with shot noise and wave-plate jitter.

Counts are drawn from a PCG64 generator seeded per run; Monte-Carlo trials
use child seeds spawned from one ``numpy.random.SeedSequence`` so that
results do not depend on execution order.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .qmath import I2, SIGMA_X, SIGMA_Y, SIGMA_Z
from .states import DensityMatrix, concurrence, maximize_chsh_linear

POISSON_INVERSION_MAX = 30.0


class TomographyError(ValueError):
    pass


@dataclass(frozen=True)
class Projector:
    """Single-photon analyser state cos(t)|H> + exp(i phi) sin(t)|V>.

    ``circular`` selects phi = 90 degrees (right-circular for t = 45).
    """

    theta: float
    circular: bool = False

    def ket(self, jitter=0.0):
        t = math.radians(self.theta + jitter)
        phase = 1j if self.circular else 1.0
        return np.array([math.cos(t), phase * math.sin(t)], dtype=complex)


H_P = Projector(0.0)
V_P = Projector(90.0)
D_P = Projector(45.0)
R_P = Projector(45.0, circular=True)


@dataclass(frozen=True)
class ProjectionSet:
    settings: tuple

    def __post_init__(self):
        if len(self.settings) != 16:
            raise TomographyError("a projection set needs 16 settings")
        cond = np.linalg.cond(self.gram())
        if not np.isfinite(cond) or cond > 1e12:
            raise TomographyError(f"projection set is not informationally complete (cond={cond:.3g})")

    @classmethod
    def standard(cls):
        single = (H_P, V_P, D_P, R_P)
        return cls(tuple((a, b) for a in single for b in single))

    def projectors(self, jitters=None):
        out = []
        for i, (pa, pb) in enumerate(self.settings):
            ja, jb = (0.0, 0.0) if jitters is None else jitters[i]
            v = np.kron(pa.ket(ja), pb.ket(jb))
            out.append(np.outer(v, v.conj()))
        return out

    def gram(self):
        """Map from Pauli-basis coefficients of rho to projection probabilities."""
        paulis = (I2, SIGMA_X, SIGMA_Y, SIGMA_Z)
        basis = [np.kron(p, q) / 4 for p in paulis for q in paulis]
        return np.array([[np.trace(P @ b).real for b in basis] for P in self.projectors()])


@dataclass
class CountRecord:
    expected: np.ndarray
    counts: np.ndarray
    N: int
    seed: object
    jitter_deg: float = 0.0
    projected: bool = False


def _poisson(rng, mean):
    """Poisson variate: CDF inversion below 30, rounded normal approximation above."""
    if mean <= 0:
        return 0
    if mean < POISSON_INVERSION_MAX:
        u = rng.random()
        k = 0
        p = math.exp(-mean)
        cdf = p
        while u > cdf and k < 10_000:
            k += 1
            p *= mean / k
            cdf += p
        return k
    return max(0, int(round(mean + math.sqrt(mean) * rng.standard_normal())))


def simulate_counts(rho, ps, N, seed=0, angle_jitter_deg=0.0):
    """Coincidence counts for each of the 16 settings with N pairs per setting."""
    if N <= 0:
        raise TomographyError("N must be positive")
    if angle_jitter_deg < 0:
        raise TomographyError("angle jitter must be non-negative")
    m = rho.m if isinstance(rho, DensityMatrix) else np.asarray(rho)
    rng = np.random.Generator(np.random.PCG64(seed))
    jitters = None
    if angle_jitter_deg > 0:
        jitters = rng.normal(0.0, angle_jitter_deg, size=(16, 2))
    probs = np.array([np.trace(m @ P).real for P in ps.projectors(jitters)])
    expected = N * np.clip(probs, 0.0, None)
    counts = np.array([_poisson(rng, mu) for mu in expected], dtype=np.int64)
    return CountRecord(expected, counts, N, seed, angle_jitter_deg)


def linear_reconstruct(cr, ps, use_expected=False):
    """Linear inversion followed by trace normalisation and, if needed, PSD projection.

    Sets ``cr.projected`` when eigenvalue clipping was applied.
    """
    gram = ps.gram()
    if np.linalg.cond(gram) > 1e12:
        raise TomographyError("singular projection Gram matrix")
    data = np.asarray(cr.expected if use_expected else cr.counts, dtype=float)
    coeffs = np.linalg.solve(gram, data)
    paulis = (I2, SIGMA_X, SIGMA_Y, SIGMA_Z)
    basis = [np.kron(p, q) / 4 for p in paulis for q in paulis]
    rho = sum(c * b for c, b in zip(coeffs, basis))
    tr = np.trace(rho).real
    if tr <= 0:
        raise TomographyError("reconstructed trace is not positive")
    rho = rho / tr
    rho = (rho + rho.conj().T) / 2
    w, v = np.linalg.eigh(rho)
    cr.projected = False
    if w.min() < -1e-9:
        w = np.clip(w, 0.0, None)
        w /= w.sum()
        rho = (v * w) @ v.conj().T
        cr.projected = True
    elif w.min() < 0:
        # rounding-level negativity: clip without flagging
        w = np.clip(w, 0.0, None)
        w /= w.sum()
        rho = (v * w) @ v.conj().T
    return DensityMatrix(rho)


@dataclass
class McSummary:
    concurrence_mean: float
    concurrence_std: float
    s_mean: float
    s_std: float
    concurrences: np.ndarray = field(repr=False)
    s_values: np.ndarray = field(repr=False)

    def __iter__(self):
        return iter((self.concurrence_mean, self.concurrence_std, self.s_mean, self.s_std))


def _mean_std(x):
    x = np.asarray(x, dtype=float)
    if x.size == 0 or np.all(np.isnan(x)):
        return math.nan, math.nan
    # math.fsum keeps the aggregate independent of summation order
    mean = math.fsum(x) / x.size
    var = math.fsum((x - mean) ** 2) / (x.size - 1)
    return mean, math.sqrt(var)


def mc_error(rho, ps, N, trials, seed=0, angle_jitter_deg=0.0, with_chsh=True):
    """Monte-Carlo spread of reconstructed concurrence and CHSH S_max."""
    if trials < 2:
        raise TomographyError("trials must be at least 2 for a standard deviation")
    children = np.random.SeedSequence(seed).spawn(trials)
    cs, ss = [], []
    for child in children:
        cr = simulate_counts(rho, ps, N, child, angle_jitter_deg)
        rec = linear_reconstruct(cr, ps)
        cs.append(concurrence(rec))
        ss.append(maximize_chsh_linear(rec)[1] if with_chsh else math.nan)
    c_mean, c_std = _mean_std(cs)
    s_mean, s_std = _mean_std(ss)
    return McSummary(c_mean, c_std, s_mean, s_std, np.array(cs), np.array(ss))

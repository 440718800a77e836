"""Delay-tagged biphoton states and the polarization optics acting on them.

A state is a finite superposition of terms. Each term carries a complex
amplitude, the polarization (H/V) and path (I/II) of both photons, and the
birefringent delay accumulated by each photon. The frequency dependence is
implicit: a term stands for amp * exp(i*delay_a*w_a) * exp(i*delay_b*w_b).
Integrating over Gaussian spectra is then a closed-form operation (`reduce`).
"""

from dataclasses import dataclass, replace
import math
from typing import Sequence

import numpy as np

from .qmath import HADAMARD, SIGMA_X, as_matrix
from .states import DensityMatrix

C_LIGHT = 299_792_458.0

H, V = 0, 1
PATH_I, PATH_II = 0, 1
ARMS = ("a", "b")

PRUNE_TOL = 1e-15


class OpticsError(ValueError):
    pass


class PostSelectionError(OpticsError):
    """Every amplitude was discarded by post-selection."""


@dataclass(frozen=True)
class Spectrum:
    """Gaussian spectrum f(w) = 2/(sqrt(pi) sigma) * exp(-4 (w - omega0)^2 / sigma^2).

    ``omega0`` and ``sigma`` are angular frequencies in rad/s; ``sigma`` is
    the full 1/e width of f.
    """

    omega0: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and self.omega0 > 0):
            raise ValueError("Spectrum needs omega0 > 0 and sigma > 0")

    def density(self, omega):
        x = (np.asarray(omega) - self.omega0) / self.sigma
        return 2.0 / (math.sqrt(math.pi) * self.sigma) * np.exp(-4.0 * x * x)


@dataclass(frozen=True)
class Term:
    amp: complex
    pol_a: int
    pol_b: int
    path_a: int = PATH_I
    path_b: int = PATH_I
    delay_a: float = 0.0
    delay_b: float = 0.0

    def pol(self, arm):
        return self.pol_a if arm == "a" else self.pol_b

    def path(self, arm):
        return self.path_a if arm == "a" else self.path_b

    def key(self):
        # delays compared to 12 significant digits so that rounding in sums of
        # plate delays does not split a physically single term
        return (self.pol_a, self.pol_b, self.path_a, self.path_b,
                float(f"{self.delay_a:.12e}"), float(f"{self.delay_b:.12e}"))


def _with(term, arm, **kw):
    mapped = {f"{k}_{arm}": v for k, v in kw.items()}
    return replace(term, **mapped)


class BiphotonState:
    """Immutable, canonically ordered collection of terms (one per key)."""

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        merged = {}
        for t in terms:
            k = t.key()
            if k in merged:
                merged[k] = replace(merged[k], amp=merged[k].amp + t.amp)
            else:
                merged[k] = t
        kept = [merged[k] for k in sorted(merged) if abs(merged[k].amp) >= PRUNE_TOL]
        object.__setattr__(self, "terms", tuple(kept))

    def __setattr__(self, name, value):
        raise AttributeError("BiphotonState is immutable")

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"BiphotonState({list(self.terms)!r})"

    def isclose(self, other, atol=1e-12):
        """Equality of term structure with amplitudes compared to ``atol``."""
        mine = {t.key(): t.amp for t in self.terms}
        theirs = {t.key(): t.amp for t in other.terms}
        for k in set(mine) | set(theirs):
            if abs(mine.get(k, 0j) - theirs.get(k, 0j)) > atol:
                return False
        return True

    def norm2(self, sp_a=None, sp_b=None):
        """Squared norm after frequency integration (trace of the unnormalised reduction)."""
        if sp_a is None or sp_b is None:
            # delays treated as orthogonal labels; also preserved by unitaries
            return float(sum(abs(t.amp) ** 2 for t in self.terms))
        return float(_reduce_unnormalised(self, sp_a, sp_b).trace().real)


def bell_state():
    """(|HH> + |VV>)/sqrt(2), both photons in path I with no delay."""
    r = 1 / math.sqrt(2)
    return BiphotonState([Term(r, H, H), Term(r, V, V)])


def product_state(pol_a, pol_b):
    return BiphotonState([Term(1.0 + 0j, pol_a, pol_b)])


def _check_arm(arm):
    if arm not in ARMS:
        raise OpticsError(f"arm must be 'a' or 'b', got {arm!r}")


def quartz_delay(L, delta_n, lambda0):
    """Group delay between the V and H rays for a plate of thickness L (units of lambda0)."""
    return L * lambda0 * delta_n / C_LIGHT


def apply_quartz(s, arm, L, delta_n, lambda0=800e-9):
    """Horizontal-axis birefringent plate: V components of ``arm`` acquire delay L*lambda0*dn/c."""
    _check_arm(arm)
    if L < 0:
        raise OpticsError("plate thickness must be non-negative")
    if not 0 < delta_n < 1:
        raise OpticsError("birefringence must lie in (0, 1)")
    if L == 0:
        return s
    d = quartz_delay(L, delta_n, lambda0)
    out = []
    for t in s:
        if t.pol(arm) == V:
            t = _with(t, arm, delay=(t.delay_a if arm == "a" else t.delay_b) + d)
        out.append(t)
    return BiphotonState(out)


def apply_delay(s, arm, delay):
    """Same as a quartz plate but parameterised directly by the delay in seconds."""
    _check_arm(arm)
    out = []
    for t in s:
        if t.pol(arm) == V:
            t = _with(t, arm, delay=(t.delay_a if arm == "a" else t.delay_b) + delay)
        out.append(t)
    return BiphotonState(out)


def apply_jones(s, arm, j):
    """Act with a 2x2 polarization map on ``arm``. The map need not be unitary."""
    _check_arm(arm)
    j = as_matrix(j, 2)
    out = []
    for t in s:
        p = t.pol(arm)
        for q in (H, V):
            coeff = j[q, p]
            if coeff != 0:
                out.append(_with(replace(t, amp=t.amp * coeff), arm, pol=q))
    return BiphotonState(out)


def apply_bd_split(s, arm):
    """First beam displacer: H stays in path I, V is displaced into path II."""
    _check_arm(arm)
    out = []
    for t in s:
        if t.path(arm) != PATH_I:
            raise OpticsError(f"arm {arm} is already split; nested splits are unsupported")
        out.append(_with(t, arm, path=PATH_II if t.pol(arm) == V else PATH_I))
    return BiphotonState(out)


def apply_bd_merge(s, arm):
    """Second beam displacer (same orientation as the first) with post-selection.

    It displaces V once more, so V from path I and H from path II meet in
    the output mode; (H, I) and (V, II) leave through dark ports and are
    discarded.
    """
    _check_arm(arm)
    out = []
    for t in s:
        pol, path = t.pol(arm), t.path(arm)
        if (pol == V and path == PATH_I) or (pol == H and path == PATH_II):
            out.append(_with(t, arm, path=PATH_I))
    return BiphotonState(out)


def hwp_jones(angle_deg):
    """Half-wave plate with its fast axis at ``angle_deg`` from horizontal."""
    t = math.radians(2 * angle_deg)
    return np.array([[math.cos(t), math.sin(t)], [math.sin(t), -math.cos(t)]], dtype=complex)


# |H> -> |+>, |V> -> -|->
HWP2_MAP = np.array([[1, -1], [1, 1]], dtype=complex) / math.sqrt(2)
BIT_FLIP = SIGMA_X.copy()


# -- elements ---------------------------------------------------------------

@dataclass(frozen=True)
class QuartzPlate:
    arm: str
    L: float
    delta_n: float
    lambda0: float = 800e-9

    def __post_init__(self):
        if self.L < 0:
            raise OpticsError("plate thickness must be non-negative")
        if not 0 < self.delta_n < 1:
            raise OpticsError("birefringence must lie in (0, 1)")

    def apply(self, s):
        return apply_quartz(s, self.arm, self.L, self.delta_n, self.lambda0)


@dataclass(frozen=True)
class HalfWavePlate:
    arm: str
    angle_deg: float

    def apply(self, s):
        return apply_jones(s, self.arm, hwp_jones(self.angle_deg))


@dataclass(frozen=True, eq=False)
class MapPlate:
    arm: str
    matrix: np.ndarray
    name: str = ""

    def apply(self, s):
        return apply_jones(s, self.arm, self.matrix)


@dataclass(frozen=True)
class BeamDisplacerSplit:
    arm: str

    def apply(self, s):
        return apply_bd_split(s, self.arm)


@dataclass(frozen=True)
class BeamDisplacerMerge:
    arm: str

    def apply(self, s):
        return apply_bd_merge(s, self.arm)


def propagate(s, elements: Sequence):
    for el in elements:
        s = el.apply(s)
    return s


def hadamard_plate(arm):
    return MapPlate(arm, HADAMARD, "hadamard")


def measurement_apparatus(arm, L2, delta_n, lambda0=800e-9, hwp2=None):
    """BD1, HWP1 (Hadamard), second plate, HWP2, BD2, HWP3 (bit flip) on ``arm``."""
    return [
        BeamDisplacerSplit(arm),
        HalfWavePlate(arm, 22.5),
        QuartzPlate(arm, L2, delta_n, lambda0),
        MapPlate(arm, HWP2_MAP if hwp2 is None else hwp2, "hwp2"),
        BeamDisplacerMerge(arm),
        MapPlate(arm, BIT_FLIP, "hwp3"),
    ]


# -- frequency integration --------------------------------------------------

def gaussian_characteristic(delta_alpha, sp):
    """Integral of f(w) exp(i*delta_alpha*w) for the Gaussian spectrum ``sp``.

    Equals exp(-delta_alpha^2 sigma^2 / 16) * exp(i delta_alpha omega0).
    """
    mag = math.exp(-(delta_alpha * sp.sigma) ** 2 / 16.0)
    return mag * complex(math.cos(delta_alpha * sp.omega0), math.sin(delta_alpha * sp.omega0))


def _index(t):
    return 2 * t.pol_a + t.pol_b


def _reduce_unnormalised(s, sp_a, sp_b, characteristic=None):
    # look up the module attribute at call time so a patched characteristic
    # function propagates into every reduction
    k = characteristic or globals()["gaussian_characteristic"]
    rho = np.zeros((4, 4), dtype=complex)
    terms = list(s)
    for t in terms:
        if t.path_a != PATH_I or t.path_b != PATH_I:
            raise OpticsError("state still has a split arm; merge before reducing")
    cache_a, cache_b = {}, {}
    for m in terms:
        for n in terms:
            da = m.delay_a - n.delay_a
            db = m.delay_b - n.delay_b
            if da not in cache_a:
                cache_a[da] = k(da, sp_a)
            if db not in cache_b:
                cache_b[db] = k(db, sp_b)
            rho[_index(m), _index(n)] += m.amp * n.amp.conjugate() * cache_a[da] * cache_b[db]
    return rho


def reduce(s, sp_a, sp_b):
    """Integrate over both photon spectra separately.

    Returns the normalised DensityMatrix and the success probability (the
    trace before normalisation).
    """
    rho = _reduce_unnormalised(s, sp_a, sp_b)
    tr = float(np.trace(rho).real)
    if tr < 1e-14:
        raise PostSelectionError("post-selection removed the whole state")
    rho = rho / tr
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho), min(tr, 1.0)

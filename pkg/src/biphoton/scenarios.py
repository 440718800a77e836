"""The four dephasing / recovery configurations and their L2 sweeps.

Plate lengths (``L_a``, ``L_1``, ``L_2``) are birefringent retardances in
units of the centre wavelength, i.e. dn * thickness / lambda0. A plate of
retardance L therefore delays V relative to H by L * lambda0 / c, and at
integer L the carrier phase omega0 * delay is a multiple of 2 pi. The
physical thickness is L * lambda0 / dn (``plate_thickness_m``).
"""

from dataclasses import dataclass, field, asdict, replace
import enum
import io
import logging
import math
from typing import NamedTuple, Optional

import numpy as np

from . import optics
from .optics import (C_LIGHT, QuartzPlate, Spectrum, bell_state,
                     hadamard_plate, measurement_apparatus, propagate)
from .states import DensityMatrix, concurrence, maximize_chsh_linear

log = logging.getLogger(__name__)


class SigmaConvention(str, enum.Enum):
    FWHM_OF_F = "fwhm_of_f"
    FWHM_OF_INTENSITY = "fwhm_of_intensity"
    DIRECT_SIGMA = "direct_sigma"


@dataclass(frozen=True)
class ExperimentConfig:
    lambda0: float = 800e-9
    delta_n: float = 0.01
    bandwidth_nm: float = 3.0
    sigma_convention: SigmaConvention = SigmaConvention.DIRECT_SIGMA
    sigma: Optional[float] = None
    L_a: float = 0.0
    L_1: float = 0.0
    L_2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "sigma_convention", SigmaConvention(self.sigma_convention))
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")
        if not 0 < self.delta_n < 1:
            raise ValueError("delta_n must lie in (0, 1)")
        if not self.bandwidth_nm > 0:
            raise ValueError("bandwidth_nm must be positive")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("sigma must be positive")
        for name in ("L_a", "L_1", "L_2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def with_lengths(self, **kw):
        return replace(self, **kw)

    def snapshot(self):
        d = asdict(self)
        d["sigma_convention"] = self.sigma_convention.value
        return d


def make_spectrum(cfg):
    """Gaussian spectrum from the filter bandwidth.

    direct_sigma: sigma is the bandwidth itself, converted to angular
        frequency (or ``cfg.sigma`` verbatim when given).
    fwhm_of_f: the bandwidth is the FWHM of f, sigma = dw / sqrt(ln 2).
    fwhm_of_intensity: the bandwidth is the FWHM of f**2,
        sigma = dw * sqrt(2 / ln 2).
    """
    omega0 = 2 * math.pi * C_LIGHT / cfg.lambda0
    dw = 2 * math.pi * C_LIGHT * cfg.bandwidth_nm * 1e-9 / cfg.lambda0 ** 2
    conv = cfg.sigma_convention
    if conv is SigmaConvention.DIRECT_SIGMA:
        sigma = cfg.sigma if cfg.sigma is not None else dw
    elif conv is SigmaConvention.FWHM_OF_F:
        sigma = dw / math.sqrt(math.log(2))
    else:
        sigma = dw * math.sqrt(2 / math.log(2))
    return Spectrum(omega0, sigma)


def alpha(cfg, L):
    """V-H delay (s) of a plate with retardance L (units of lambda0)."""
    return L * cfg.lambda0 / C_LIGHT


def plate_thickness_lambda0(cfg, L):
    return L / cfg.delta_n


def plate_thickness_m(cfg, L):
    return L * cfg.lambda0 / cfg.delta_n


def quartz(cfg, arm, L):
    return QuartzPlate(arm, plate_thickness_lambda0(cfg, L), cfg.delta_n, cfg.lambda0)


def k_of(cfg, L, sp=None):
    sp = sp or make_spectrum(cfg)
    return optics.gaussian_characteristic(alpha(cfg, L), sp)


# -- pipelines --------------------------------------------------------------

def pipeline_a(cfg, L):
    return [quartz(cfg, "b", L)]


def pipeline_recovery(cfg, L1, L2):
    return ([quartz(cfg, "b", L1)]
            + measurement_apparatus("b", plate_thickness_lambda0(cfg, L2),
                                    cfg.delta_n, cfg.lambda0))


def pipeline_partial(cfg, La):
    return [hadamard_plate("a"), quartz(cfg, "a", La)]


def pipeline_esd(cfg, La, L1, L2):
    return pipeline_partial(cfg, La) + pipeline_recovery(cfg, L1, L2)


def build_state(elements, initial=None):
    return propagate(initial if initial is not None else bell_state(), elements)


def _reduce(cfg, s):
    sp = make_spectrum(cfg)
    return optics.reduce(s, sp, sp)


class PointA(NamedTuple):
    rho: DensityMatrix
    concurrence: float


class PointRecovery(NamedTuple):
    rho: DensityMatrix
    concurrence: float
    success_prob: float


class PointEsd(NamedTuple):
    rho: DensityMatrix
    concurrence: float
    success_prob: float
    printed_concurrence: float


def scenario_a(cfg, L):
    """Bell pair, plate of retardance L on photon b, no measurement apparatus."""
    if L < 0:
        raise ValueError("L must be non-negative")
    rho, _ = _reduce(cfg, build_state(pipeline_a(cfg, L)))
    return PointA(rho, concurrence(rho))


def kprime_closed_form(cfg, L1, L2):
    """Coherence of the post-selected state after the measurement apparatus.

    [2 k(a1) + k(a1 + a2) + k(a1 - a2)] / [2 + 2 Re k(a2)]
    """
    sp = make_spectrum(cfg)
    a1, a2 = alpha(cfg, L1), alpha(cfg, L2)
    k = optics.gaussian_characteristic
    num = 2 * k(a1, sp) + k(a1 + a2, sp) + k(a1 - a2, sp)
    return num / (2 + 2 * k(a2, sp).real)


def success_probability(cfg, L2):
    sp = make_spectrum(cfg)
    return (2 + 2 * optics.gaussian_characteristic(alpha(cfg, L2), sp).real) / 4


def scenario_recovery(cfg, L1, L2):
    if L1 < 0 or L2 < 0:
        raise ValueError("thicknesses must be non-negative")
    rho, p = _reduce(cfg, build_state(pipeline_recovery(cfg, L1, L2)))
    return PointRecovery(rho, concurrence(rho), p)


def partial_input(cfg, La):
    """Hadamard then a dephasing plate on photon a; concurrence |k_a|."""
    if La < 0:
        raise ValueError("L_a must be non-negative")
    rho, _ = _reduce(cfg, build_state(pipeline_partial(cfg, La)))
    return rho


def rho0_matrix(ka):
    """Partially entangled input written out from its coherence k_a."""
    kc = np.conj(ka)
    return np.array([[1, 1, kc, -kc],
                     [1, 1, kc, -kc],
                     [ka, ka, 1, -1],
                     [-ka, -ka, -1, 1]], dtype=complex) / 4


def rho3_matrix(ka, kb):
    """Final state of the partial-input recovery experiment from k_a and k_b'."""
    ac, bc = np.conj(ka), np.conj(kb)
    return np.array([[1, bc, ac, -ac * bc],
                     [kb, 1, ac * kb, -ac],
                     [ka, ka * bc, 1, -bc],
                     [-ka * kb, -ka, -kb, 1]], dtype=complex) / 4


def printed_esd_concurrence(ka, kb):
    """max{0, (k_a + k_b' + k_a k_b' - 1)/2}, evaluated on the moduli."""
    a, b = abs(ka), abs(kb)
    return max(0.0, (a + b + a * b - 1) / 2)


def scenario_esd(cfg, La, L1, L2):
    if min(La, L1, L2) < 0:
        raise ValueError("thicknesses must be non-negative")
    rho, p = _reduce(cfg, build_state(pipeline_esd(cfg, La, L1, L2)))
    printed = printed_esd_concurrence(k_of(cfg, La), kprime_closed_form(cfg, L1, L2))
    return PointEsd(rho, concurrence(rho), p, printed)


# -- sweeps -----------------------------------------------------------------

SCENARIOS = ("a", "recovery", "esd")


@dataclass
class SweepRow:
    L2: float
    concurrence: float
    success_prob: float
    S_max: Optional[float] = None
    error: Optional[str] = None


@dataclass
class SweepResult:
    scenario: str
    config: dict
    with_chsh: bool
    rows: list = field(default_factory=list)

    def column(self, name):
        return np.array([getattr(r, name) if getattr(r, name) is not None else np.nan
                         for r in self.rows], dtype=float)

    def to_csv(self):
        buf = io.StringIO()
        header = "L2_lambda0,concurrence,success_prob"
        if self.with_chsh:
            header += ",S_max"
        buf.write(header + "\n")
        for r in self.rows:
            vals = [r.L2, r.concurrence, r.success_prob]
            if self.with_chsh:
                vals.append(r.S_max if r.S_max is not None else math.nan)
            buf.write(",".join(format_number(v) for v in vals) + "\n")
        return buf.getvalue()


def format_number(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def sample_range(start, stop, step):
    """Inclusive arithmetic grid start, start+step, ..., <= stop. Empty if stop < start."""
    if not step > 0:
        raise ValueError("step must be positive")
    if stop < start:
        return []
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(n)]


def evaluate(cfg, scenario, L2):
    """(rho, concurrence, success_prob) for one sweep sample."""
    if scenario == "a":
        rho, c = scenario_a(cfg, L2)
        return rho, c, 1.0
    if scenario == "recovery":
        return tuple(scenario_recovery(cfg, cfg.L_1, L2))
    if scenario == "esd":
        return tuple(scenario_esd(cfg, cfg.L_a, cfg.L_1, L2))[:3]
    raise ValueError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")


def sweep(cfg, scenario, start, stop, step=1.0, with_chsh=False):
    """Evaluate ``scenario`` on an inclusive L2 grid.

    For scenario "a" the swept value is the single plate's retardance.
    Failing rows are kept with NaN values and the error message attached.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    result = SweepResult(scenario, cfg.snapshot(), with_chsh)
    for L2 in sample_range(start, stop, step):
        try:
            rho, c, p = evaluate(cfg, scenario, L2)
            s_max = maximize_chsh_linear(rho)[1] if with_chsh else None
            result.rows.append(SweepRow(L2, c, p, s_max))
        except Exception as exc:  # row-level failure must not abort the sweep
            log.warning("row L2=%s failed: %s", L2, exc)
            result.rows.append(SweepRow(L2, math.nan, math.nan,
                                        math.nan if with_chsh else None, str(exc)))
    return result

"""Simulation of measurement-induced entanglement recovery for polarization-entangled photon pairs."""

from .optics import (BiphotonState, Spectrum, Term, apply_bd_merge, apply_bd_split,
                     apply_jones, apply_quartz, bell_state, gaussian_characteristic,
                     propagate, reduce)
from .scenarios import (ExperimentConfig, SigmaConvention, SweepResult, kprime_closed_form,
                        make_spectrum, partial_input, scenario_a, scenario_esd,
                        scenario_recovery, sweep)
from .states import (ChshSetting, DensityMatrix, chsh_S, coincidence_prob, concurrence,
                     correlation_E, horodecki_Smax, maximize_chsh_linear)

__version__ = "0.1.0"

"""OAM spectra of SPDC photon pairs and path-identity state engineering."""
from .lg_basis import LGModeSpec, TransverseMomentum, eval_lg, t_coeff
from .oam_state import (DegenerateStateError, OamAmplitudeTable, TargetState, apply_phase, fidelity,
                        probability, shift_oam, subspace_fidelity, superpose)
from .spdc_kernel import (AmplitudeRequest, CrystalConfig, OracleGrid, QuadratureError,
                          QuadratureSettings, WaistConfig, amplitude, anti_diagonal, kernel_g,
                          oracle_amplitude)
from .setup_compiler import (CoherenceGeometry, CrystalPaths, CrystalStage, PhaseStage, PumpSpec,
                             SetupPlan, ShiftStage, check_coherence, compile_plan, crystal_state,
                             pump_equivalent)
from .analysis import (ScanGrid, fidelity_bound, optimize_waists, ququart_separability_check, rmn,
                       waist_scan)

__version__ = "0.1.0"

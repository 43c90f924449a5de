"""Hong-Ou-Mandel interference of polarization-OAM hyper-entangled photon pairs."""
from .bell import (
    HYPER_LABELS,
    HyperLabel,
    OamBell,
    PolBell,
    classify_exchange,
    hyper_state,
    oam_bell,
    parity_rule,
    polarization_bell,
)
from .hom import (
    ScanConfig,
    SpectralModel,
    coincidence_probability,
    full_fock_oracle,
    phase_protocol_scan,
    simulate_hom_scan,
)
from .analysis import fit_hom, fit_phase, visibility
from .states import SinglePhotonState, TwoPhotonState

__version__ = "0.1.0"

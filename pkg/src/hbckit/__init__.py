"""Capacitive human-body-communication channel toolkit.

Simulates lumped bio-physical HBC channels over frequency, fits the model's
coupling capacitances from measurement series, estimates received square-wave
amplitudes from sub-Nyquist samples, and de-embeds the wearable receive chain.
"""

from .circuit import (
    CAPACITOR,
    GROUND,
    RESISTOR,
    VSOURCE,
    CircuitError,
    Element,
    FrequencyResponse,
    Netlist,
    NetlistError,
    SingularSystemError,
    capacitor,
    kcl_residual,
    resistor,
    solve_ac,
    sweep,
    transfer,
    vsource,
)
from .deembed import ReceiveChain, chain_response, embed, flat_gain, highpass
from .estimation import (
    FitResult,
    ReturnCapMeasurement,
    TimeConstantMeasurement,
    extract_time_constant,
    fit_body_ground_capacitance,
    fit_return_capacitance,
)
from .model import (
    ChannelConfig,
    LoadPreset,
    ModelParameters,
    build_channel,
    channel_loss,
    highpass_cutoff,
    load_preset,
    log_grid,
    parallel_plate_capacitance,
    preset_config,
)
from .sampling import (
    AmplitudeEstimate,
    SampleTrace,
    SquareWave,
    estimate_amplitude,
    sample_signal,
    synthesize_square,
)

__version__ = "0.1.0"

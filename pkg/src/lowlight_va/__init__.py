"""Joint encoding-quality / enhancement-scale selection for edge low-light video analytics."""

from .cost_model import (
    LatencyBreakdown,
    SimulationConfig,
    enhancement_delay,
    total_latency,
    transmission_delay,
    utility,
)
from .errors import (
    ConfigurationError,
    DomainError,
    LowlightError,
    ParameterError,
    ProfileParseError,
    ProfileValidationError,
    ValidationError,
)
from .optimizer import AnnealerParams, SelectionOutcome, brute_force_select, sa_select
from .policies import ON_DEVICE_QUALITY, OnDeviceParams, PolicyKind, PolicyName, select
from .profile import (
    Configuration,
    EnhancementLadder,
    QualityLadder,
    SyntheticProfileParams,
    SystemProfile,
    generate_synthetic_profile,
    load_profile,
    save_profile,
)
from .simulator import (
    BandwidthTrace,
    RunSummary,
    SegmentResult,
    load_trace,
    run_simulation,
    sweep_bandwidth,
)

__version__ = "0.1.0"

"""Trial-and-error number partitioning: exhaustive and agent runners,
pluggable dynamic search strategies, and resource metrology."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    AgentConfig,
    DimensionError,
    DomainError,
    EnumerationCursor,
    Instance,
    OracleSizeError,
    OutcomeKind,
    PartitionVector,
    ResourceMeter,
    RunOutcome,
    TrialFeedback,
    flip_delta,
    oracle_par,
    run_agent,
    run_exhaustive,
    signed_sum,
    trial,
)
from .instances import (  # noqa: E402
    GeneratorKind,
    GeneratorParams,
    InstanceSet,
    gen_planted,
    gen_uniform,
    worked_example,
    read_instances,
    write_instances,
)
from .metrics import (  # noqa: E402
    ExhaustiveReference,
    VerdictKind,
    classify_outcome,
    combined_resource,
    conjecture_sweep,
    intelligence_q,
    unparticularized_resource,
)
from .strategies import (  # noqa: E402
    NoCertificate,
    certificates_precheck,
    differencing_seed,
)

"""Analytical model and discrete-event simulator of execute-order-validate blockchain pipelines."""

from .comm import LinkParams, MessageLoad, link_latency, round_trip_latency
from .errors import (
    DegenerateLoad,
    EmptyTrace,
    FanoutNotSupported,
    InsufficientSamples,
    ParseError,
    ScenarioError,
    UnstableQueue,
    ValidationError,
    ZeroMean,
)
from .phases import (
    DiskParams,
    ExecuteParams,
    LatencyBreakdown,
    OrderParams,
    ValidateParams,
    pipeline_predict,
)
from .queueing import QueueLoad, VariationPair, erlang_c_wait, kingman_wait, mdc_wait, utilization
from .scenario import ScenarioConfig, Workload, load_scenario, parse_scenario, write_scenario

__version__ = "0.1.0"

from .channel import Channel, communication_delay
from .pipeline import Block, SimConfig, SimResult, Trace, TxRecord, run_simulation
from .workload import generate_workload

__all__ = [
    "Block",
    "Channel",
    "SimConfig",
    "SimResult",
    "Trace",
    "TxRecord",
    "communication_delay",
    "generate_workload",
    "run_simulation",
]

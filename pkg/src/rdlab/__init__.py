"""rdlab: a DRAM read-disturbance laboratory.

Cycle-level, trace-driven memory-system simulation with pluggable
read-disturbance mitigation mechanisms, an analytic security/DoS engine,
and an independent safety oracle.
"""

from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]

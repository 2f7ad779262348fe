"""gatehub: a self-contained science-gateway engine.

Compose component-based workflows, expand parameter sweeps into job sets,
and execute them through a queue-aware scheduler on local processes or a
simulated multi-cluster infrastructure.
"""

__version__ = "0.1.0"

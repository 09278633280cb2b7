"""qnoise: quantum-induced stochastic dynamics of semiclassical probes.

Subpackages by pipeline stage: params (records and derived constants),
kernels (analytic noise correlators), sampler (covariance discretization and
path sampling), dynamics (Langevin integration and variance closed forms),
scenarios (experiment runners), config/cli (front end).
"""

__version__ = "0.1.0"

from . import config, dynamics, errors, kernels, oracles, params, sampler, scenarios

__all__ = ["config", "dynamics", "errors", "kernels", "oracles", "params",
           "sampler", "scenarios", "__version__"]

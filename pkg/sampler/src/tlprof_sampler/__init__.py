"""Loss-landscape sampling companion to the tlprof profiler.

Computes top Hessian eigen-directions of a small model, samples the loss on
a centered grid in that subspace, and writes TLPF/CSV fields the profiler
consumes.  The two packages communicate only through those file formats.
"""

from .directions import (SubspaceDirections, layerwise_normalize, make_hvp,
                         top_hessian_eigenvectors)
from .pinn import (ConvectionProblem, PinnNet, pinn_convection_loss,
                   relative_l2_error, train_toy_pinn)
from .sampling import (DEFAULT_SCALE, lattice, sample_loss_grid, write_csv,
                       write_tlpf)

__version__ = "0.1.0"

__all__ = [
    "SubspaceDirections", "layerwise_normalize", "make_hvp",
    "top_hessian_eigenvectors", "ConvectionProblem", "PinnNet",
    "pinn_convection_loss", "relative_l2_error", "train_toy_pinn",
    "DEFAULT_SCALE", "lattice", "sample_loss_grid", "write_csv", "write_tlpf",
]

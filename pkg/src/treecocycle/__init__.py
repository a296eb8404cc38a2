"""Harmonic analysis on the (q+1)-regular tree."""
from .tree import RegularTree, BallAutomorphism, OrientedEdge, ROOT, format_vertex, parse_vertex
from .edgespace import (EdgeFunction, VertexFunction, chi, divergence, gradient, inner_edge,
                        inner_vertex, integrate, laplacian)
from .green import (ProjectionResult, grad_green_delta, green_value, neumann_partial,
                    p_norm_bound, project, q_chi_norm_sq)
from .cocycle import (GrowthBound, RadialProfile, VirtualPotential, coboundary_difference,
                      growth_bound_check, haagerup, optimal_profile, projected_cocycle,
                      recurrence_residual, virtual_potentials)
from .kernels import (CndReport, GNSEmbedding, KernelMatrix, cnd_check, gns_embed,
                      invariance_defect, pure_unbounded_psi, valette_kernel)

__version__ = "0.1.0"

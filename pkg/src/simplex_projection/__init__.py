"""Lossless projection of compositional data onto simplex facets."""

from .density import (
    DensityGrid,
    DirichletParams,
    SimplexDensity,
    dirichlet_density,
    dirichlet_marginal,
    dirichlet_pdf,
    grid_integral,
    interpolate,
    marginalize,
    recursive_marginalize,
    subdivision_nodes,
)
from .geometry import (
    BarycentricPoint,
    CartesianPoint2D,
    FacetProjection,
    embed_regular_simplex,
    is_compatible,
    perspective_project,
    ratio,
    renormalize,
    validate,
)
from .matching import MatchAssignment, UnlabeledFacetSets, candidate_ratio_sets, match, project_set, reconstruct_set
from .projection import (
    ProjectionBundle,
    RatioCycle,
    extract_cycle,
    project_all,
    reconstruct,
    reconstruct_from_two,
    validate_image,
)
from .render import FigureSpec, Style, layout_net, render

__version__ = "0.1.0"

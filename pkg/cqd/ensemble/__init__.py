"""
Co-quantum ensembles: angular distributions, seeded Monte Carlo sampling and
pre-averaging density operators.
"""

from .distributions import (
    AngularDistribution,
    heart_pdf,
    heart_inverted_pdf,
    isotropic,
    heart,
    heart_inverted,
    custom_distribution,
    by_name,
    slit_reshape,
)
from .sampling import (
    CHUNK_SIZE,
    StreamLayout,
    make_generator,
    sample,
    chunked_sum,
    flip_probability,
    flip_probability_mc,
    mean_theta_mc,
)
from .density import (
    DensityMatrix2,
    density_operator,
    mixed_density,
    mixed_density_mc,
    wavefunction,
    cross_term_mc,
)

__all__ = [
    "AngularDistribution",
    "heart_pdf",
    "heart_inverted_pdf",
    "isotropic",
    "heart",
    "heart_inverted",
    "custom_distribution",
    "by_name",
    "slit_reshape",
    "CHUNK_SIZE",
    "StreamLayout",
    "make_generator",
    "sample",
    "chunked_sum",
    "flip_probability",
    "flip_probability_mc",
    "mean_theta_mc",
    "DensityMatrix2",
    "density_operator",
    "mixed_density",
    "mixed_density_mc",
    "wavefunction",
    "cross_term_mc",
]

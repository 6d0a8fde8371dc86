"""semispec: desk-scale certification of semiclassical spectral estimates.

Subpackages cover potential classes and their membership certificates,
Airy/auxiliary special functions with certified quadrature, turning-point
(Liouville-Green) frames, one-dimensional Schrodinger eigensolvers with
per-eigenpair diagnostics, Bohr-Sommerfeld counting, and the Grushin
spectral layer (multi-index inversion, transition-point gaps, Plancherel
density, quasi-distance geometry).
"""

from semispec.special import (
    AiryValue,
    AuxValue,
    IntegrationError,
    airy_eval,
    airy_root_c,
    auxiliary_eval,
    integrate,
)
from semispec.potentials import (
    ClassReport,
    Potential,
    PotentialSpec,
    check_membership,
    make_potential,
    rescale,
)

__version__ = "0.1.0"

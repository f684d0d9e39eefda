"""selmerlab: exact 2-descent statistics for quadratic twist families.

Library layout:

* arith     square classes, Kronecker/Hilbert symbols, local classes, sieves
* lattices  involution lattices and their indecomposable multiplicities
* curve     curves y^2 = (x-a1)(x-a2)(x-a3), Kummer maps, local images
* selmer    2-Selmer groups by three routes, systematic subspace, parity
* family    Frobenian twist families, censuses, asymptotic probes
* isotropy  F2 combinatorics of the doubled torsion space, W-sums
* dist      exact limiting distributions and identities
* randmat   alternating p-adic random matrices and kernel statistics
* pell      negative Pell solubility and the unit obstruction group
* cli       command-line front end over all of the above
"""

__version__ = "0.1.0"

from .arith import (
    REAL,
    TWO,
    LocalClass,
    Place,
    SigmaSet,
    SquareClass,
    hilbert,
    hilbert_product_check,
    kronecker,
    localize,
    odd_place,
    sq_group,
    square_class,
    squarefree_sieve,
)
from .curve import (
    Curve2T,
    DescentClass,
    GammaElement,
    LocalDescentClass,
    LocalSubspace,
    check_condition_gamma,
    check_no_cyclic_4_isogeny_proxy,
    check_strict_two_structure,
    descent_class,
    gamma_at,
    kummer_image_of_point,
    local_image,
    local_tate_pairing,
    twisted_torsion_image,
)
from .selmer import (
    BClass,
    SelmerGroup,
    find_condition_E_witness,
    parity_kappa,
    selmer_count_formula,
    selmer_direct,
    selmer_kernel,
    systematic_subspace,
)
from .family import FamilySpec, census, family_spec, is_member, sieve_family
from .isotropy import (
    F2Space,
    IsoSubspace,
    enumerate_max_isotropic,
    main_term_identity_check,
    q_form,
    torsion_space,
    unlinked_classification_check,
    y_sum,
)
from .dist import alpha, beta, gauss_binom, hom_moment_identity, pell_constants
from .lattices import InvolutionLattice, classify_extension, decompose, norm_index
from .pell import pell_selmer, pell_soluble, stevenhagen_census
from .randmat import (
    PadicAltMatrix,
    gamma_n_empirical,
    gamma_n_exact,
    kernel_dim_distribution,
    kernel_report,
    line_equidistribution_test,
    make_rng,
    sample_alt,
)

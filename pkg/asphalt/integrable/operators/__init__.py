from asphalt.integrable.operators.checks import (  # noqa: F401
    check_hereditary_numeric, check_jacobi_numeric, check_skew_adjoint, check_symplectic,
    cyclic_symplectic_sum, nijenhuis_defect)
from asphalt.integrable.operators.geometric import (  # noqa: F401
    FORMS, FlowSpec, composed_form, cosymplectic_H, hierarchy, lie_bracket, nls_square,
    nls_square_identity, recursion_R, skew_generators, skew_matrix_J12, symplectic_I)
from asphalt.integrable.operators.weakly_nonlocal import (  # noqa: F401
    OperatorChain, Tail, WeaklyNonlocalOperator)

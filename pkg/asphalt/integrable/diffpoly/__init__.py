from asphalt.integrable.diffpoly.calculus import (  # noqa: F401
    antiderivative, equivalent_mod_divergence, euler_operator, formal_integrate,
    frechet_derivative, is_total_derivative, split_divergence)
from asphalt.integrable.diffpoly.expressions import (  # noqa: F401
    Dxi, Expression, VectorExpression, curvature_vector, formal_vector, inner,
    total_derivative)
from asphalt.integrable.diffpoly.grid import (  # noqa: F401
    ANCHORS, GridEvaluator, GridFunction, evaluate_on_grid, evaluate_vector, local_derivative,
    local_interpolate, random_packets, random_periodic)
from asphalt.integrable.diffpoly.jets import FAMILIES, Jet  # noqa: F401
from asphalt.integrable.diffpoly.parser import (  # noqa: F401
    format_expression, format_vector, parse_expression, parse_vector)

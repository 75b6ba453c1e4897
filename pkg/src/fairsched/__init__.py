"""Fair and efficacious machine scheduling with Pareto priority mechanisms."""
from .core import (
    Instance,
    canonicalize,
    gen_example_i,
    gen_lower_bound,
    gen_powers,
    gen_uniform,
    load_instance,
    serialize,
)
from .errors import (
    DegenerateInstanceError,
    FairSchedError,
    InfeasibleError,
    InstanceParseError,
    InstanceValidationError,
    ParameterError,
)
from .mechanisms import (
    PrioritySchedule,
    epsilon_k,
    expected_completions,
    fairest_completions,
    fairest_cost,
    optimal_cost,
    pareto_schedule,
    random_schedule,
    sample_order,
    select_k,
    smith_schedule,
)
from .metrics import (
    EvaluationReport,
    bound_lower,
    bound_upper,
    evaluate,
    price_of_fairness,
    reduce_instance,
)

__version__ = "0.1.0"

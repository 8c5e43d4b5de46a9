# Continuous and discrete Lagrangians of the navigation problems
from .continuous import (
    AccelerationLagrangian,
    FirstOrderLagrangian,
    FreeParticleLagrangian,
    FuelLagrangian,
    SecondOrderLagrangian,
    SecondOrderTVLagrangian,
    ZermeloLagrangian,
    fuel_lagrangian,
    randers_F,
    secondorder_tv_lagrangian,
    zermelo_lagrangian,
)
from .discretize import (
    DiscreteLagrangian,
    Lobatto2Lagrangian,
    TrapezoidalLagrangian,
    discretize_lobatto2,
    discretize_trapezoidal,
)
from .functionals import action, travel_time
from .lagrangian_types import (
    EPS_VELOCITY,
    AlphaNonPositive,
    DegenerateVelocity,
    DiscretePartials,
    RandersData,
)

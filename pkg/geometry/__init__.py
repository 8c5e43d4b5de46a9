# Plane geometry, wind fields and forward-mode jets
from .geometry_types import NavRelaxError, NonFiniteValueError, Vec2, WindField, WindSpeedError
from .jets import Jet, value_of
from .wind_fields import (
    calm_field,
    fuel_current_field,
    fuel_wind,
    max_wind_speed,
    rotational_bump,
    uniform_field,
    zermelo_vortex_field,
    zermelo_wind,
)

#pragma once

#include <cmath>
#include <stdexcept>

namespace larvasim {

/// Saturation vapor pressure over liquid water, Magnus form [Pa].
/// Valid roughly on (-40, 60] degC.
inline double p_sat_magnus(double t_celsius) {
    return 610.94 * std::exp(17.625 * t_celsius / (t_celsius + 243.03));
}

/// Saturation water-vapor density at a reference temperature [kg/m^3]:
/// Magnus saturation pressure divided by R_v * T. Throws std::domain_error
/// below the formula's validity range.
inline double h_sat(double t_celsius, double r_vapor = 461.5) {
    if (t_celsius <= -40.0)
        throw std::domain_error("h_sat: temperature below Magnus validity range (-40 degC)");
    return p_sat_magnus(t_celsius) / (r_vapor * (t_celsius + 273.15));
}

}  // namespace larvasim

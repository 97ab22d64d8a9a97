#pragma once

#include "epe/building.hpp"
#include "epe/timeseries.hpp"

namespace epe::solar {

struct SunPosition {
  double cos_zenith;  // <= 0 when the sun is below the horizon
  double azimuth;     // degrees clockwise from north
};

// Naive local clock time is taken as solar time (longitude on the zone
// meridian, no equation of time).
SunPosition sun_position(double latitude_deg, Time t);

// Isotropic-sky transposition of (ghi, dni, dhi) onto a tilted plane.
// Ground reflectance 0.2.
double poa_irradiance(double latitude_deg, Time t, double ghi, double dni,
                      double dhi, const Orientation& orient);

}  // namespace epe::solar

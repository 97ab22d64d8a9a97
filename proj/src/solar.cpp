#include "epe/solar.hpp"

#include <algorithm>
#include <cmath>

namespace epe::solar {

namespace {
constexpr double kPi = 3.14159265358979323846;
double rad(double deg) { return deg * kPi / 180.0; }
}  // namespace

SunPosition sun_position(double latitude_deg, Time t) {
  const int doy = day_of_year(t);
  const double decl =
      rad(23.45) * std::sin(2.0 * kPi * (284.0 + doy) / 365.0);
  const double hour = hour_of_day(t);
  const double hour_angle = rad(15.0 * (hour - 12.0));
  const double lat = rad(latitude_deg);

  const double cos_z = std::sin(lat) * std::sin(decl) +
                       std::cos(lat) * std::cos(decl) * std::cos(hour_angle);
  const double sin_z = std::sqrt(std::max(0.0, 1.0 - cos_z * cos_z));

  double az = 0.0;
  if (sin_z > 1e-9) {
    double cos_az = (std::sin(decl) - cos_z * std::sin(lat)) /
                    (sin_z * std::cos(lat));
    cos_az = std::clamp(cos_az, -1.0, 1.0);
    az = std::acos(cos_az) * 180.0 / kPi;  // from north, toward east
    if (hour_angle > 0.0) az = 360.0 - az; // afternoon: sun in the west
  }
  return {cos_z, az};
}

double poa_irradiance(double latitude_deg, Time t, double ghi, double dni,
                      double dhi, const Orientation& orient) {
  const SunPosition sun = sun_position(latitude_deg, t);
  const double beta = rad(orient.tilt);

  double beam = 0.0;
  if (sun.cos_zenith > 0.0 && dni > 0.0) {
    const double sin_z =
        std::sqrt(std::max(0.0, 1.0 - sun.cos_zenith * sun.cos_zenith));
    const double cos_inc =
        sun.cos_zenith * std::cos(beta) +
        sin_z * std::sin(beta) * std::cos(rad(sun.azimuth - orient.azimuth));
    beam = dni * std::max(0.0, cos_inc);
  }
  const double sky = dhi * (1.0 + std::cos(beta)) / 2.0;
  const double ground = ghi * 0.2 * (1.0 - std::cos(beta)) / 2.0;
  return beam + sky + ground;
}

}  // namespace epe::solar

#include "epe/building.hpp"

#include <cmath>
#include <set>

namespace epe {

namespace {

void check(bool ok, const std::string& where, const std::string& what) {
  if (!ok) throw DataError(where + ": " + what);
}

void check_fraction(double v, const std::string& where,
                    const std::string& field) {
  check(v >= 0.0 && v <= 1.0, where, field + " must be in [0,1]");
}

}  // namespace

void BuildingModel::validate() const {
  check(!zones.empty(), "building '" + name + "'", "needs at least one zone");
  check(latitude >= -90.0 && latitude <= 90.0, "building '" + name + "'",
        "latitude out of range");
  std::set<std::string> seen;
  for (const Zone& z : zones) {
    const std::string zw = "building '" + name + "' zone '" + z.name + "'";
    check(seen.insert(z.name).second, zw, "duplicate zone name");
    check(z.air_capacitance > 0.0, zw, "air_capacitance must be > 0");
    check(z.volume > 0.0, zw, "volume must be > 0");
    check(z.infiltration_ach >= 0.0, zw, "infiltration_ach must be >= 0");
    check_fraction(z.solar_to_air_fraction, zw, "solar_to_air_fraction");
    check_fraction(z.lep_radiative_fraction, zw, "lep_radiative_fraction");

    double share_sum = 0.0;
    for (const Surface& s : z.surfaces) {
      const std::string sw = zw + " surface '" + s.name + "'";
      check(s.area > 0.0, sw, "area must be > 0");
      check(!s.layers.empty(), sw, "needs at least one layer");
      for (std::size_t i = 0; i < s.layers.size(); ++i) {
        const Layer& l = s.layers[i];
        const std::string lw = sw + " layer " + std::to_string(i);
        check(l.thickness > 0.0, lw, "thickness must be > 0");
        check(l.conductivity > 0.0, lw, "conductivity must be > 0");
        check(l.density > 0.0, lw, "density must be > 0");
        check(l.specific_heat > 0.0, lw, "specific_heat must be > 0");
      }
      check(s.exterior_film > 0.0, sw, "exterior_film must be > 0");
      check(s.interior_film > 0.0, sw, "interior_film must be > 0");
      check_fraction(s.solar_absorptance, sw, "solar_absorptance");
      check_fraction(s.solar_gain_share, sw, "solar_gain_share");
      share_sum += s.solar_gain_share;
    }
    check(std::abs(share_sum - (1.0 - z.solar_to_air_fraction)) < 1e-6, zw,
          "surface solar_gain_share values must sum to 1 - "
          "solar_to_air_fraction");
    for (const Window& w : z.windows) {
      const std::string ww = zw + " window '" + w.name + "'";
      check(w.area > 0.0, ww, "area must be > 0");
      check(w.u_value > 0.0, ww, "u_value must be > 0");
      check_fraction(w.shgc, ww, "shgc");
    }
  }
}

}  // namespace epe

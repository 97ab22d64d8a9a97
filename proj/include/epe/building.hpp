#pragma once

#include <string>
#include <vector>

#include "epe/errors.hpp"

namespace epe {

struct Layer {
  double thickness;      // m
  double conductivity;   // W/m.K
  double density;        // kg/m3
  double specific_heat;  // J/kg.K

  double resistance() const { return thickness / conductivity; }  // m2K/W
  double capacitance() const {  // J/m2K
    return thickness * density * specific_heat;
  }
};

// Orientation: azimuth degrees clockwise from north (180 = south),
// tilt degrees from horizontal (90 = vertical wall).
struct Orientation {
  double azimuth = 180.0;
  double tilt = 90.0;
};

struct Surface {
  std::string name;
  double area;                      // m2
  std::vector<Layer> layers;        // outside -> inside
  bool exterior = true;
  double solar_absorptance = 0.6;
  double exterior_film = 25.0;      // W/m2K
  double interior_film = 7.7;       // W/m2K
  double solar_gain_share = 0.0;    // share of transmitted solar deposited here
  Orientation orientation;
};

struct Window {
  std::string name;
  double area;     // m2
  double u_value;  // W/m2K
  double shgc;     // [0,1]
  Orientation orientation;
};

struct Zone {
  std::string name;
  double air_capacitance;           // J/K
  double volume;                    // m3
  double infiltration_ach = 0.0;    // 1/h
  double solar_to_air_fraction = 0.0;
  double lep_radiative_fraction = 0.0;
  std::vector<Surface> surfaces;
  std::vector<Window> windows;
};

struct BuildingModel {
  std::string name;
  double latitude = 40.0;  // degrees north, for solar geometry
  std::vector<Zone> zones;

  void validate() const;
};

}  // namespace epe

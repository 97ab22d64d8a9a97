// Compares the OpenMP kernels against their serial references: the five-run
// decomposition and the COP grid scan.

#include <chrono>
#include <cmath>
#include <cstdio>

#include "epe/decomposition.hpp"
#include "epe/hvac.hpp"
#include "epe/pipeline.hpp"
#include "epe/synth.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace epe;

namespace {

double seconds(auto fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

double max_abs_diff(const std::map<std::string, TimeSeries>& a,
                    const std::map<std::string, TimeSeries>& b) {
  double m = 0.0;
  for (const auto& [zone, s] : a) {
    const TimeSeries& o = b.at(zone);
    for (std::size_t k = 0; k < s.size(); ++k)
      m = std::max(m, std::abs(s[k] - o[k]));
  }
  return m;
}

}  // namespace

int main() {
  apply_thread_cap();
#ifdef _OPENMP
  std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("openmp disabled (serial build)\n");
#endif

  const Time start = civil_to_time(2024, 6, 1);
  const std::size_t hours = 28 * 24;
  const Interval window{start, start + static_cast<Time>(hours) * kHour};

  const BuildingModel office = synth::make_office();
  const WeatherSeries weather =
      synth::make_weather(start, hours, synth::temperate_climate());
  const TimeSeries setpoints = synth::setpoint_schedule(start, hours);
  const TimeSeries lep = synth::lep_schedule(start, hours, 2000.0, 12000.0);
  const MeasuredDataset data =
      synth::synthesize_measurements(office, weather, setpoints, lep, window);

  DecompositionConfig dcfg;
  dcfg.window = window;

  FiveRuns serial, parallel;
  const double ts =
      seconds([&] { serial = run_five_serial(office, data, dcfg); });
  const double tp = seconds([&] { parallel = run_five(office, data, dcfg); });
  const double diff = std::max(
      {max_abs_diff(serial.q1, parallel.q1),
       max_abs_diff(serial.q2, parallel.q2),
       max_abs_diff(serial.q3, parallel.q3),
       max_abs_diff(serial.q4, parallel.q4),
       max_abs_diff(serial.q5, parallel.q5)});
  std::printf("five-run decomposition: serial %.3fs, parallel %.3fs "
              "(speedup %.2fx), max |diff| %.3g W\n",
              ts, tp, ts / tp, diff);

  HvacPlant plant;
  plant.temp_curve = TempCurve::dx_default();
  const ProcessLoadBox box{data.q_hc_measured->slice(window), plant};
  const TimeSeries energy = plant_energy(box, weather).energy;

  CopGrid grid;
  CopScanResult scan;
  const double tc =
      seconds([&] { scan = estimate_cop(box, weather, energy, grid); });
  std::printf("cop grid scan (%zu points): %.3fs, best %.3f\n",
              scan.grid.size(), tc, scan.best_cop);
  return 0;
}

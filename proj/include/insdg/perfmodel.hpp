// SPDX-License-Identifier: MIT
// Roofline model for the four elemental kernels.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "insdg/config.hpp"
#include "insdg/discretization.hpp"

namespace insdg {

struct HardwareDescriptor {
  std::string name;
  int sm_count = 1;
  int alus_per_sm = 1;
  int word_bytes = 8;
  double clock_ghz = 1.0;
  double nominal_copy_bw_gbs = 0.0;  // 0 when unknown

  void validate() const;
};

// 56 x 16 x 8 B x 1.099609375 GHz = 7.882 TB/s
HardwareDescriptor p100_descriptor();
// one core, two vector loads per cycle; clock and vector width read from the host when available
HardwareDescriptor host_descriptor();
HardwareDescriptor descriptor_from_config(const Config& c);

// sm_count * alus_per_sm * word_bytes * clock, in bytes/s
double shared_bandwidth(const HardwareDescriptor& hw);

enum class KernelId { LocalGradient, Sipdg, AdvVolume, AdvSurface };
const std::vector<KernelId>& all_kernels();
const char* kernel_name(KernelId k);
KernelId parse_kernel(const std::string& s);

struct KernelCostModel {
  KernelId kernel = KernelId::LocalGradient;
  int N = 0, K = 0, Np = 0, Nfp = 0, Nc = 0, Nfc = 0;
  double W = 0.0;                 // flops
  double D_in = 0.0, D_out = 0.0;  // global bytes
  double S_in = 0.0, S_out = 0.0;  // fast-memory bytes
};

// advection cubature sizes follow the default discretization (order max(3N, 2N+1))
KernelCostModel kernel_cost(KernelId k, int N, int K);

// bytes of the reference operators one SIPDG element reads: M, LIFT, Dr, Ds
double sipdg_operator_bytes(int N);

struct RooflineBound {
  double copy = 0.0, fast = 0.0, combined = 0.0;  // flop/s
};

RooflineBound roofline_bound(const KernelCostModel& c, double Bg, double Bsh);

// flops counted by running the templated kernel on `d` with the counting scalar
std::uint64_t counted_flops(KernelId k, const Discretization& d);

struct BandwidthMeasurement {
  double bytes_per_second = 0.0;  // median
  double min = 0.0, max = 0.0;
  std::vector<double> trials;
};

// smallest buffer accepted by measure_copy_bandwidth: 8 x L2, at least 16 MiB
std::size_t min_copy_buffer_bytes();
// bytes/s counting the read and the write of every copied byte
BandwidthMeasurement measure_copy_bandwidth(std::size_t buffer_bytes = std::size_t(256) << 20,
                                            int repetitions = 11);

struct RooflineRow {
  KernelCostModel cost;
  RooflineBound bound;
  double seconds = 0.0;  // median per call
  double measured_gflops = 0.0;
  double efficiency = 0.0;  // measured / combined bound
  bool model_violation = false;  // efficiency > 1.05
};

// times the dgops operators on d (warmup 3, median of at least `repetitions` calls)
std::vector<RooflineRow> benchmark_kernels(const Discretization& d, double Bg, double Bsh, int repetitions = 11);

std::string roofline_csv(const std::vector<RooflineRow>& rows);
void write_roofline_csv(const std::vector<RooflineRow>& rows, const std::string& path);

}  // namespace insdg

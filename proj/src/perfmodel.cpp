// SPDX-License-Identifier: MIT
#include "insdg/perfmodel.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "insdg/dgops.hpp"
#include "insdg/kernels.hpp"

namespace insdg {

void HardwareDescriptor::validate() const {
  if (sm_count <= 0 || alus_per_sm <= 0 || word_bytes <= 0 || !(clock_ghz > 0.0) || nominal_copy_bw_gbs < 0.0)
    throw ConfigError("hardware descriptor '" + name + "': counts and clock must be positive");
}

HardwareDescriptor p100_descriptor() { return {"P100", 56, 16, 8, 1.099609375, 549.0}; }

HardwareDescriptor host_descriptor() {
  HardwareDescriptor hw;
  hw.name = "host";
#if defined(__AVX512F__)
  const int lanes = 8;
#elif defined(__AVX__)
  const int lanes = 4;
#else
  const int lanes = 2;
#endif
  hw.alus_per_sm = 2 * lanes;
  hw.clock_ghz = 2.0;
  std::ifstream f("/proc/cpuinfo");
  std::string line;
  while (std::getline(f, line)) {
    if (line.rfind("cpu MHz", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        const double mhz = std::atof(line.c_str() + colon + 1);
        if (mhz > 0.0) hw.clock_ghz = mhz / 1000.0;
      }
      break;
    }
  }
  return hw;
}

HardwareDescriptor descriptor_from_config(const Config& c) {
  c.require_known({"name", "sm_count", "alus_per_sm", "word_bytes", "clock_ghz", "nominal_copy_bw_gbs"});
  for (const char* k : {"sm_count", "alus_per_sm", "word_bytes", "clock_ghz"})
    if (!c.has(k)) throw ConfigError(std::string("hardware descriptor: missing key '") + k + "'");
  HardwareDescriptor hw;
  hw.name = c.get_string("name", "unnamed");
  hw.sm_count = c.get_int("sm_count", 0);
  hw.alus_per_sm = c.get_int("alus_per_sm", 0);
  hw.word_bytes = c.get_int("word_bytes", 0);
  hw.clock_ghz = c.get_double("clock_ghz", 0.0);
  hw.nominal_copy_bw_gbs = c.get_double("nominal_copy_bw_gbs", 0.0);
  hw.validate();
  return hw;
}

double shared_bandwidth(const HardwareDescriptor& hw) {
  hw.validate();
  return static_cast<double>(hw.sm_count) * hw.alus_per_sm * hw.word_bytes * hw.clock_ghz * 1e9;
}

const std::vector<KernelId>& all_kernels() {
  static const std::vector<KernelId> k{KernelId::LocalGradient, KernelId::Sipdg, KernelId::AdvVolume,
                                       KernelId::AdvSurface};
  return k;
}

const char* kernel_name(KernelId k) {
  switch (k) {
    case KernelId::LocalGradient: return "local_gradient";
    case KernelId::Sipdg: return "sipdg";
    case KernelId::AdvVolume: return "adv_volume";
    case KernelId::AdvSurface: return "adv_surface";
  }
  return "?";
}

KernelId parse_kernel(const std::string& s) {
  for (KernelId k : all_kernels())
    if (s == kernel_name(k)) return k;
  throw ConfigError("unknown kernel '" + s + "'");
}

KernelCostModel kernel_cost(KernelId k, int N, int K) {
  if (N < 1 || K < 1) throw ConfigError("kernel_cost: N and K must be at least 1");
  KernelCostModel c;
  c.kernel = k;
  c.N = N;
  c.K = K;
  c.Np = (N + 1) * (N + 2) / 2;
  c.Nfp = N + 1;
  const int cub_order = std::max(3 * N, 2 * N + 1);
  c.Nc = build_cubature(cub_order).count();
  c.Nfc = (cub_order + 2) / 2;
  const double Kd = K, Np = c.Np, Nfp = c.Nfp, Nc = c.Nc, Nfc = c.Nfc;
  switch (k) {
    case KernelId::LocalGradient:
      c.W = Kd * (4 * Np * Np + 6 * Np);
      c.D_in = 8 * (Kd * Np + 2 * Np * Np + 4 * Kd);
      c.D_out = 16 * Kd * Np;
      c.S_in = 16 * Kd * Np * Np;
      c.S_out = 8 * Kd * Np;
      break;
    case KernelId::Sipdg:
      c.W = Kd * (6 * Np * Np + 18 * Np * Nfp + 11 * Np + 48 * Nfp);
      c.D_in = 8 * (3 * Kd * Np + 6 * Kd * Nfp + 3 * Np * Np + 3 * Np * Nfp + 17 * Kd);
      c.D_out = 8 * Kd * Np;
      c.S_in = 8 * Kd * (3 * Np * Np + 9 * Np * Nfp);
      c.S_out = 8 * Kd * (12 * Nfp + 5 * Np);
      break;
    case KernelId::AdvVolume:
      c.W = Kd * (24 * Np * Nc + 4 * Nc + 14 * Np);
      c.D_in = 8 * (4 * Kd * Np + 3 * Nc * Np + 4 * Kd);
      c.D_out = 16 * Kd * Np;
      c.S_in = 8 * Kd * 12 * Np * Nc;
      c.S_out = 8 * Kd * (4 * Np + 4 * Nc);
      break;
    case KernelId::AdvSurface:
      c.W = Kd * (48 * Nfc * Nfp + 60 * Nfc + 12 * Np * Nfc);
      c.D_in = 8 * (4 * Kd * Np + 6 * Kd * Nfp + 3 * Np * Nfc + 3 * Nfc * Nfp + 12 * Kd);
      c.D_out = 16 * Kd * Np;
      c.S_in = 8 * Kd * (24 * Nfc * Nfp + 6 * Np * Nfc);
      c.S_out = 8 * Kd * (24 * Nfp + 6 * Nfc);
      break;
  }
  return c;
}

double sipdg_operator_bytes(int N) {
  const double Np = (N + 1) * (N + 2) / 2, Nfp = N + 1;
  return 8 * (3 * Np * Np + 3 * Np * Nfp);
}

RooflineBound roofline_bound(const KernelCostModel& c, double Bg, double Bsh) {
  if (!(Bg > 0.0) || !(Bsh > 0.0)) throw ConfigError("roofline_bound: bandwidths must be positive");
  if (!(c.D_in + c.D_out > 0.0) || !(c.S_in + c.S_out > 0.0))
    throw ConfigError("roofline_bound: empty cost model");
  RooflineBound b;
  b.copy = Bg * c.W / (c.D_in + c.D_out);
  b.fast = Bsh * c.W / (c.S_in + c.S_out);
  b.combined = std::min(b.copy, b.fast);
  return b;
}

std::uint64_t counted_flops(KernelId k, const Discretization& d) {
  const dlong n = d.ndof();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<Counted> a(n), b(n), c(n), e(n), x(n), y(n);
  for (dlong i = 0; i < n; ++i) a[i] = U(rng), b[i] = U(rng), c[i] = U(rng), e[i] = U(rng);
  FlopCounter::reset();
  switch (k) {
    case KernelId::LocalGradient:
      kernels::local_gradient(d, a.data(), x.data(), y.data());
      break;
    case KernelId::Sipdg:
      kernels::sipdg(d, EllipticBC::pressure(), 1.0, a.data(), b.data(), c.data(), x.data());
      break;
    case KernelId::AdvVolume:
      kernels::adv_volume(d, a.data(), b.data(), c.data(), e.data(), x.data(), y.data());
      break;
    case KernelId::AdvSurface:
      kernels::adv_surface(d, a.data(), b.data(), c.data(), e.data(), nullptr, nullptr, x.data(), y.data());
      break;
  }
  return FlopCounter::count;
}

std::size_t min_copy_buffer_bytes() {
  long l2 = sysconf(_SC_LEVEL2_CACHE_SIZE);
  if (l2 <= 0) l2 = 2L << 20;
  return std::max<std::size_t>(std::size_t(16) << 20, 8 * static_cast<std::size_t>(l2));
}

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// median seconds per call; calls are batched so every sample lasts at least 1 ms
double time_call(const std::function<void()>& fn, int repetitions) {
  for (int i = 0; i < 3; ++i) fn();
  auto t0 = Clock::now();
  fn();
  const double single = std::chrono::duration<double>(Clock::now() - t0).count();
  const int batch = single >= 1e-3 ? 1 : static_cast<int>(std::ceil(1e-3 / std::max(single, 1e-9)));
  std::vector<double> samples;
  for (int r = 0; r < std::max(repetitions, 11); ++r) {
    t0 = Clock::now();
    for (int i = 0; i < batch; ++i) fn();
    samples.push_back(std::chrono::duration<double>(Clock::now() - t0).count() / batch);
  }
  return median(samples);
}

}  // namespace

BandwidthMeasurement measure_copy_bandwidth(std::size_t buffer_bytes, int repetitions) {
  if (buffer_bytes < min_copy_buffer_bytes())
    throw ConfigError("copy bandwidth buffer of " + std::to_string(buffer_bytes) + " bytes is below the " +
                      std::to_string(min_copy_buffer_bytes()) + "-byte cache-defeating minimum");
  if (repetitions < 11) throw ConfigError("copy bandwidth needs at least 11 trials");
  const size_t n = buffer_bytes / sizeof(double);
  std::vector<double> src(n), dst(n);
  for (size_t i = 0; i < n; ++i) src[i] = static_cast<double>(i & 1023);
  std::memcpy(dst.data(), src.data(), n * sizeof(double));  // warmup, discarded
  BandwidthMeasurement m;
  for (int r = 0; r < repetitions; ++r) {
    const auto t0 = Clock::now();
    std::memcpy(dst.data(), src.data(), n * sizeof(double));
    const double s = std::chrono::duration<double>(Clock::now() - t0).count();
    m.trials.push_back(2.0 * n * sizeof(double) / s);
    src[r % n] += dst[(r * 7919) % n];  // keep the copies observable
  }
  m.bytes_per_second = median(m.trials);
  m.min = *std::min_element(m.trials.begin(), m.trials.end());
  m.max = *std::max_element(m.trials.begin(), m.trials.end());
  return m;
}

std::vector<RooflineRow> benchmark_kernels(const Discretization& d, double Bg, double Bsh, int repetitions) {
  const dlong n = d.ndof();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  ScalarField f(n), fx(n), fy(n);
  VectorField Ub(n), Ut(n);
  for (dlong i = 0; i < n; ++i) {
    f[i] = U(rng);
    Ub.u[i] = U(rng), Ub.v[i] = U(rng), Ut.u[i] = U(rng), Ut.v[i] = U(rng);
  }
  local_gradient(d, f, fx, fy);
  const EllipticBC bc = EllipticBC::pressure();
  VectorField acc(n);
  std::vector<RooflineRow> rows;
  for (KernelId k : all_kernels()) {
    std::function<void()> fn;
    ScalarField gx, gy;
    switch (k) {
      case KernelId::LocalGradient: fn = [&] { local_gradient(d, f, gx, gy); }; break;
      case KernelId::Sipdg: fn = [&] { gx = sipdg_apply(d, f, fx, fy, 1.0, bc); }; break;
      case KernelId::AdvVolume: fn = [&] { acc = advection_volume(d, Ub, Ut); }; break;
      case KernelId::AdvSurface: fn = [&] { advection_surface(d, Ub, Ut, {}, {}, acc); }; break;
    }
    RooflineRow r;
    r.cost = kernel_cost(k, d.N, d.K);
    r.bound = roofline_bound(r.cost, Bg, Bsh);
    r.seconds = time_call(fn, repetitions);
    r.measured_gflops = r.cost.W / r.seconds * 1e-9;
    r.efficiency = r.measured_gflops * 1e9 / r.bound.combined;
    r.model_violation = r.efficiency > 1.05;
    rows.push_back(r);
  }
  return rows;
}

std::string roofline_csv(const std::vector<RooflineRow>& rows) {
  std::ostringstream o;
  o.precision(10);
  o << "kernel,N,K,W,D_in,D_out,S_in,S_out,copy_bound,fast_bound,combined_bound,measured_gflops,efficiency\n";
  for (const auto& r : rows) {
    const auto& c = r.cost;
    o << kernel_name(c.kernel) << ',' << c.N << ',' << c.K << ',' << c.W << ',' << c.D_in << ',' << c.D_out << ','
      << c.S_in << ',' << c.S_out << ',' << r.bound.copy * 1e-9 << ',' << r.bound.fast * 1e-9 << ','
      << r.bound.combined * 1e-9 << ',' << r.measured_gflops << ',' << r.efficiency << '\n';
  }
  return o.str();
}

void write_roofline_csv(const std::vector<RooflineRow>& rows, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << roofline_csv(rows);
  if (!f) throw Error("write failed: " + path);
}

}  // namespace insdg

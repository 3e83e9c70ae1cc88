// SPDX-License-Identifier: MIT
#include "insdg/cases.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>

namespace insdg {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kPi = std::numbers::pi;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void add_times(StageTimes& acc, const StageTimes& t) {
  acc.advection += t.advection;
  acc.velocity += t.velocity;
  acc.pressure += t.pressure;
  acc.update += t.update;
  acc.total += t.total;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << std::setprecision(17);
  return f;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f = open_out(path);
  f << text;
  if (!f) throw Error("write failed: " + path);
}

// geometric spacing from a toward b, first interval h0, growth ratio, capped at hmax
std::vector<double> stretched(double a, double b, double h0, double ratio, double hmax) {
  const double len = std::abs(b - a), dir = b > a ? 1.0 : -1.0;
  std::vector<double> hs;
  double total = 0.0, h = h0;
  while (total + 0.5 * h < len) {
    hs.push_back(h);
    total += h;
    h = std::min(h * ratio, hmax);
  }
  if (hs.empty()) hs.push_back(len);
  const double fix = len / std::accumulate(hs.begin(), hs.end(), 0.0);
  std::vector<double> pts{a};
  double x = a;
  for (size_t i = 0; i < hs.size(); ++i) {
    x += dir * hs[i] * fix;
    pts.push_back(i + 1 == hs.size() ? b : x);
  }
  return pts;
}

// lines on [lo, hi] fine and uniform over the body [-0.5, 0.5]
std::vector<double> body_lines(double lo, double hi, double h0, double ratio_lo, double ratio_hi, double hmax) {
  const int nb = std::max(1, static_cast<int>(std::lround(1.0 / h0)));
  std::vector<double> left = stretched(-0.5, lo, h0, ratio_lo, hmax);
  std::reverse(left.begin(), left.end());
  std::vector<double> pts(left.begin(), left.end() - 1);
  for (int i = 0; i < nb; ++i) pts.push_back(-0.5 + static_cast<double>(i) / nb);
  const std::vector<double> right = stretched(0.5, hi, h0, ratio_hi, hmax);
  pts.insert(pts.end(), right.begin(), right.end());
  return pts;
}

}  // namespace

ExactSolution taylor_exact(double nu) {
  if (!(nu > 0.0)) throw ConfigError("taylor_exact: viscosity must be positive");
  ExactSolution ex;
  ex.nu = nu;
  const double a = 4.0 * kPi * kPi * nu, w = 2.0 * kPi;
  ex.u = [=](double, double y, double t) { return -std::sin(w * y) * std::exp(-a * t); };
  ex.v = [=](double x, double, double t) { return std::sin(w * x) * std::exp(-a * t); };
  ex.p = [=](double x, double y, double t) { return -std::cos(w * x) * std::cos(w * y) * std::exp(-2.0 * a * t); };
  ex.dudn = [=](double x, double y, double t, double nx, double ny) {
    const double E = std::exp(-a * t);
    return Vec2{-w * std::cos(w * y) * E * ny, w * std::cos(w * x) * E * nx};
  };
  return ex;
}

FlowBoundary exact_boundary(const ExactSolution& ex) {
  FlowBoundary bc;
  bc.velocity = [ex](double x, double y, double t) { return Vec2{ex.u(x, y, t), ex.v(x, y, t)}; };
  bc.velocity_normal_derivative = ex.dudn;
  bc.pressure = ex.p;
  return bc;
}

L2Result l2_error(const Discretization& d, const ScalarField& f, const std::function<double(double, double)>& exact) {
  if (f.size() != d.ndof()) throw ShapeError("l2_error: field size mismatch");
  const CubatureRule cub = build_cubature(2 * d.N + 2);
  const RowMatrix I = vandermonde_2d(d.N, cub.r, cub.s) * d.ref.invV;
  double err = 0.0, ref = 0.0;
  for (int e = 0; e < d.K; ++e) {
    const auto& tri = d.mesh.triangles[e];
    const Vec2 a = d.mesh.vertices[tri[0]], b = d.mesh.vertices[tri[1]], c = d.mesh.vertices[tri[2]];
    const double J = d.geom.J[e];
    for (int q = 0; q < cub.count(); ++q) {
      const double r = cub.r[q], s = cub.s[q];
      const double x = -0.5 * (r + s) * a.x + 0.5 * (1.0 + r) * b.x + 0.5 * (1.0 + s) * c.x;
      const double y = -0.5 * (r + s) * a.y + 0.5 * (1.0 + r) * b.y + 0.5 * (1.0 + s) * c.y;
      double fh = 0.0;
      for (int n = 0; n < d.Np; ++n) fh += I(q, n) * f[static_cast<dlong>(e) * d.Np + n];
      const double fe = exact(x, y);
      err += cub.w[q] * J * (fh - fe) * (fh - fe);
      ref += cub.w[q] * J * fe * fe;
    }
  }
  if (ref == 0.0) return {std::sqrt(err), false};
  return {std::sqrt(err / ref), true};
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ShapeError("fit_slope needs at least two points");
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

Mesh vortex_mesh(int n) {
  return generate_structured(n, n, {-0.5, 0.5, -0.5, 0.5},
                             {BoundaryTag::Inflow, BoundaryTag::Outflow, BoundaryTag::Inflow, BoundaryTag::Inflow});
}

VortexResult run_vortex(const VortexConfig& cfg) {
  const auto t_start = Clock::now();
  const Discretization d = make_discretization(vortex_mesh(cfg.cells), cfg.N);
  const ExactSolution ex = taylor_exact(cfg.nu);
  FlowConfig fc = cfg.flow;
  fc.nu = cfg.nu;
  const int steps = std::max(1, static_cast<int>(std::lround(cfg.final_time / fc.dt)));
  fc.dt = cfg.final_time / steps;

  FlowSolver solver(d, fc, exact_boundary(ex));
  const int levels = cfg.exact_start ? fc.order + 1 : 1;
  std::vector<VectorField> Us;
  std::vector<ScalarField> Ps;
  std::vector<double> ts;
  for (int i = 0; i < levels; ++i) {
    const double t = -i * fc.dt;
    Us.emplace_back(interpolate(d, [&](double x, double y) { return ex.u(x, y, t); }),
                    interpolate(d, [&](double x, double y) { return ex.v(x, y, t); }));
    Ps.push_back(interpolate(d, [&](double x, double y) { return ex.p(x, y, t); }));
    ts.push_back(t);
  }
  solver.set_history(std::move(Us), std::move(Ps), std::move(ts));

  VortexResult res;
  res.h = 1.0 / cfg.cells;
  double itv = 0.0, itp = 0.0;
  for (int n = 0; n < steps; ++n) {
    StepReport r = solver.step();
    itv += 0.5 * (r.it_velocity_u + r.it_velocity_v);
    itp += r.it_pressure;
    res.advection_evaluations += r.advection_evaluations;
    add_times(res.times, r.times);
    res.reports.push_back(r);
  }
  res.steps = steps;
  res.mean_it_velocity = itv / steps;
  res.mean_it_pressure = itp / steps;
  const double T = solver.time();
  res.err_u = l2_error(d, solver.velocity().u, [&](double x, double y) { return ex.u(x, y, T); }).value;
  res.err_v = l2_error(d, solver.velocity().v, [&](double x, double y) { return ex.v(x, y, T); }).value;
  res.err_p = l2_error(d, solver.pressure(), [&](double x, double y) { return ex.p(x, y, T); }).value;
  res.max_divergence = norm2(solver.divergence());
  if (!cfg.snapshot_path.empty()) write_snapshot_csv(d, solver.velocity(), solver.pressure(), cfg.snapshot_path);
  res.seconds = seconds_since(t_start);
  return res;
}

ConvergenceKind parse_convergence_kind(const std::string& s) {
  if (s == "spatial") return ConvergenceKind::Spatial;
  if (s == "temporal") return ConvergenceKind::Temporal;
  if (s == "subcycle") return ConvergenceKind::Subcycle;
  throw ConfigError("unknown convergence study '" + s + "' (expected spatial, temporal or subcycle)");
}

const char* convergence_kind_name(ConvergenceKind k) {
  switch (k) {
    case ConvergenceKind::Spatial: return "spatial";
    case ConvergenceKind::Temporal: return "temporal";
    default: return "subcycle";
  }
}

void ConvergenceRecord::fit(int finest) {
  std::vector<const ConvergenceRow*> ok;
  for (const auto& r : rows)
    if (r.failure.empty() && r.err_u > 0.0 && r.err_v > 0.0 && r.err_p > 0.0) ok.push_back(&r);
  if (finest > 0 && static_cast<int>(ok.size()) > finest) ok.erase(ok.begin(), ok.end() - finest);
  if (ok.size() < 2) {
    slope_u = slope_v = slope_p = std::nan("");
    return;
  }
  std::vector<double> x, eu, ev, ep;
  for (const auto* r : ok) {
    x.push_back(kind == ConvergenceKind::Spatial ? r->h : r->dt);
    eu.push_back(r->err_u);
    ev.push_back(r->err_v);
    ep.push_back(r->err_p);
  }
  slope_u = fit_slope(x, eu);
  slope_v = fit_slope(x, ev);
  slope_p = fit_slope(x, ep);
}

ConvergenceRecord run_convergence(const ConvergenceConfig& cfg) {
  ConvergenceRecord rec;
  rec.kind = cfg.kind;
  rec.final_time = cfg.base.final_time;
  std::vector<VortexConfig> runs;
  if (cfg.kind == ConvergenceKind::Spatial) {
    for (int c : cfg.cells) {
      VortexConfig v = cfg.base;
      v.cells = c;
      runs.push_back(v);
    }
  } else {
    if (cfg.dts.empty()) throw ConfigError("temporal and subcycle studies need a list of time steps");
    for (double dt : cfg.dts) {
      VortexConfig v = cfg.base;
      v.flow.dt = dt;
      v.flow.subcycling = cfg.kind == ConvergenceKind::Subcycle || cfg.base.flow.subcycling;
      runs.push_back(v);
    }
  }
  for (const auto& v : runs) {
    ConvergenceRow row;
    row.h = 1.0 / v.cells;
    const int steps = std::max(1, static_cast<int>(std::lround(v.final_time / v.flow.dt)));
    row.dt = v.final_time / steps;
    row.N = v.N;
    row.Ns = v.flow.subcycling ? v.flow.substeps : 0;
    try {
      const VortexResult r = run_vortex(v);
      row.err_u = r.err_u;
      row.err_v = r.err_v;
      row.err_p = r.err_p;
      row.it_velocity = r.mean_it_velocity;
      row.it_pressure = r.mean_it_pressure;
      row.seconds = r.seconds;
    } catch (const Error& e) {
      row.failure = e.what();
    }
    rec.rows.push_back(row);
  }
  rec.fit(0);
  return rec;
}

std::string errors_csv(const ConvergenceRecord& rec) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "h,dt,N,Ns,err_u,err_v,err_p\n";
  for (const auto& r : rec.rows)
    out << r.h << ',' << r.dt << ',' << r.N << ',' << r.Ns << ',' << r.err_u << ',' << r.err_v << ',' << r.err_p
        << '\n';
  if (!rec.rows.empty())
    out << "# kind=" << convergence_kind_name(rec.kind) << " final_time=" << rec.final_time
        << " slope_u=" << rec.slope_u << " slope_v=" << rec.slope_v << " slope_p=" << rec.slope_p << '\n';
  return out.str();
}

void write_errors_csv(const ConvergenceRecord& rec, const std::string& path) { write_text(path, errors_csv(rec)); }

ConvergenceRecord parse_errors_csv(const std::string& text) {
  ConvergenceRecord rec;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "h,dt,N,Ns,err_u,err_v,err_p") throw Error("errors.csv: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream f(line.substr(1));
      std::string kv;
      while (f >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
        if (k == "kind") rec.kind = parse_convergence_kind(v);
        else if (k == "final_time") rec.final_time = std::stod(v);
        else if (k == "slope_u") rec.slope_u = std::stod(v);
        else if (k == "slope_v") rec.slope_v = std::stod(v);
        else if (k == "slope_p") rec.slope_p = std::stod(v);
      }
      continue;
    }
    std::istringstream f(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(f, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw Error("errors.csv: expected 7 columns in '" + line + "'");
    ConvergenceRow r;
    r.h = std::stod(cells[0]);
    r.dt = std::stod(cells[1]);
    r.N = std::stoi(cells[2]);
    r.Ns = std::stoi(cells[3]);
    r.err_u = std::stod(cells[4]);
    r.err_v = std::stod(cells[5]);
    r.err_p = std::stod(cells[6]);
    rec.rows.push_back(r);
  }
  return rec;
}

StrouhalResult strouhal_number(const std::vector<double>& t, const std::vector<double>& signal, double D, double U) {
  if (t.size() != signal.size()) throw ShapeError("strouhal_number: time and signal sizes differ");
  StrouhalResult res;
  const size_t n0 = t.size() / 2;
  const size_t n = t.size() - n0;
  if (n < 8) return res;
  const double dt = (t.back() - t[n0]) / static_cast<double>(n - 1);
  const double window = dt * static_cast<double>(n);

  double mean = 0.0;
  for (size_t i = n0; i < t.size(); ++i) mean += signal[i];
  mean /= static_cast<double>(n);
  std::vector<double> x(n);
  double var = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1));
    const double s = signal[n0 + i] - mean;
    var += s * s;
    x[i] = w * s;
  }
  if (std::sqrt(var / static_cast<double>(n)) <= 1e-8 * (1.0 + std::abs(mean))) return res;

  const size_t kmax = n / 2;
  std::vector<double> mag(kmax + 1, 0.0);
  for (size_t k = 1; k <= kmax; ++k) {
    double re = 0.0, im = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double ph = 2.0 * kPi * static_cast<double>(k) * static_cast<double>(i) / static_cast<double>(n);
      re += x[i] * std::cos(ph);
      im -= x[i] * std::sin(ph);
    }
    mag[k] = std::hypot(re, im);
  }
  size_t kp = 1;
  for (size_t k = 2; k <= kmax; ++k)
    if (mag[k] > mag[kp]) kp = k;
  double shift = 0.0;
  if (kp > 1 && kp < kmax) {
    const double a = mag[kp - 1], b = mag[kp], c = mag[kp + 1];
    const double den = a - 2.0 * b + c;
    if (den != 0.0) shift = 0.5 * (a - c) / den;
  }
  res.frequency = (static_cast<double>(kp) + shift) / window;
  res.strouhal = res.frequency * D / U;
  res.cycles = res.frequency * window;
  res.reliable = res.cycles >= 5.0;
  return res;
}

Mesh cylinder_mesh(double scale) {
  if (!(scale > 0.0)) throw ConfigError("cylinder mesh scale must be positive");
  const double h0 = 0.25 / scale;
  const std::vector<double> xs = body_lines(-16.0, 25.0, h0, 1.2, 1.06, 2.0 / scale);
  const std::vector<double> ys = body_lines(-22.0, 22.0, h0, 1.15, 1.15, 2.5 / scale);
  const Rect body{-0.5, 0.5, -0.5, 0.5};
  return generate_tensor(xs, ys, {BoundaryTag::Inflow, BoundaryTag::Outflow, BoundaryTag::Inflow, BoundaryTag::Inflow},
                         &body, BoundaryTag::Wall);
}

CylinderResult run_cylinder(const CylinderConfig& cfg) {
  const auto t_start = Clock::now();
  const Mesh mesh = cfg.mesh_file.empty() ? cylinder_mesh(cfg.mesh_scale) : load_mesh_file(cfg.mesh_file);
  const Discretization d = make_discretization(mesh, cfg.N);
  FlowConfig fc = cfg.flow;
  if (fc.subcycling && cfg.cfl > 0.0 && cfg.inflow != 0.0) {
    // peak speed near the body is about 1.5 times the free stream
    const double dts = cfg.cfl * d.min_spacing() / (1.5 * std::abs(cfg.inflow));
    fc.dt = fc.substeps * dts;
  }
  FlowBoundary bc;
  const double uin = cfg.inflow;
  bc.velocity = [uin](double, double, double) { return Vec2{uin, 0.0}; };
  FlowSolver solver(d, fc, bc);
  solver.set_initial(VectorField(d.ndof()), ScalarField(d.ndof()), 0.0);

  const int e = find_element(d, cfg.probe.x, cfg.probe.y);
  if (e < 0) throw ConfigError("probe point lies outside the mesh");
  std::vector<double> probe_u(d.ndof(), 0.0);
  const auto& tri = d.mesh.triangles[e];
  const Vec2 a = d.mesh.vertices[tri[0]];
  const double dx = cfg.probe.x - a.x, dy = cfg.probe.y - a.y;
  const double r = -1.0 + d.geom.rx[e] * dx + d.geom.ry[e] * dy;
  const double s = -1.0 + d.geom.sx[e] * dx + d.geom.sy[e] * dy;
  const RowMatrix phi = vandermonde_2d(d.N, {r}, {s}) * d.ref.invV;
  auto probe = [&](const ScalarField& f) {
    double v = 0.0;
    for (int n = 0; n < d.Np; ++n) v += phi(0, n) * f[static_cast<dlong>(e) * d.Np + n];
    return v;
  };

  CylinderResult res;
  const int steps = std::max(1, static_cast<int>(std::lround(cfg.final_time / fc.dt)));
  for (int n = 0; n < steps; ++n) {
    StepReport rep = solver.step();
    add_times(res.times, rep.times);
    res.reports.push_back(rep);
    res.t.push_back(solver.time());
    res.probe_u.push_back(probe(solver.velocity().u));
    res.probe_v.push_back(probe(solver.velocity().v));
  }
  res.st = strouhal_number(res.t, res.probe_v, 1.0, std::abs(cfg.inflow) > 0.0 ? std::abs(cfg.inflow) : 1.0);
  if (!cfg.snapshot_path.empty()) write_snapshot_csv(d, solver.velocity(), solver.pressure(), cfg.snapshot_path);
  res.seconds = seconds_since(t_start);
  return res;
}

std::vector<SubcycleRow> run_subcycle_study(const VortexConfig& base, const std::vector<int>& Ns, double cfl) {
  if (Ns.empty()) throw ConfigError("subcycle study needs at least one substep count");
  const Discretization d = make_discretization(vortex_mesh(base.cells), base.N);
  int L = 1;
  for (int n : Ns) {
    if (n < 1) throw ConfigError("substep counts must be positive");
    L = std::lcm(L, n);
  }
  // the Taylor vortex speed is at most sqrt(2)
  const double dts_cfl = cfl * d.min_spacing() / std::sqrt(2.0);
  const int blocks = std::max(1, static_cast<int>(std::ceil(base.final_time / (L * dts_cfl))));
  const double dts = base.final_time / (static_cast<double>(blocks) * L);

  std::vector<SubcycleRow> rows;
  for (int n : Ns) {
    VortexConfig v = base;
    v.flow.subcycling = true;
    v.flow.substeps = n;
    v.flow.dt = n * dts;
    const VortexResult r = run_vortex(v);
    SubcycleRow row;
    row.Ns = n;
    row.dt = v.flow.dt;
    row.steps = r.steps;
    row.mean_it_velocity = r.mean_it_velocity;
    row.mean_it_pressure = r.mean_it_pressure;
    row.advection_evaluations = r.advection_evaluations;
    row.times = r.times;
    rows.push_back(row);
  }
  for (auto& row : rows) row.speedup = rows.front().times.total / row.times.total;
  return rows;
}

void write_subcycle_csv(const std::vector<SubcycleRow>& rows, const std::string& path) {
  std::ofstream f = open_out(path);
  f << "Ns,dt,steps,mean_it_velocity,mean_it_pressure,advection_evaluations,t_advection,t_velocity,t_pressure,"
       "t_update,t_total,speedup\n";
  for (const auto& r : rows)
    f << r.Ns << ',' << r.dt << ',' << r.steps << ',' << r.mean_it_velocity << ',' << r.mean_it_pressure << ','
      << r.advection_evaluations << ',' << r.times.advection << ',' << r.times.velocity << ',' << r.times.pressure
      << ',' << r.times.update << ',' << r.times.total << ',' << r.speedup << '\n';
}

void write_iters_csv(const std::vector<StepReport>& reports, const std::string& path) {
  std::ofstream f = open_out(path);
  f << "step,t,it_velocity_u,it_velocity_v,it_pressure\n";
  for (const auto& r : reports)
    f << r.step << ',' << r.t << ',' << r.it_velocity_u << ',' << r.it_velocity_v << ',' << r.it_pressure << '\n';
}

void write_timings_csv(const StageTimes& t, const std::string& path) {
  std::ofstream f = open_out(path);
  f << "stage,seconds,fraction\n";
  const double T = t.total > 0.0 ? t.total : 1.0;
  const std::pair<const char*, double> rows[] = {
      {"advection", t.advection}, {"velocity", t.velocity}, {"pressure", t.pressure}, {"update", t.update}};
  for (const auto& [name, s] : rows) f << name << ',' << s << ',' << s / T << '\n';
  f << "total," << t.total << ",1\n";
}

void write_snapshot_csv(const Discretization& d, const VectorField& U, const ScalarField& P, const std::string& path) {
  std::ofstream f = open_out(path);
  f << "x,y,u,v,p\n";
  for (dlong n = 0; n < d.ndof(); ++n) f << d.x[n] << ',' << d.y[n] << ',' << U.u[n] << ',' << U.v[n] << ',' << P[n] << '\n';
}

}  // namespace insdg

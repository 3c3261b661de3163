// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include "ntmc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

namespace ntmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_common(const CrossSectionField& field, PhaseState start, std::uint64_t k) {
  if (k < 1) throw ConfigError("need at least one cycle", "run.k");
  if (!field.domain().contains(start.r)) throw DomainError("initial position outside the domain");
  if (!field.velocity().member(start.v)) throw DomainError("initial velocity outside the velocity space");
}

void check_times(std::span<const double> times) {
  if (times.empty()) throw ConfigError("empty time grid", "run.times");
  for (double t : times)
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("times must be non-negative and finite", "run.times");
}

EstimatorResult from_values(std::string name, std::span<const double> vals, double t, CostCounters cost) {
  EstimatorResult r;
  r.estimator = std::move(name);
  r.k = vals.size();
  r.t = t;
  r.cost = cost;
  const stats::MeanSe m = stats::mean_se(vals);
  r.value = m.mean;
  r.std_error = m.std_error;
  r.log_value = m.mean > 0.0 ? std::log(m.mean) : kNegInf;
  r.rel_std_error = m.mean > 0.0 ? m.std_error / m.mean : 0.0;
  r.survivors = static_cast<std::uint64_t>(std::count_if(vals.begin(), vals.end(), [](double x) { return x > 0.0; }));
  return r;
}

EstimatorResult from_logs(std::string name, std::span<const double> logs, double t, CostCounters cost) {
  EstimatorResult r;
  r.estimator = std::move(name);
  r.k = logs.size();
  r.t = t;
  r.cost = cost;
  const stats::LogMeanSe m = stats::log_mean_se(logs);
  r.log_value = m.log_mean;
  r.value = std::exp(m.log_mean);
  r.rel_std_error = m.rel_std_error;
  r.std_error = std::exp(m.log_std_error);
  r.survivors = static_cast<std::uint64_t>(std::count_if(logs.begin(), logs.end(), [](double x) { return x > kNegInf; }));
  return r;
}

// Particles alive at the grid times, weighted by each g, plus the total
// simulation cost. Alive at tau: t0 <= tau < t1, or tau = t1 at the horizon.
struct GridObserver : NbpVisitor {
  std::span<const WeightFunction> gs;
  std::span<const double> times;  // sorted
  std::vector<double> sums;       // [g * nt + time]
  CostCounters cost;

  GridObserver(std::span<const WeightFunction> g, std::span<const double> t)
      : gs(g), times(t), sums(g.size() * t.size(), 0.0) {}

  void birth(std::uint64_t, double, Vec2, Vec2) {
    ++cost.particles_created;
    cost.weighted_cost += 1.0;
  }
  void scatter(double, Vec2, Vec2) {
    ++cost.scatter_events;
    cost.weighted_cost += 1.0;
  }
  void segment(double t0, Vec2 r0, Vec2 v, double t1, SegmentEnd end) {
    const std::size_t nt = times.size();
    for (auto it = std::lower_bound(times.begin(), times.end(), t0); it != times.end(); ++it) {
      const double tau = *it;
      if (!(tau < t1 || (tau == t1 && end == SegmentEnd::horizon))) break;
      const Vec2 r = advance(r0, v, tau - t0);
      const auto j = static_cast<std::size_t>(it - times.begin());
      for (std::size_t g = 0; g < gs.size(); ++g) sums[g * nt + j] += gs[g](r, v);
    }
  }
};

std::vector<std::size_t> sort_order(std::span<const double> times) {
  std::vector<std::size_t> idx(times.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  return idx;
}

}  // namespace

std::vector<std::vector<EstimatorResult>> psi_br_grid(const CrossSectionField& field,
                                                      std::span<const WeightFunction> gs,
                                                      std::span<const double> times, PhaseState start,
                                                      std::uint64_t k, const RunOptions& opt) {
  check_common(field, start, k);
  check_times(times);
  if (gs.empty()) throw ConfigError("no weight functions", "run.g");
  const auto order = sort_order(times);
  std::vector<double> sorted(times.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = times[order[i]];
  const double horizon = sorted.back();
  struct Cycle {
    std::vector<double> sums;
    CostCounters cost;
  };
  const PhaseState roots[1] = {start};
  auto cycles = map_cycles<Cycle>(k, opt.exec, [&](std::size_t i) {
    GridObserver obs(gs, sorted);
    const NbpRunStats st = stream_nbp(field, roots, horizon, derive_seed(opt.seed, i), opt.population_cap, obs);
    if (!st.valid)
      throw ResourceError("population cap of " + std::to_string(opt.population_cap) + " particles exceeded in cycle " +
                          std::to_string(i));
    return Cycle{std::move(obs.sums), obs.cost};
  });
  CostCounters total;
  for (const auto& c : cycles) total += c.cost;
  const std::size_t nt = sorted.size();
  std::vector<std::vector<EstimatorResult>> out(gs.size(), std::vector<EstimatorResult>(nt));
  std::vector<double> vals(k);
  for (std::size_t g = 0; g < gs.size(); ++g)
    for (std::size_t j = 0; j < nt; ++j) {
      for (std::size_t i = 0; i < k; ++i) vals[i] = cycles[i].sums[g * nt + j];
      out[g][order[j]] = from_values("psi_br", vals, sorted[j], total);
    }
  return out;
}

EstimatorResult psi_br(const CrossSectionField& field, const WeightFunction& g, double t, PhaseState start,
                       std::uint64_t k, const RunOptions& opt) {
  const double times[1] = {t};
  return psi_br_grid(field, std::span<const WeightFunction>(&g, 1), times, start, k, opt)[0][0];
}

std::vector<EstimatorResult> psi_rw_grid(const CrossSectionField& field, const WeightFunction& g,
                                         std::span<const double> times, PhaseState start, std::uint64_t k,
                                         const RunOptions& opt, double beta_scale, double g_power) {
  check_common(field, start, k);
  check_times(times);
  const double horizon = *std::max_element(times.begin(), times.end());
  const std::size_t nt = times.size();
  struct Cycle {
    std::vector<double> logs;
    std::vector<std::uint64_t> scatters;
  };
  auto cycles = map_cycles<Cycle>(k, opt.exec, [&](std::size_t i) {
    Cycle c{std::vector<double>(nt, kNegInf), std::vector<std::uint64_t>(nt, 0)};
    if (horizon == 0.0) {
      const double g0 = g(start.r, start.v);
      if (g0 > 0.0) std::fill(c.logs.begin(), c.logs.end(), g_power * std::log(g0));
      return c;
    }
    Rng rng(derive_seed(opt.seed, i));
    const NrwPath path = simulate_nrw(field, NrwRates::alpha_pi, start.r, start.v, 0.0, horizon, rng);
    for (std::size_t j = 0; j < nt; ++j) {
      const double tau = times[j];
      c.scatters[j] = static_cast<std::uint64_t>(
          std::count_if(path.events.begin() + 1, path.events.end(), [&](const PathEvent& e) { return e.t <= tau; }));
      const bool alive = tau < path.t_end || (tau == path.t_end && !path.exited);
      if (!alive) continue;
      const PhaseState s = trajectory_at(path, tau);
      const double gv = g(s.r, s.v);
      if (!(gv > 0.0)) continue;
      c.logs[j] = beta_scale * beta_integral(path, field, tau) + g_power * std::log(gv);
    }
    return c;
  });
  std::vector<EstimatorResult> out(nt);
  std::vector<double> logs(k);
  for (std::size_t j = 0; j < nt; ++j) {
    CostCounters cost;
    for (std::size_t i = 0; i < k; ++i) {
      logs[i] = cycles[i].logs[j];
      cost.scatter_events += cycles[i].scatters[j];
    }
    cost.particles_created = k;
    cost.weighted_cost = static_cast<double>(cost.scatter_events);
    out[j] = from_logs("psi_rw", logs, times[j], cost);
  }
  return out;
}

EstimatorResult psi_rw(const CrossSectionField& field, const WeightFunction& g, double t, PhaseState start,
                       std::uint64_t k, const RunOptions& opt) {
  const double times[1] = {t};
  return psi_rw_grid(field, g, times, start, k, opt)[0];
}

std::vector<double> hrw_log_weights(const HTransform& ht, const WeightFunction& g, double t, PhaseState start,
                                    std::uint64_t k, const RunOptions& opt) {
  const auto& field = ht.field();
  check_common(field, start, k);
  if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("must be non-negative and finite", "run.t");
  if (!g.dominated_by(ht.h(), field.domain()))
    throw ConfigError("g/h is unbounded near the boundary: lift h or use g with interior support", "run.g");
  return map_cycles<double>(k, opt.exec, [&](std::size_t i) {
    if (t == 0.0) {
      const double g0 = g(start.r, start.v);
      return g0 > 0.0 ? std::log(g0) : kNegInf;
    }
    Rng rng(derive_seed(opt.seed, i));
    const NrwPath path = simulate_hnrw(ht, start.r, start.v, 0.0, t, rng);
    const bool alive = t < path.t_end || (t == path.t_end && !path.exited);
    if (!alive) return kNegInf;
    const PhaseState s = trajectory_at(path, t);
    return ht.log_weight(path, t, g(s.r, s.v));
  });
}

EstimatorResult psi_hrw(const HTransform& ht, const WeightFunction& g, double t, PhaseState start, std::uint64_t k,
                        const RunOptions& opt) {
  const auto logs = hrw_log_weights(ht, g, t, start, k, opt);
  CostCounters cost;
  cost.particles_created = k;
  return from_logs("psi_hrw", logs, t, cost);
}

LambdaEstimate lambda_estimate(const EstimatorResult& r) {
  if (!(r.t > 0.0)) throw ConfigError("lambda estimate needs t > 0", "run.t");
  LambdaEstimate e;
  e.survivors = r.survivors;
  if (!(r.value > 0.0) && r.log_value == kNegInf) return e;
  e.defined = true;
  e.lambda = r.log_value / r.t;
  e.std_error = r.rel_std_error / r.t;
  return e;
}

RatioEstimate eigenfunction_ratio(const CrossSectionField& field, const WeightFunction& g, double t, PhaseState state,
                                  PhaseState reference, std::uint64_t k, const RunOptions& opt, bool crn) {
  RunOptions other = opt;
  if (!crn) other.seed = derive_seed(opt.seed, 0x7265664ULL);
  const EstimatorResult num = psi_br(field, g, t, state, k, opt);
  const EstimatorResult den = psi_br(field, g, t, reference, k, other);
  RatioEstimate r;
  if (!(den.value > 0.0)) return r;
  r.defined = true;
  r.value = num.value / den.value;
  return r;
}

RatioEstimate left_inner(const CrossSectionField& field, const WeightFunction& g, double t, PhaseState start,
                         std::uint64_t k, const RunOptions& opt) {
  const WeightFunction gs[2] = {g, WeightFunction::constant(1.0)};
  const double times[1] = {t};
  const auto res = psi_br_grid(field, gs, times, start, k, opt);
  RatioEstimate r;
  if (!(res[1][0].value > 0.0)) return r;
  r.defined = true;
  r.value = res[0][0].value / res[1][0].value;
  return r;
}

int PhaseBins::locate(const Domain& dom, Vec2 r, Vec2 v) const {
  auto cell = [](double x, double half, int n) {
    const int i = static_cast<int>(std::floor((x + half) / (2.0 * half) * n));
    return std::clamp(i, 0, n - 1);
  };
  const int ix = cell(r.x, dom.half_x(), nx);
  const int iy = dom.dim() == 2 ? cell(r.y, dom.half_y(), ny) : 0;
  double a = std::atan2(v.y, v.x);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  const int s = std::clamp(static_cast<int>(std::floor(a / (2.0 * std::numbers::pi) * sectors)), 0, sectors - 1);
  return index(ix, iy, s);
}

double Histogram::total() const { return stats::pairwise_sum(values); }

Histogram occupation_histogram(const CrossSectionField& field, const PhaseBins& bins, double t, int M,
                               PhaseState start, std::uint64_t k, const RunOptions& opt) {
  check_common(field, start, k);
  if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("must be positive and finite", "run.t");
  if (M < 1) throw ConfigError("need at least one sample time", "run.M");
  if (bins.nx < 1 || bins.ny < 1 || bins.sectors < 1) throw ConfigError("bin counts must be positive", "heatmap");
  if (field.dim() == 1 && bins.ny != 1) throw ConfigError("1D histograms use ny = 1", "heatmap.ny");
  const Domain& dom = field.domain();
  const auto nb = static_cast<std::size_t>(bins.size());
  struct Counter : NbpVisitor {
    const Domain* dom;
    const PhaseBins* bins;
    double horizon;
    int M;
    std::vector<double> counts;
    double tau(int m) const { return m * horizon / M; }
    void segment(double t0, Vec2 r0, Vec2 v, double t1, SegmentEnd end) {
      int m = std::max(1, static_cast<int>(std::ceil(t0 * M / tau(M))));
      while (m > 1 && tau(m - 1) >= t0) --m;
      while (m <= M && tau(m) < t0) ++m;
      for (; m <= M; ++m) {
        const double s = tau(m);
        if (!(s < t1 || (s == t1 && end == SegmentEnd::horizon))) break;
        counts[static_cast<std::size_t>(bins->locate(*dom, advance(r0, v, s - t0), v))] += 1.0;
      }
    }
  };
  const PhaseState roots[1] = {start};
  auto cycles = map_cycles<std::vector<double>>(k, opt.exec, [&](std::size_t i) {
    Counter c;
    c.dom = &dom;
    c.bins = &bins;
    c.horizon = t;
    c.M = M;
    c.counts.assign(nb, 0.0);
    const NbpRunStats st = stream_nbp(field, roots, t, derive_seed(opt.seed, i), opt.population_cap, c);
    if (!st.valid) throw ResourceError("population cap exceeded in cycle " + std::to_string(i));
    return std::move(c.counts);
  });
  Histogram h;
  h.bins = bins;
  h.t = t;
  h.M = M;
  h.k = k;
  h.values.assign(nb, 0.0);
  std::vector<double> col(k);
  const double norm = 1.0 / (static_cast<double>(k) * M);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t i = 0; i < k; ++i) col[i] = cycles[i][b];
    h.values[b] = stats::pairwise_sum(col) * norm;
  }
  return h;
}

void write_heatmap_csv(std::ostream& os, const Histogram& h) {
  os << "bin_x,bin_y,sector,value\n";
  if (h.values.empty()) return;
  for (int ix = 0; ix < h.bins.nx; ++ix)
    for (int iy = 0; iy < h.bins.ny; ++iy)
      for (int s = 0; s < h.bins.sectors; ++s) os << fmt::format("{},{},{},{}\n", ix, iy, s, h.at(ix, iy, s));
}

std::vector<MartingalePoint> martingale_diag(const CrossSectionField& field, const WeightFunction& phi, double lambda,
                                             std::span<const double> times, PhaseState start, std::uint64_t k,
                                             const RunOptions& opt) {
  const double phi0 = phi(start.r, start.v);
  if (!(phi0 > 0.0)) throw DomainError("martingale_diag: phi vanishes at the initial state");
  const auto res = psi_br_grid(field, std::span<const WeightFunction>(&phi, 1), times, start, k, opt);
  std::vector<MartingalePoint> out;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double scale = std::exp(-lambda * times[j]) / phi0;
    out.push_back({times[j], res[0][j].value * scale, res[0][j].std_error * scale});
  }
  return out;
}

SecondMomentRate second_moment_rate(const CrossSectionField& field, const WeightFunction& g,
                                    std::span<const double> times, PhaseState start, std::uint64_t k,
                                    const RunOptions& opt) {
  if (times.size() < 2) throw ConfigError("need at least two grid times", "run.times");
  const auto first = psi_rw_grid(field, g, times, start, k, opt);
  const auto second = psi_rw_grid(field, g, times, start, k, opt, 2.0, 2.0);
  std::vector<double> x(times.begin(), times.end()), y1, y2;
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (first[j].log_value == kNegInf) throw ExtinctionError("no surviving paths at t = " + std::to_string(times[j]));
    y1.push_back(first[j].log_value);
    y2.push_back(second[j].log_value);
  }
  SecondMomentRate out;
  out.lambda = stats::ols(x, y1).slope;
  out.lambda1 = stats::ols(x, y2).slope;
  out.beta_min = field.beta_min();
  out.beta_max = field.beta_max();
  return out;
}

std::vector<CostPoint> nbp_cost_grid(const CrossSectionField& field, double f, double g, std::span<const double> times,
                                     PhaseState start, std::uint64_t k, const RunOptions& opt) {
  check_common(field, start, k);
  check_times(times);
  std::vector<double> sorted(times.begin(), times.end());
  std::sort(sorted.begin(), sorted.end());
  const PhaseState roots[1] = {start};
  auto cycles = map_cycles<std::vector<CostCounters>>(k, opt.exec, [&](std::size_t i) {
    CostGridVisitor vis(field, f, g, sorted);
    const NbpRunStats st = stream_nbp(field, roots, sorted.back(), derive_seed(opt.seed, i), opt.population_cap, vis);
    if (!st.valid) throw ResourceError("population cap exceeded in cycle " + std::to_string(i));
    return vis.counters();
  });
  std::vector<CostPoint> out;
  std::vector<double> c(k), cpu(k), mem(k), res(k), comp(k);
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    for (std::size_t i = 0; i < k; ++i) {
      const CostCounters& cc = cycles[i][j];
      c[i] = cc.weighted_cost;
      cpu[i] = static_cast<double>(cc.scatter_events);
      mem[i] = static_cast<double>(cc.particles_created);
      comp[i] = cc.compensator;
      res[i] = cc.weighted_cost - g - cc.compensator;
    }
    out.push_back({sorted[j], stats::mean_se(c), stats::mean_se(cpu), stats::mean_se(mem), stats::mean_se(res),
                   stats::mean_se(comp)});
  }
  return out;
}

std::vector<CostPoint> nrw_cost_grid(const CrossSectionField& field, const WeightFunction& f,
                                     std::span<const double> times, PhaseState start, std::uint64_t k,
                                     const RunOptions& opt) {
  check_common(field, start, k);
  check_times(times);
  std::vector<double> sorted(times.begin(), times.end());
  std::sort(sorted.begin(), sorted.end());
  const double horizon = sorted.back();
  if (!(horizon > 0.0)) throw ConfigError("need a positive horizon", "run.times");
  const std::size_t nt = sorted.size();
  struct Row {
    std::vector<double> c, cpu, a;
  };
  const AngularQuadrature quad;
  auto cycles = map_cycles<Row>(k, opt.exec, [&](std::size_t i) {
    Rng rng(derive_seed(opt.seed, i));
    const NrwPath path = simulate_nrw(field, NrwRates::alpha_pi, start.r, start.v, 0.0, horizon, rng);
    Row r{std::vector<double>(nt), std::vector<double>(nt), std::vector<double>(nt)};
    for (std::size_t j = 0; j < nt; ++j) {
      r.c[j] = track_cost_nrw(path, f, sorted[j]);
      r.cpu[j] = static_cast<double>(std::count_if(path.events.begin() + 1, path.events.end(),
                                                   [&](const PathEvent& e) { return e.t <= sorted[j]; }));
      r.a[j] = compensator_nrw(path, field, f, sorted[j], quad);
    }
    return r;
  });
  std::vector<CostPoint> out;
  std::vector<double> c(k), cpu(k), res(k), comp(k), mem(k, 1.0);
  for (std::size_t j = 0; j < nt; ++j) {
    for (std::size_t i = 0; i < k; ++i) {
      c[i] = cycles[i].c[j];
      cpu[i] = cycles[i].cpu[j];
      comp[i] = cycles[i].a[j];
      res[i] = c[i] - comp[i];
    }
    out.push_back({sorted[j], stats::mean_se(c), stats::mean_se(cpu), stats::mean_se(mem), stats::mean_se(res),
                   stats::mean_se(comp)});
  }
  return out;
}

void write_estimator_csv_header(std::ostream& os) { os << "estimator,t,k,value,std_error,survivors,lambda_hat\n"; }

void write_estimator_csv(std::ostream& os, const EstimatorResult& r) {
  std::string lam = "nan";
  if (r.t > 0.0) {
    const LambdaEstimate e = lambda_estimate(r);
    if (e.defined) lam = fmt::format("{}", e.lambda);
  }
  os << fmt::format("{},{},{},{},{},{},{}\n", r.estimator, r.t, r.k, r.value, r.std_error, r.survivors, lam);
}

}  // namespace ntmc

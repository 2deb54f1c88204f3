#include "oplab/domination.hpp"

#include <algorithm>
#include <cmath>

namespace oplab {

namespace {

Vector table_lookup(const std::vector<double>& times,
                    const std::vector<Vector>& values, TimeDomain domain,
                    double t) {
  auto it = std::lower_bound(times.begin(), times.end(), t - 1e-12);
  if (it == times.end()) return values.back();
  size_t idx = static_cast<size_t>(it - times.begin());
  if (domain == TimeDomain::discrete || idx == 0 ||
      std::abs(times[idx] - t) < 1e-12)
    return values[idx];
  // linear interpolation between samples for continuous tables
  const double t0 = times[idx - 1], t1 = times[idx];
  const double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * values[idx - 1] + w * values[idx];
}

}  // namespace

Trajectory Trajectory::orbit(const Semigroup& sg, Vector x0, NormSpec norm,
                             std::optional<NormSpec> dplus_norm) {
  require_dim(x0, sg.dim(), "trajectory");
  Trajectory tr(norm, dplus_norm.value_or(norm));
  tr.domain_ = sg.is_discrete() ? TimeDomain::discrete : TimeDomain::continuous;
  tr.cone_ = sg.cone;
  tr.backing_sg_ = sg;
  tr.backing_x0_ = x0;
  tr.sampler_ = [sg, x0](double t) { return Vector(evaluate(sg, t) * x0); };
  return tr;
}

Trajectory Trajectory::cesaro_orbit(const Semigroup& sg, Vector x0,
                                    NormSpec norm,
                                    std::optional<NormSpec> dplus) {
  Trajectory tr = orbit(sg, std::move(x0), std::move(norm), std::move(dplus));
  const Semigroup s = *tr.backing_sg_;
  const Vector x = tr.backing_x0_;
  tr.is_cesaro_ = true;
  tr.sampler_ = [s, x](double t) {
    return Vector(cesaro_mean(s, t).mean * x);
  };
  return tr;
}

Trajectory Trajectory::constant(Vector x, TimeDomain domain,
                                std::shared_ptr<const Cone> cone, NormSpec norm,
                                std::optional<NormSpec> dplus) {
  Trajectory tr(norm, dplus.value_or(norm));
  tr.domain_ = domain;
  tr.cone_ = std::move(cone);
  tr.is_constant_ = true;
  tr.sampler_ = [x](double) { return x; };
  return tr;
}

Trajectory Trajectory::table(std::vector<double> times,
                             std::vector<Vector> values, TimeDomain domain,
                             std::shared_ptr<const Cone> cone, NormSpec norm) {
  if (times.size() != values.size() || times.empty())
    throw PreconditionViolation("trajectory table: times/values mismatch");
  if (!std::is_sorted(times.begin(), times.end()))
    throw PreconditionViolation("trajectory table: times must increase");
  Trajectory tr(norm, norm);
  tr.domain_ = domain;
  tr.cone_ = std::move(cone);
  tr.table_times_ = times;
  tr.table_values_ = values;
  tr.sampler_ = [times = std::move(times), values = std::move(values),
                 domain](double t) {
    return table_lookup(times, values, domain, t);
  };
  return tr;
}

Trajectory Trajectory::cesaro() const {
  if (is_constant_ || is_cesaro_) return *this;
  if (backing_sg_) return cesaro_orbit(*backing_sg_, backing_x0_, norm_, dplus_norm_);
  if (!table_times_.empty()) {
    // running average (discrete) / trapezoid means (continuous)
    std::vector<Vector> means;
    means.reserve(table_values_.size());
    if (domain_ == TimeDomain::discrete) {
      Vector acc = Vector::Zero(table_values_.front().size());
      for (size_t i = 0; i < table_values_.size(); ++i) {
        acc += table_values_[i];
        means.push_back(acc / static_cast<double>(i + 1));
      }
    } else {
      Vector acc = Vector::Zero(table_values_.front().size());
      means.push_back(table_values_.front());
      for (size_t i = 1; i < table_values_.size(); ++i) {
        acc += 0.5 * (table_times_[i] - table_times_[i - 1]) *
               (table_values_[i] + table_values_[i - 1]);
        means.push_back(acc / (table_times_[i] - table_times_.front() + 1e-300));
      }
    }
    Trajectory tr(norm_, dplus_norm_);
    tr.domain_ = domain_;
    tr.cone_ = cone_;
    tr.is_cesaro_ = true;
    tr.table_times_ = table_times_;
    tr.table_values_ = means;
    auto times = table_times_;
    auto dom = domain_;
    tr.sampler_ = [times, means, dom](double t) {
      return table_lookup(times, means, dom, t);
    };
    return tr;
  }
  throw UnsupportedPair("trajectory: no Cesaro form for this sampler");
}

double domination_error(const Trajectory& f, const Trajectory& g, double t) {
  Vector diff = g(t) - f(t);
  return distance_to_cone(diff, f.cone(), f.dplus_norm()).distance;
}

namespace {

std::vector<double> window_grid(TimeDomain domain,
                                std::pair<double, double> window) {
  return geometric_grid(domain == TimeDomain::discrete, window.first,
                        window.second);
}

DominationReport one_direction(const Trajectory& f, const Trajectory& g,
                               std::pair<double, double> window, double tol) {
  DominationReport rep;
  auto grid = window_grid(f.domain(), window);
  for (double t : grid)
    rep.error_samples.emplace_back(t, domination_error(f, g, t));
  const size_t n = rep.error_samples.size();
  if (n == 0) return rep;
  const size_t tail_start = n / 2;  // tail window: last half of the grid
  double sup_tail = 0.0, min_tail = std::numeric_limits<double>::infinity();
  for (size_t i = tail_start; i < n; ++i) {
    sup_tail = std::max(sup_tail, rep.error_samples[i].second);
    min_tail = std::min(min_tail, rep.error_samples[i].second);
  }
  rep.sup_tail = sup_tail;
  // log-log least squares for the decay exponent
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (auto& [t, e] : rep.error_samples) {
    if (t <= 0) continue;
    const double lx = std::log(t), ly = std::log(std::max(e, 1e-300));
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++cnt;
  }
  if (cnt >= 2 && sxx * cnt - sx * sx > 1e-12)
    rep.trend = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  if (sup_tail < tol)
    rep.verdict = DominationReport::Verdict::dominated;
  else if (min_tail > 10.0 * tol && rep.trend > -0.05)
    rep.verdict = DominationReport::Verdict::not_dominated;
  else
    rep.verdict = DominationReport::Verdict::inconclusive;
  return rep;
}

}  // namespace

DominationReport check_asymptotic_domination(const Trajectory& f,
                                             const Trajectory& g,
                                             std::pair<double, double> window,
                                             double tol, bool symmetric) {
  if (window.second <= window.first)
    throw PreconditionViolation("check_asymptotic_domination: t1 > t0");
  DominationReport rep = one_direction(f, g, window, tol);
  if (symmetric) {
    DominationReport back = one_direction(g, f, window, tol);
    rep.reverse_samples = std::move(back.error_samples);
    rep.reverse_verdict = back.verdict;
  }
  return rep;
}

Vector error_decomposition(const Trajectory& f, const Trajectory& g,
                           double t) {
  const Cone& K = f.cone();
  Vector w = g(t) - f(t);
  DistanceResult proj = distance_to_cone(w, K, f.dplus_norm());
  Vector rem = proj.minimizer - w;  // candidate error, = minimizer residual
  if (K.contains(rem, 1e-9)) return rem;
  Decomposition dec = positive_decompose(rem, K, f.norm());
  return dec.y;
}

SummableSubsequence extract_summable_subsequence(const Trajectory& f,
                                                 const Trajectory& g,
                                                 double horizon) {
  const double t_lo = f.domain() == TimeDomain::discrete ? 1.0 : 0.5;
  DominationReport rep =
      check_asymptotic_domination(f, g, {t_lo, horizon}, 1e-6, false);
  if (rep.verdict != DominationReport::Verdict::dominated)
    throw PreconditionViolation(
        "extract_summable_subsequence: f is not dominated by g on the horizon");

  // scan grid: dense at the front, geometric afterwards
  std::vector<double> scan;
  if (f.domain() == TimeDomain::discrete) {
    for (double t = 1; t <= std::min(horizon, 512.0); t += 1.0) scan.push_back(t);
    for (double t = 1024; t <= horizon; t *= 2.0) scan.push_back(t);
  } else {
    const double dense_end = std::min(horizon, 64.0);
    const int steps = 768;
    for (int i = 0; i <= steps; ++i)
      scan.push_back(t_lo + (dense_end - t_lo) * i / steps);
    for (double t = dense_end * 2.0; t <= horizon; t *= 2.0) scan.push_back(t);
  }

  SummableSubsequence out;
  std::vector<Vector> errors;
  double prev_t = -std::numeric_limits<double>::infinity();
  int k = 0;
  for (double t : scan) {
    if (t <= prev_t) continue;
    Vector r = error_decomposition(f, g, t);
    if (f.norm().eval(r) <= std::pow(2.0, -k)) {
      out.times.push_back(t);
      errors.push_back(r);
      prev_t = t;
      ++k;
    }
  }
  if (out.times.size() < 3)
    throw HorizonTooShort("extract_summable_subsequence: fewer than 3 "
                          "qualifying times before the horizon");
  out.q = Vector::Zero(errors.front().size());
  for (const auto& r : errors) out.q += r;
  for (size_t i = 0; i < out.times.size(); ++i) {
    Vector gap = g(out.times[i]) + out.q - f(out.times[i]);
    if (!f.cone().contains(gap, 1e-9))
      throw Error("extract_summable_subsequence: verification failed");
  }
  return out;
}

CesaroInheritance cesaro_inheritance(const Trajectory& f, const Trajectory& g,
                                     std::pair<double, double> window,
                                     double tol) {
  Trajectory fc = f.cesaro();
  Trajectory gc = g.cesaro();
  CesaroInheritance out;
  out.report = check_asymptotic_domination(fc, gc, window, tol);

  // proof-side bound: d_+(mean difference) <= Cesaro mean of pointwise d_+
  auto grid = window_grid(f.domain(), window);
  for (double t : grid) {
    if (t > 4096.0) break;  // keep the quadrature of the right side exact-ish
    const double lhs = domination_error(fc, gc, t);
    double rhs = 0.0;
    if (f.domain() == TimeDomain::discrete) {
      const long long n = static_cast<long long>(std::llround(t));
      for (long long kk = 0; kk < n; ++kk)
        rhs += domination_error(f, g, static_cast<double>(kk));
      rhs /= static_cast<double>(n);
    } else {
      const int panels = 512;
      double acc = 0.0;
      double prev = domination_error(f, g, 0.0);
      for (int i = 1; i <= panels; ++i) {
        const double s = t * i / panels;
        const double cur = domination_error(f, g, s);
        acc += 0.5 * (prev + cur) * (t / panels);
        prev = cur;
      }
      rhs = acc / t + 1e-4 * t / panels;  // trapezoid slack
    }
    out.bound_trace.emplace_back(t, lhs, rhs);
    if (lhs > rhs + 1e-9) out.bound_ok = false;
  }
  return out;
}

}  // namespace oplab

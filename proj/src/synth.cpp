#include "optinet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "optinet/error.hpp"
#include "optinet/random.hpp"

namespace optinet {

double RadialSpec::default_t(int d) {
  if (d < 1) throw InvalidArgument("RadialSpec: d must be >= 1");
  return 1.0 - 1.0 / (3.0 * std::pow(2.0, 1.0 / d));
}

RadialSpec RadialSpec::with_default_t(int d) {
  RadialSpec s;
  s.d = d;
  s.t = default_t(d);
  return s;
}

double RadialSpec::c1() const { return std::min(1.0 / t, 1.0 / (1.0 - t)); }

void RadialSpec::validate() const {
  if (d < 1) throw InvalidArgument("RadialSpec: d must be >= 1");
  if (!(t > 0.0 && t < 1.0)) throw InvalidArgument("RadialSpec: t must lie in (0, 1)");
}

double p1_radial(const RadialSpec& spec, double r) {
  if (spec.radial_p1) return spec.radial_p1(r);
  if (r <= spec.t) return r / (2.0 * spec.t);
  return 0.5 + (r - spec.t) / (2.0 * (1.0 - spec.t));
}

namespace {

double radius_checked(const RadialSpec& spec, PointView x) {
  if (x.size() != static_cast<std::size_t>(spec.d))
    throw InvalidArgument("radial spec: point dimension " + std::to_string(x.size()) +
                          " != " + std::to_string(spec.d));
  double s = 0.0;
  for (double v : x) s += v * v;
  const double r = std::sqrt(s);
  // Slack for points renormalized onto the sphere, which may round past 1.
  if (r > 1.0 + 1e-12) throw InvalidArgument("radial spec: point outside the unit ball");
  return std::min(r, 1.0);
}

}  // namespace

double p1(const RadialSpec& spec, PointView x) {
  return p1_radial(spec, radius_checked(spec, x));
}

double eta(const RadialSpec& spec, PointView x) { return std::abs(2.0 * p1(spec, x) - 1.0); }

double delta(const RadialSpec& spec, PointView x) {
  return std::abs(radius_checked(spec, x) - spec.t);
}

Label bayes_label(const RadialSpec& spec, PointView x) { return p1(spec, x) > 0.5 ? 1 : 0; }

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

double bayes_error(const RadialSpec& spec) {
  spec.validate();
  const double d = spec.d;
  auto integrand = [&](double r) {
    const double p = p1_radial(spec, r);
    return std::min(p, 1.0 - p) * d * std::pow(r, d - 1.0);
  };
  // Split at the kink; each half gets half the tolerance.
  return adaptive_simpson(integrand, 0.0, spec.t, 5e-9) +
         adaptive_simpson(integrand, spec.t, 1.0, 5e-9);
}

void sample_unit_ball(Rng& rng, std::span<double> out) {
  const std::size_t d = out.size();
  double norm = 0.0;
  do {
    norm = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      out[k] = rng.normal();
      norm += out[k] * out[k];
    }
  } while (norm == 0.0);
  const double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  const double f = r / std::sqrt(norm);
  for (std::size_t k = 0; k < d; ++k) out[k] *= f;
}

LabeledDataset sample(const RadialSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw InvalidArgument("sample: n must be >= 1");
  Rng rng(seed);
  LabeledDataset data;
  data.points = PointSet(static_cast<std::size_t>(spec.d));
  data.points.reserve(n);
  data.labels.reserve(n);
  data.num_classes = 2;
  std::vector<double> x(static_cast<std::size_t>(spec.d));
  for (std::size_t i = 0; i < n; ++i) {
    sample_unit_ball(rng, x);
    // Rounding can push |x| a hair past 1; pull it back inside.
    double s = 0.0;
    for (double v : x) s += v * v;
    if (s > 1.0) {
      const double f = 1.0 / std::sqrt(s);
      for (auto& v : x) v *= f;
    }
    data.points.push_back(x);
    data.labels.push_back(rng.uniform() < p1(spec, x) ? 1 : 0);
  }
  return data;
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

ConditionReport check_conditions(const RadialSpec& spec, std::size_t n_probe,
                                 std::uint64_t seed, const ConditionLimits& limits) {
  spec.validate();
  if (n_probe < 10) throw InvalidArgument("check_conditions: n_probe must be >= 10");
  ConditionReport rep;
  rep.n_probe = n_probe;
  rep.seed = seed;
  const auto d = static_cast<std::size_t>(spec.d);
  Rng rng(derive_seed(seed, {0}));

  PointSet probes(d);
  probes.reserve(n_probe);
  std::vector<double> x(d), y(d);
  for (std::size_t i = 0; i < n_probe; ++i) {
    sample_unit_ball(rng, x);
    probes.push_back(x);
  }
  auto radius = [](PointView p) {
    double s = 0.0;
    for (double v : p) s += v * v;
    return std::min(1.0, std::sqrt(s));
  };

  // Strong density: f = 1 / vol(B) on the ball. The mass of B(x, r) is
  // f * vol(B(x, r) n B), estimated by sampling inside B(x, r) and counting
  // the hits that land in the support, so kappa = vol(B_1) * hit fraction.
  rep.density_min = 1.0 / unit_ball_volume(spec.d);
  {
    Rng crng(derive_seed(seed, {1}));
    const std::size_t centers = std::min<std::size_t>(100, n_probe);
    Point y(static_cast<std::size_t>(spec.d));
    double kappa = std::numeric_limits<double>::infinity();
    for (double r : {0.25, 0.5}) {
      for (std::size_t c = 0; c < centers; ++c) {
        sample_unit_ball(crng, x);
        std::size_t inside = 0;
        for (std::size_t i = 0; i < n_probe; ++i) {
          sample_unit_ball(crng, y);
          double s = 0.0;
          for (std::size_t j = 0; j < y.size(); ++j) {
            y[j] = x[j] + r * y[j];
            s += y[j] * y[j];
          }
          inside += s <= 1.0 ? 1 : 0;
        }
        const double frac = static_cast<double>(inside) / static_cast<double>(n_probe);
        kappa = std::min(kappa, unit_ball_volume(spec.d) * frac);
      }
    }
    rep.mmc_kappa_min = kappa;
    rep.sdc_pass = rep.density_min > 0.0 && kappa >= limits.mmc_kappa;
  }

  // Tsybakov with alpha = 1.
  {
    std::vector<double> etas(n_probe);
    for (std::size_t i = 0; i < n_probe; ++i)
      etas[i] = std::abs(2.0 * p1_radial(spec, radius(probes[i])) - 1.0);
    for (int e = 1; e <= 8; ++e) {
      const double s = std::ldexp(1.0, -e);
      const auto cnt = std::count_if(etas.begin(), etas.end(), [&](double v) { return v <= s; });
      const double ratio = static_cast<double>(cnt) / static_cast<double>(n_probe) / s;
      rep.tsybakov_grid.push_back(s);
      rep.tsybakov_ratio.push_back(ratio);
      rep.tsybakov_max_ratio = std::max(rep.tsybakov_max_ratio, ratio);
    }
    rep.tsybakov_pass = rep.tsybakov_max_ratio <= limits.tsybakov_c;
  }

  // Hoelder with beta = 1. p1 is radial, so radial displacements realize the
  // largest ratio; a pair straddling t is always included at each scale.
  {
    for (double h : {1e-2, 1e-3, 1e-4}) {
      double worst = 0.0;
      auto probe_pair = [&](double r0, double r1) {
        const double a = p1_radial(spec, r0), b = p1_radial(spec, r1);
        worst = std::max(worst, std::abs(a - b) / std::abs(r0 - r1));
      };
      for (std::size_t i = 0; i < n_probe; ++i) {
        const double r = radius(probes[i]);
        const double r2 = r + h <= 1.0 ? r + h : r - h;
        probe_pair(r, r2);
      }
      probe_pair(std::max(0.0, spec.t - 0.5 * h), std::min(1.0, spec.t + 0.5 * h));
      rep.holder_scales.push_back(h);
      rep.holder_ratio_max.push_back(worst);
      rep.holder_max = std::max(rep.holder_max, worst);
    }
    rep.holder_pass = rep.holder_max <= limits.holder_c;
  }

  // Geometric margin with xi = 1.
  {
    const double c1 = spec.c1();
    double ratio_min = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (std::size_t i = 0; i < n_probe; ++i) {
      const double r = radius(probes[i]);
      const double e = std::abs(2.0 * p1_radial(spec, r) - 1.0);
      const double dl = std::abs(r - spec.t);
      if (dl > 1e-12) ratio_min = std::min(ratio_min, e / dl);
      if (e < std::min(c1 * dl, 1.0) - 1e-12) ok = false;
    }
    rep.gmc_ratio_min = ratio_min;
    rep.gmc_pass = ok;
  }
  return rep;
}

nlohmann::json condition_report_to_json(const ConditionReport& r) {
  return {{"n_probe", r.n_probe},
          {"seed", r.seed},
          {"sdc", {{"density_min", r.density_min}, {"mmc_kappa_min", r.mmc_kappa_min},
                   {"pass", r.sdc_pass}}},
          {"tsybakov", {{"grid", r.tsybakov_grid}, {"ratio", r.tsybakov_ratio},
                        {"max_ratio", r.tsybakov_max_ratio}, {"pass", r.tsybakov_pass}}},
          {"holder", {{"scales", r.holder_scales}, {"ratio_max", r.holder_ratio_max},
                      {"max", r.holder_max}, {"pass", r.holder_pass}}},
          {"gmc", {{"ratio_min", r.gmc_ratio_min}, {"pass", r.gmc_pass}}},
          {"all_pass", r.all_pass()}};
}

}  // namespace optinet

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include "optinet/core.hpp"
#include "optinet/random.hpp"

namespace optinet {

/// Two-class radial family on the unit ball of R^d with uniform marginal.
///
/// P(Y = 1 | x) rises linearly in |x| from 0 at the origin to 1/2 at the
/// boundary radius t, then linearly to 1 at the unit sphere:
///   p1(r) = r / (2t)                        for r <= t
///   p1(r) = 1/2 + (r - t) / (2 (1 - t))     for t < r <= 1
/// The Bayes boundary is the sphere |x| = t. The family satisfies the strong
/// density, Hoelder (beta = 1), Tsybakov (alpha = 1) and geometric margin
/// (xi = 1, c1 = min(1/t, 1/(1-t))) conditions.
struct RadialSpec {
  int d = 2;
  double t = 0.0;
  /// Replaces the piecewise-linear p1(r); used to build deliberate violations.
  std::function<double(double)> radial_p1;

  /// Spec with the default boundary 1 - 1 / (3 * 2^(1/d)), which balances
  /// the two class masses.
  static RadialSpec with_default_t(int d);
  static double default_t(int d);

  double c1() const;
  void validate() const;
};

double p1_radial(const RadialSpec& spec, double r);

/// P(Y = 1 | x). Throws InvalidArgument when |x| > 1.
double p1(const RadialSpec& spec, PointView x);
/// |p1 - p0| = |2 p1 - 1|.
double eta(const RadialSpec& spec, PointView x);
/// Distance to the decision boundary: | |x| - t |.
double delta(const RadialSpec& spec, PointView x);
/// 1 iff p1(x) > 1/2; ties go to class 0.
Label bayes_label(const RadialSpec& spec, PointView x);

/// E[min(p1, 1 - p1)] by adaptive Simpson on the radial density d r^(d-1),
/// split at t, to 1e-8 absolute.
double bayes_error(const RadialSpec& spec);

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 50);

/// Draws one point uniformly from the unit ball: normalized Gaussian
/// direction times U^(1/d).
void sample_unit_ball(Rng& rng, std::span<double> out);

/// n i.i.d. pairs: X uniform on the unit ball, Y = 1 with probability p1(X).
LabeledDataset sample(const RadialSpec& spec, std::size_t n, std::uint64_t seed);

struct ConditionReport {
  std::size_t n_probe = 0;
  std::uint64_t seed = 0;

  // Strong density: uniform density on the ball, and minimal-mass ratios
  // P(B(x, r)) / (f r^d) measured on probe balls.
  double density_min = 0.0;
  double mmc_kappa_min = 0.0;
  bool sdc_pass = false;

  // Tsybakov: P(eta <= s) / s^alpha over a dyadic grid of s.
  std::vector<double> tsybakov_grid;
  std::vector<double> tsybakov_ratio;
  double tsybakov_max_ratio = 0.0;
  bool tsybakov_pass = false;

  // Hoelder (beta = 1): max |p1(x) - p1(x')| / |x - x'| per probe scale.
  std::vector<double> holder_scales;
  std::vector<double> holder_ratio_max;
  double holder_max = 0.0;
  bool holder_pass = false;

  // Geometric margin (xi = 1): min eta / delta, and eta >= min(c1 delta, 1).
  double gmc_ratio_min = 0.0;
  bool gmc_pass = false;

  bool all_pass() const { return sdc_pass && tsybakov_pass && holder_pass && gmc_pass; }
};

struct ConditionLimits {
  double tsybakov_c = 10.0;  // bound on P(eta <= s) / s
  double holder_c = 10.0;    // bound on the Lipschitz ratio
  double mmc_kappa = 0.05;   // lower bound on the minimal-mass ratio
};

ConditionReport check_conditions(const RadialSpec& spec, std::size_t n_probe,
                                 std::uint64_t seed, const ConditionLimits& limits = {});

nlohmann::json condition_report_to_json(const ConditionReport& report);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

}  // namespace optinet

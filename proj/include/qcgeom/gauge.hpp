#pragma once

#include "qcgeom/common.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qcgeom {

enum class GaugeKind { Power, JonesMakarov, LogPower, Tabulated };

const char* to_string(GaugeKind kind);

// Increasing gauge phi on (0, t_max] with inverse u. Evaluation is done in
// log coordinates so that very small arguments do not underflow.
class GaugeFunction {
 public:
  static GaugeFunction power(double a, double t_max = 1.0);
  static GaugeFunction jones_makarov(double c, double s, double t_max = 1.0);
  // psi(r) = r^n (log 1/r)^C; t_max defaults to half the turning point exp(-C/n).
  static GaugeFunction log_power(double n, double C, std::optional<double> t_max = std::nullopt);
  // Breakpoints are [log2 t, log2 phi(t)]; t_max is the last abscissa.
  static GaugeFunction tabulated(std::vector<std::array<double, 2>> log2_points);

  GaugeKind kind() const { return kind_; }
  double t_max() const { return t_max_; }
  double param(int i) const { return p_[i]; }
  const std::vector<std::array<double, 2>>& breakpoints() const { return log2_points_; }

  // Doubling constant: sup phi(2t)/phi(t) over a log-spaced sample.
  double beta() const;

  double log_phi(double log_t) const;
  double log_u(double log_y) const;
  // d log phi / d log t at t = exp(log_t).
  double elasticity(double log_t) const;
  double log_t_max() const { return log_t_max_; }
  double log_y_max() const { return log_phi(log_t_max_); }

 private:
  GaugeFunction() = default;
  double tab_log_phi(double x) const;
  double tab_log_u(double y) const;
  double tab_elasticity(double x) const;

  GaugeKind kind_ = GaugeKind::Power;
  double p_[2] = {1.0, 0.0};
  double t_max_ = 1.0;
  double log_t_max_ = 0.0;
  std::vector<std::array<double, 2>> log2_points_;
  std::vector<double> xs_, ys_, slopes_;
  std::vector<bool> sparse_;
};

double eval_phi(const GaugeFunction& g, double t);
double eval_phi_prime(const GaugeFunction& g, double t);
double eval_u(const GaugeFunction& g, double y);
double eval_u_prime(const GaugeFunction& g, double y);
// u(y)/u'(y), evaluated without forming u' so that it survives tiny u.
double u_over_u_prime(const GaugeFunction& g, double y);

struct ConditionReport {
  bool prop1_holds = false;
  int prop1_direction = 0;  // +1 non-decreasing, -1 non-increasing, 0 constant
  bool prop2_holds = false;
  bool prop3_holds = false;
  double prop3_beta_hat = 0.0;
  double doubling_estimate = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  int samples = 0;
  std::vector<std::string> warnings;
};

ConditionReport check_conditions(const GaugeFunction& g, int n, int sample_count);

struct QuadratureOptions {
  int nodes_per_decade = 64;
};

double divergence_integral(const GaugeFunction& g, int n, double r, double r0,
                           const QuadratureOptions& opt = {});
double divergence_integral_log(const GaugeFunction& g, int n, double log_r, double log_r0,
                               const QuadratureOptions& opt = {});
double jones_integral(const GaugeFunction& g, double r, double r0, const QuadratureOptions& opt = {});
double jones_integral_log(const GaugeFunction& g, double log_r, double log_r0,
                          const QuadratureOptions& opt = {});

enum class Divergence { Divergent, Convergent, Inconclusive };

const char* to_string(Divergence d);

struct ClassifierOptions {
  double floor = 1e-3;
  double steady_ratio = 0.97;
  double decay_ratio = 0.9;
  QuadratureOptions quadrature = {};
};

struct BlockClassification {
  Divergence verdict = Divergence::Inconclusive;
  std::vector<int> js;
  std::vector<double> blocks;
};

// Applies the block rule to values I(2^{-2j}, 2^{-j}) at three increasing j.
Divergence classify_blocks(std::span<const double> blocks, const ClassifierOptions& opt = {});

BlockClassification classify_divergence(const GaugeFunction& g, int n, int j_max,
                                        const ClassifierOptions& opt = {});
BlockClassification classify_jones(const GaugeFunction& g, int j_max, const ClassifierOptions& opt = {});

// psi(r) = C1 r^n exp(C2 I(r, r0)) tabulated on the dyadic grid down to 2^{-j_max}.
GaugeFunction psi_from_phi(const GaugeFunction& g, int n, double C1, double C2, double r0,
                           int j_max = 60, const QuadratureOptions& opt = {});

struct TechLemmaReport {
  std::vector<double> r;
  std::vector<double> log_integral;
  std::vector<double> ratio;
  double c_hat = 0.0;
  bool stable = false;
};

TechLemmaReport tech_lemma_check(const GaugeFunction& g, int n, std::span<const double> r_list);

Dyadic alpha_from_gauge(const GaugeFunction& g, double c, int k, int depth_cap = 60);

}  // namespace qcgeom

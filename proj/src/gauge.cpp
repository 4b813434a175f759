#include "qcgeom/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qcgeom {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kLn10 = std::numbers::ln10;
constexpr double kSlack = 1e-12;

bool finite(double v) { return std::isfinite(v); }

// Trapezoid rule of f over [a, b] with at least nodes_per_decade intervals per
// decade of the variable exp(x).
template <typename F>
double trapezoid_log(F&& f, double a, double b, int nodes_per_decade) {
  const double decades = (b - a) / kLn10;
  const auto m = std::max<long long>(2, static_cast<long long>(std::ceil(nodes_per_decade * decades)));
  const double h = (b - a) / static_cast<double>(m);
  double sum = 0.0;
  for (long long i = 0; i <= m; ++i) {
    const double x = (i == m) ? b : a + h * static_cast<double>(i);
    const double v = f(x);
    if (!finite(v)) throw QuadratureError("integrand is not finite at log t = " + std::to_string(x));
    sum += (i == 0 || i == m) ? 0.5 * v : v;
  }
  return sum * h;
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Quadrature: return "QuadratureError";
    case ErrorKind::Underflow: return "UnderflowError";
    case ErrorKind::Resolution: return "ResolutionError";
    case ErrorKind::Unreachable: return "UnreachableError";
    case ErrorKind::Precision: return "PrecisionError";
  }
  return "Error";
}

double Dyadic::value() const { return std::ldexp(1.0, -exponent); }

const char* to_string(GaugeKind kind) {
  switch (kind) {
    case GaugeKind::Power: return "Power";
    case GaugeKind::JonesMakarov: return "JonesMakarov";
    case GaugeKind::LogPower: return "LogPower";
    case GaugeKind::Tabulated: return "Tabulated";
  }
  return "?";
}

const char* to_string(Divergence d) {
  switch (d) {
    case Divergence::Divergent: return "Divergent";
    case Divergence::Convergent: return "Convergent";
    case Divergence::Inconclusive: return "Inconclusive";
  }
  return "?";
}

static void check_t_max(double t_max) {
  if (!(t_max > 0.0 && t_max <= 1.0)) throw DomainError("t_max must lie in (0, 1]");
}

GaugeFunction GaugeFunction::power(double a, double t_max) {
  if (!(a > 0.0) || !finite(a)) throw DomainError("Power gauge needs a > 0");
  check_t_max(t_max);
  GaugeFunction g;
  g.kind_ = GaugeKind::Power;
  g.p_[0] = a;
  g.t_max_ = t_max;
  g.log_t_max_ = std::log(t_max);
  return g;
}

GaugeFunction GaugeFunction::jones_makarov(double c, double s, double t_max) {
  if (!(c > 0.0) || !(s > 0.0) || !finite(c) || !finite(s))
    throw DomainError("JonesMakarov gauge needs c > 0 and s > 0");
  check_t_max(t_max);
  GaugeFunction g;
  g.kind_ = GaugeKind::JonesMakarov;
  g.p_[0] = c;
  g.p_[1] = s;
  g.t_max_ = t_max;
  g.log_t_max_ = std::log(t_max);
  return g;
}

GaugeFunction GaugeFunction::log_power(double n, double C, std::optional<double> t_max) {
  if (!(n > 0.0) || !finite(n) || !(C >= 0.0) || !finite(C))
    throw DomainError("LogPower gauge needs n > 0 and C >= 0");
  const double turn = std::exp(-C / n);
  const double tm = t_max.value_or(std::min(0.5, 0.5 * turn));
  check_t_max(tm);
  if (C > 0.0 && !(tm < turn)) throw DomainError("LogPower gauge is not increasing up to t_max");
  if (C == 0.0 && tm >= 1.0) throw DomainError("LogPower gauge needs t_max < 1");
  GaugeFunction g;
  g.kind_ = GaugeKind::LogPower;
  g.p_[0] = n;
  g.p_[1] = C;
  g.t_max_ = tm;
  g.log_t_max_ = std::log(tm);
  return g;
}

GaugeFunction GaugeFunction::tabulated(std::vector<std::array<double, 2>> pts) {
  if (pts.size() < 2) throw DomainError("Tabulated gauge needs at least two breakpoints");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!finite(pts[i][0]) || !finite(pts[i][1])) throw DomainError("Tabulated breakpoint is not finite");
    if (i > 0 && !(pts[i][0] > pts[i - 1][0] && pts[i][1] > pts[i - 1][1]))
      throw DomainError("Tabulated breakpoints must be strictly increasing in both coordinates");
  }
  if (pts.back()[0] > kSlack) throw DomainError("Tabulated gauge must end at t_max <= 1");
  GaugeFunction g;
  g.kind_ = GaugeKind::Tabulated;
  g.log2_points_ = std::move(pts);
  const auto m = g.log2_points_.size();
  g.xs_.resize(m);
  g.ys_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    g.xs_[i] = g.log2_points_[i][0] * kLn2;
    g.ys_[i] = g.log2_points_[i][1] * kLn2;
  }
  g.slopes_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == m ? m - 1 : i + 1;
    g.slopes_[i] = (g.ys_[hi] - g.ys_[lo]) / (g.xs_[hi] - g.xs_[lo]);
  }
  g.sparse_.resize(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i)
    g.sparse_[i] = g.xs_[i + 1] - g.xs_[i] > std::log(4.0) * (1.0 + kSlack);
  g.t_max_ = std::min(1.0, std::exp2(g.log2_points_.back()[0]));
  g.log_t_max_ = g.xs_.back();
  return g;
}

double GaugeFunction::tab_log_phi(double x) const {
  const auto m = xs_.size();
  std::size_t i;
  if (x <= xs_[0]) {
    i = 0;
  } else if (x >= xs_[m - 1]) {
    i = m - 2;
  } else {
    i = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin()) - 1;
  }
  const double w = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
  return ys_[i] + w * (ys_[i + 1] - ys_[i]);
}

double GaugeFunction::tab_log_u(double y) const {
  const auto m = ys_.size();
  std::size_t i;
  if (y <= ys_[0]) {
    i = 0;
  } else if (y >= ys_[m - 1]) {
    i = m - 2;
  } else {
    i = static_cast<std::size_t>(std::upper_bound(ys_.begin(), ys_.end(), y) - ys_.begin()) - 1;
  }
  const double w = (y - ys_[i]) / (ys_[i + 1] - ys_[i]);
  return xs_[i] + w * (xs_[i + 1] - xs_[i]);
}

double GaugeFunction::tab_elasticity(double x) const {
  const auto m = xs_.size();
  auto check = [&](std::size_t seg) {
    if (seg < sparse_.size() && sparse_[seg])
      throw DomainError("Tabulated breakpoints too sparse for a derivative (spacing ratio > 4)");
  };
  if (x <= xs_[0]) {
    check(0);
    return slopes_[0];
  }
  if (x >= xs_[m - 1]) {
    check(m - 2);
    return slopes_[m - 1];
  }
  const auto i = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin()) - 1;
  if (i > 0) check(i - 1);
  check(i);
  check(i + 1);
  const double w = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
  return slopes_[i] + w * (slopes_[i + 1] - slopes_[i]);
}

double GaugeFunction::log_phi(double lt) const {
  switch (kind_) {
    case GaugeKind::Power:
      return p_[0] * lt;
    case GaugeKind::JonesMakarov:
      return -std::pow(p_[0] * std::max(0.0, -lt), 1.0 / p_[1]);
    case GaugeKind::LogPower:
      return p_[0] * lt + (p_[1] == 0.0 ? 0.0 : p_[1] * std::log(-lt));
    case GaugeKind::Tabulated:
      return tab_log_phi(lt);
  }
  return 0.0;
}

double GaugeFunction::log_u(double ly) const {
  switch (kind_) {
    case GaugeKind::Power:
      return ly / p_[0];
    case GaugeKind::JonesMakarov:
      return -std::pow(std::max(0.0, -ly), p_[1]) / p_[0];
    case GaugeKind::LogPower: {
      const double n = p_[0];
      const double C = p_[1];
      if (C == 0.0) return ly / n;
      const double xc = -C / n;
      auto f = [&](double x) { return n * x + C * std::log(-x) - ly; };
      if (f(xc) < 0.0) throw DomainError("LogPower inverse requested above the turning point");
      double hi = xc;
      double lo = std::min(ly / n, xc - 1.0);
      while (f(lo) > 0.0) lo *= 2.0;
      double x = 0.5 * (lo + hi);
      for (int it = 0; it < 200; ++it) {
        const double fx = f(x);
        if (fx > 0.0) hi = x; else lo = x;
        const double step = fx / (n + C / x);
        double next = x - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-16 * std::abs(x)) return next;
        x = next;
      }
      return x;
    }
    case GaugeKind::Tabulated:
      return tab_log_u(ly);
  }
  return 0.0;
}

double GaugeFunction::elasticity(double lt) const {
  switch (kind_) {
    case GaugeKind::Power:
      return p_[0];
    case GaugeKind::JonesMakarov: {
      const double L = -lt;
      return std::pow(p_[0] * L, 1.0 / p_[1]) / (p_[1] * L);
    }
    case GaugeKind::LogPower:
      return p_[0] + p_[1] / lt;
    case GaugeKind::Tabulated:
      return tab_elasticity(lt);
  }
  return 0.0;
}

double GaugeFunction::beta() const {
  const double lo = -60.0 * kLn2;
  const double hi = log_t_max_ - kLn2;
  if (!(hi > lo)) return std::exp(log_phi(log_t_max_) - log_phi(log_t_max_ - kLn2));
  double best = 0.0;
  constexpr int kSamples = 256;
  for (int i = 0; i < kSamples; ++i) {
    const double x = lo + (hi - lo) * i / (kSamples - 1);
    best = std::max(best, std::exp(log_phi(x + kLn2) - log_phi(x)));
  }
  return best;
}

double eval_phi(const GaugeFunction& g, double t) {
  if (!(t > 0.0) || t > g.t_max() * (1.0 + kSlack)) throw DomainError("t outside (0, t_max]");
  return std::exp(g.log_phi(std::log(t)));
}

double eval_phi_prime(const GaugeFunction& g, double t) {
  const double phi = eval_phi(g, t);
  return g.elasticity(std::log(t)) * phi / t;
}

static double checked_log_y(const GaugeFunction& g, double y) {
  if (!(y > 0.0)) throw DomainError("argument of u must be positive");
  const double ly = std::log(y);
  if (ly > g.log_y_max() + kSlack) throw DomainError("argument of u outside the range of phi");
  return ly;
}

double eval_u(const GaugeFunction& g, double y) { return std::exp(g.log_u(checked_log_y(g, y))); }

double eval_u_prime(const GaugeFunction& g, double y) {
  const double ly = checked_log_y(g, y);
  const double lu = g.log_u(ly);
  return std::exp(lu) / (y * g.elasticity(lu));
}

double u_over_u_prime(const GaugeFunction& g, double y) {
  const double ly = checked_log_y(g, y);
  return y * g.elasticity(g.log_u(ly));
}

static int monotone_direction(const std::vector<double>& v, bool& monotone) {
  bool up = true;
  bool down = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double tol = 1e-9 * std::max({std::abs(v[i]), std::abs(v[i - 1]), 1e-300});
    if (v[i] < v[i - 1] - tol) up = false;
    if (v[i] > v[i - 1] + tol) down = false;
  }
  monotone = up || down;
  if (up && down) return 0;
  return up ? 1 : (down ? -1 : 0);
}

ConditionReport check_conditions(const GaugeFunction& g, int n, int sample_count) {
  if (sample_count < 16) throw DomainError("check_conditions needs at least 16 samples");
  if (n < 2) throw DomainError("dimension n must be at least 2");
  ConditionReport rep;
  rep.samples = sample_count;
  const double lo = -60.0 * kLn2;
  double hi = g.log_t_max();
  if (g.log_y_max() >= -1.0) {
    hi = std::min(hi, g.log_u(-1.0));
    rep.warnings.push_back("range restricted to phi(t) < 1/e");
  }
  hi -= 1e-9;
  if (!(hi > lo)) {
    rep.warnings.push_back("empty sample range below phi = 1/e");
    return rep;
  }
  rep.t_lo = std::exp(lo);
  rep.t_hi = std::exp(hi);

  std::vector<double> q1, q2;
  double beta_hat = 0.0;
  bool beta_ok = true;
  const double ylo = g.log_phi(lo);
  const double yhi = g.log_phi(hi);
  for (int i = 0; i < sample_count; ++i) {
    const double w = static_cast<double>(i) / (sample_count - 1);
    const double x = lo + (hi - lo) * w;
    const double v1 = g.elasticity(x) * x / g.log_phi(x);
    const double ly = ylo + (yhi - ylo) * w;
    const double v2 = g.elasticity(g.log_u(ly));
    const double v3 = g.log_u(2.0 * ly) / g.log_u(ly);
    if (finite(v1)) q1.push_back(v1); else rep.warnings.push_back("non-finite prop1 sample");
    if (finite(v2)) q2.push_back(v2); else rep.warnings.push_back("non-finite prop2 sample");
    if (finite(v3)) beta_hat = std::max(beta_hat, v3); else beta_ok = false;
  }
  bool mono1 = false;
  rep.prop1_direction = monotone_direction(q1, mono1);
  rep.prop1_holds = mono1 && q1.size() >= 2;
  bool mono2 = false;
  const int dir2 = monotone_direction(q2, mono2);
  rep.prop2_holds = mono2 && dir2 >= 0 && q2.size() >= 2;
  rep.prop3_beta_hat = beta_ok ? beta_hat : std::numeric_limits<double>::infinity();
  rep.prop3_holds = beta_ok && beta_hat > 0.0;

  const double dhi = std::min(hi, g.log_t_max() - kLn2);
  double dbl = 0.0;
  if (dhi > lo) {
    for (int i = 0; i < sample_count; ++i) {
      const double x = lo + (dhi - lo) * i / (sample_count - 1);
      dbl = std::max(dbl, std::exp(g.log_phi(x + kLn2) - g.log_phi(x)));
    }
  }
  rep.doubling_estimate = dbl;
  return rep;
}

double divergence_integral_log(const GaugeFunction& g, int n, double log_r, double log_r0,
                               const QuadratureOptions& opt) {
  if (n < 2) throw DomainError("dimension n must be at least 2");
  if (!(log_r < log_r0) || log_r0 > g.log_t_max() + kSlack)
    throw DomainError("divergence integral needs 0 < r < r0 <= t_max");
  const double e = static_cast<double>(n - 1);
  return trapezoid_log([&](double x) { return std::pow(g.elasticity(g.log_u(x)), e); }, log_r, log_r0,
                       opt.nodes_per_decade);
}

double divergence_integral(const GaugeFunction& g, int n, double r, double r0, const QuadratureOptions& opt) {
  if (!(r > 0.0)) throw DomainError("divergence integral needs r > 0");
  return divergence_integral_log(g, n, std::log(r), std::log(r0), opt);
}

double jones_integral_log(const GaugeFunction& g, double log_r, double log_r0, const QuadratureOptions& opt) {
  if (!(log_r < log_r0) || log_r0 > std::min(g.log_t_max(), -1.0) + kSlack)
    throw DomainError("Jones integral needs 0 < r < r0 <= min(t_max, 1/e)");
  return trapezoid_log(
      [&](double x) {
        const double q = g.log_phi(x) / x;
        return q * q;
      },
      log_r, log_r0, opt.nodes_per_decade);
}

double jones_integral(const GaugeFunction& g, double r, double r0, const QuadratureOptions& opt) {
  if (!(r > 0.0)) throw DomainError("Jones integral needs r > 0");
  return jones_integral_log(g, std::log(r), std::log(r0), opt);
}

Divergence classify_blocks(std::span<const double> b, const ClassifierOptions& opt) {
  if (b.size() < 3) return Divergence::Inconclusive;
  for (double v : b)
    if (!finite(v) || v < 0.0) return Divergence::Inconclusive;
  bool steady = true;
  bool decaying = true;
  for (std::size_t i = 1; i < b.size(); ++i) {
    const double ratio = b[i - 1] > 0.0 ? b[i] / b[i - 1] : (b[i] > 0.0 ? 2.0 : 0.0);
    if (ratio < opt.steady_ratio) steady = false;
    if (ratio > opt.decay_ratio) decaying = false;
  }
  const double lowest = *std::min_element(b.begin(), b.end());
  if (steady && lowest >= opt.floor) return Divergence::Divergent;
  if (decaying) return Divergence::Convergent;
  if (b.back() < opt.floor && b.back() < b[b.size() - 2]) return Divergence::Convergent;
  return Divergence::Inconclusive;
}

template <typename Block>
static BlockClassification classify_with(int j_max, const ClassifierOptions& opt, Block&& block) {
  if (j_max < 20) throw DomainError("classification needs j_max >= 20");
  BlockClassification out;
  out.js = {j_max / 4, j_max / 2, j_max};
  for (int j : out.js) out.blocks.push_back(block(j));
  out.verdict = classify_blocks(out.blocks, opt);
  return out;
}

BlockClassification classify_divergence(const GaugeFunction& g, int n, int j_max, const ClassifierOptions& opt) {
  return classify_with(j_max, opt, [&](int j) {
    return divergence_integral_log(g, n, -2.0 * j * kLn2, -1.0 * j * kLn2, opt.quadrature);
  });
}

BlockClassification classify_jones(const GaugeFunction& g, int j_max, const ClassifierOptions& opt) {
  return classify_with(j_max, opt, [&](int j) {
    return jones_integral_log(g, -2.0 * j * kLn2, -1.0 * j * kLn2, opt.quadrature);
  });
}

GaugeFunction psi_from_phi(const GaugeFunction& g, int n, double C1, double C2, double r0, int j_max,
                           const QuadratureOptions& opt) {
  if (!(C1 > 0.0) || !(C2 >= 0.0)) throw DomainError("psi synthesis needs C1 > 0 and C2 >= 0");
  if (!(r0 > 0.0) || r0 > g.t_max() * (1.0 + kSlack)) throw DomainError("psi synthesis needs 0 < r0 <= t_max");
  const double lr0 = std::log(r0);
  std::vector<double> knots{lr0};
  for (int j = 0; j <= j_max; ++j) {
    const double x = -j * kLn2;
    if (x < lr0 - 1e-9) knots.push_back(x);
  }
  if (knots.size() < 2) throw DomainError("psi synthesis grid is empty; raise j_max");
  std::vector<std::array<double, 2>> pts(knots.size());
  double integral = 0.0;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (i > 0) integral += divergence_integral_log(g, n, knots[i], knots[i - 1], opt);
    const double log_psi = std::log(C1) + n * knots[i] + C2 * integral;
    pts[knots.size() - 1 - i] = {knots[i] / kLn2, log_psi / kLn2};
  }
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (!(pts[i][1] > pts[i - 1][1])) throw DomainError("synthesized psi is not increasing");
  return GaugeFunction::tabulated(std::move(pts));
}

TechLemmaReport tech_lemma_check(const GaugeFunction& g, int n, std::span<const double> r_list) {
  TechLemmaReport rep;
  constexpr double kDw = 1.0 / 128.0;
  for (double r : r_list) {
    if (!(r > 0.0) || r > g.t_max() * (1.0 + kSlack)) throw DomainError("tech lemma radius outside (0, t_max]");
    const double Lr = -std::log(r);
    // integral over L = log 1/t from L_r to infinity, with L = L_r + e^w - 1
    auto lf = [&](double w) { return g.log_phi(-(Lr + std::expm1(w))) / n + w; };
    const double ref = lf(0.0);
    double sum = 0.5;
    bool done = false;
    for (int i = 1; i * kDw < 700.0; ++i) {
      const double term = std::exp(lf(i * kDw) - ref);
      if (!finite(term)) break;
      sum += term;
      if (i * kDw > 4.0 && term < 1e-18 * sum) {
        done = true;
        break;
      }
    }
    const double log_int = done ? ref + std::log(sum * kDw) : std::numeric_limits<double>::infinity();
    rep.r.push_back(r);
    rep.log_integral.push_back(log_int);
    rep.ratio.push_back(done ? log_int / g.log_phi(std::log(r)) : std::numeric_limits<double>::quiet_NaN());
  }
  if (rep.ratio.empty()) return rep;
  rep.c_hat = std::numeric_limits<double>::infinity();
  for (double q : rep.ratio) rep.c_hat = finite(q) ? std::min(rep.c_hat, q) : std::numeric_limits<double>::quiet_NaN();
  std::vector<std::size_t> order(rep.r.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return rep.r[a] > rep.r[b]; });
  if (order.size() >= 2 && finite(rep.c_hat)) {
    const double a = rep.ratio[order[order.size() - 2]];
    const double b = rep.ratio[order.back()];
    rep.stable = std::abs(a - b) <= 0.1 * std::abs(b);
  }
  return rep;
}

Dyadic alpha_from_gauge(const GaugeFunction& g, double c, int k, int depth_cap) {
  if (k < 1) throw DomainError("alpha_from_gauge needs k >= 1");
  if (!(c > 0.0)) throw DomainError("alpha_from_gauge needs c > 0");
  const double ly = -k * kLn2;
  if (ly > g.log_y_max() + kSlack) throw DomainError("2^-k outside the range of u");
  const double y = std::ldexp(1.0, -k);
  const double v = std::min(c * y * g.elasticity(g.log_u(ly)), std::ldexp(1.0, -k - 4));
  if (!(v > 0.0) || !finite(v)) throw UnderflowError("alpha(2^-" + std::to_string(k) + ") is not positive");
  int e = 0;
  std::frexp(v, &e);
  const int m = 1 - e;
  if (m > depth_cap)
    throw UnderflowError("alpha(2^-" + std::to_string(k) + ") below 2^-" + std::to_string(depth_cap));
  return Dyadic{m};
}

}  // namespace qcgeom

#include "ncsbound/lti.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ncsbound/error.hpp"

namespace ncsbound::lti {

namespace {

constexpr double kRouthEpsilon = 1e-12;
constexpr double kPoleFloor = 1e-300;

void require_same_unit(TimeUnit a, TimeUnit b, const char* what) {
  if (a != b) {
    throw UnitMismatch(fmt::format("{}: {} vs {}", what, to_string(a), to_string(b)));
  }
}

// Quotient and remainder of a / b; b must be non-zero.
std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b) {
  std::vector<double> rem = a.coefficients();
  const auto& d = b.coefficients();
  if (a.degree() < b.degree()) return {Polynomial(), a};
  std::vector<double> quot(static_cast<std::size_t>(a.degree() - b.degree() + 1), 0.0);
  for (int k = a.degree() - b.degree(); k >= 0; --k) {
    const auto top = static_cast<std::size_t>(k + b.degree());
    const double q = rem[top] / d.back();
    quot[static_cast<std::size_t>(k)] = q;
    for (std::size_t j = 0; j < d.size(); ++j) rem[static_cast<std::size_t>(k) + j] -= q * d[j];
    rem[top] = 0.0;
  }
  rem.resize(static_cast<std::size_t>(b.degree()));
  return {Polynomial(std::move(quot)), Polynomial(std::move(rem))};
}

double max_abs(const Polynomial& p) {
  double m = 0.0;
  for (double c : p.coefficients()) m = std::max(m, std::abs(c));
  return m;
}

// Zeroes coefficients below tol relative to `scale`.
Polynomial chop(const Polynomial& p, double tol, double scale) {
  auto c = p.coefficients();
  for (auto& v : c) {
    if (std::abs(v) <= tol * scale) v = 0.0;
  }
  return Polynomial(std::move(c));
}

Polynomial monic(const Polynomial& p) { return (1.0 / p.leading()) * p; }

}  // namespace

Polynomial::Polynomial(std::vector<double> ascending) : c_(std::move(ascending)) {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

std::complex<double> Polynomial::operator()(std::complex<double> s) const {
  std::complex<double> acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::operator()(double s) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] + b[i];
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return Polynomial();
  std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i) {
    for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  }
  return Polynomial(std::move(c));
}

Polynomial operator*(double k, const Polynomial& a) {
  auto c = a.c_;
  for (auto& v : c) v *= k;
  return Polynomial(std::move(c));
}

std::string Polynomial::to_string() const {
  if (c_.empty()) return "0";
  std::string out;
  for (int k = degree(); k >= 0; --k) {
    const double v = c_[static_cast<std::size_t>(k)];
    if (v == 0.0) continue;
    const double mag = std::abs(v);
    if (out.empty()) {
      if (v < 0) out += "-";
    } else {
      out += v < 0 ? " - " : " + ";
    }
    const bool unit_coef = mag == 1.0 && k > 0;
    if (!unit_coef) out += fmt::format("{:g}", mag);
    if (k > 0) {
      if (!unit_coef) out += " ";
      out += k == 1 ? std::string("s") : fmt::format("s^{}", k);
    }
  }
  return out;
}

TransferFunction::TransferFunction(Polynomial n, Polynomial d, TimeUnit u)
    : num(std::move(n)), den(std::move(d)), unit(u) {
  if (den.is_zero()) throw InvalidArgument("transfer function denominator is identically zero");
}

std::complex<double> evaluate_at(const TransferFunction& tf, std::complex<double> s) {
  const auto d = tf.den(s);
  if (std::abs(d) < kPoleFloor) {
    throw PoleOnAxis(fmt::format("denominator vanishes at s = {}{:+}j", s.real(), s.imag()));
  }
  return tf.num(s) / d;
}

std::complex<double> evaluate(const TransferFunction& tf, double omega) {
  if (!(omega >= 0.0)) throw InvalidArgument("frequency must be non-negative");
  return evaluate_at(tf, {0.0, omega});
}

TransferFunction series(const TransferFunction& a, const TransferFunction& b) {
  require_same_unit(a.unit, b.unit, "series connection");
  return {a.num * b.num, a.den * b.den, a.unit};
}

TransferFunction complementary_sensitivity(const TransferFunction& plant, const TransferFunction& controller) {
  require_same_unit(plant.unit, controller.unit, "complementary sensitivity");
  const auto loop_num = plant.num * controller.num;
  const auto loop_den = plant.den * controller.den;
  return {loop_num, loop_den + loop_num, plant.unit};
}

std::vector<std::complex<double>> roots(const Polynomial& p) {
  if (p.is_zero()) throw InvalidArgument("roots of the zero polynomial");
  const int n = p.degree();
  std::vector<std::complex<double>> out;
  if (n == 0) return out;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -p[static_cast<std::size_t>(i)] / p.leading();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(solver.eigenvalues()[i]);
  return out;
}

bool is_hurwitz(const Polynomial& p) {
  if (p.is_zero()) throw InvalidArgument("is_hurwitz: zero polynomial");
  if (p.degree() < 1) throw InvalidArgument("is_hurwitz: degree must be at least 1");

  // Descending coefficients scaled to unit max magnitude, positive leader.
  const int n = p.degree();
  const double scale = (p.leading() > 0 ? 1.0 : -1.0) / max_abs(p);
  std::vector<double> desc(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k) desc[static_cast<std::size_t>(k)] = p[static_cast<std::size_t>(n - k)] * scale;

  const std::size_t width = static_cast<std::size_t>(n) / 2 + 1;
  std::vector<double> prev(width, 0.0);
  std::vector<double> cur(width, 0.0);
  for (std::size_t j = 0; 2 * j <= static_cast<std::size_t>(n); ++j) prev[j] = desc[2 * j];
  for (std::size_t j = 0; 2 * j + 1 <= static_cast<std::size_t>(n); ++j) cur[j] = desc[2 * j + 1];

  bool hurwitz = prev[0] > kRouthEpsilon;
  for (int row = 1; row <= n; ++row) {
    const bool all_zero = std::all_of(cur.begin(), cur.end(), [](double v) { return std::abs(v) <= kRouthEpsilon; });
    if (all_zero) {
      // Roots symmetric about the origin: continue with the derivative of
      // the auxiliary polynomial formed from the row above.
      hurwitz = false;
      const int aux_degree = n - row + 1;
      for (std::size_t j = 0; j < width; ++j) {
        const int power = aux_degree - 2 * static_cast<int>(j);
        cur[j] = power > 0 ? prev[j] * power : 0.0;
      }
    }
    if (std::abs(cur[0]) <= kRouthEpsilon) {
      hurwitz = false;
      cur[0] = kRouthEpsilon;
    }
    if (cur[0] <= 0.0) hurwitz = false;
    if (row == n) break;

    std::vector<double> next(width, 0.0);
    for (std::size_t j = 0; j + 1 < width; ++j) next[j] = (cur[0] * prev[j + 1] - prev[0] * cur[j + 1]) / cur[0];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return hurwitz;
}

TransferFunction delay_rational_approx(double tau, TimeUnit unit) {
  if (!(tau >= 0.0)) throw InvalidArgument("delay must be non-negative");
  return {Polynomial({1.0, -tau / 2.0}), Polynomial({1.0, tau / 2.0}), unit};
}

TransferFunction robust_weight(double ubd, TimeUnit unit) {
  if (!(ubd > 0.0)) throw InvalidArgument("robust weight needs a positive delay bound");
  return {Polynomial({0.0, ubd}), Polynomial({1.0, ubd / kRobustWeightCeiling}), unit};
}

TransferFunction reduce(const TransferFunction& tf, double tolerance) {
  if (tf.num.is_zero()) return {Polynomial(), Polynomial({1.0}), tf.unit};
  // Euclid on monic copies, discarding remainder coefficients that are small
  // relative to the divisor.
  Polynomial a = monic(tf.num.degree() >= tf.den.degree() ? tf.num : tf.den);
  Polynomial b = monic(tf.num.degree() >= tf.den.degree() ? tf.den : tf.num);
  while (b.degree() > 0) {
    auto r = chop(divmod(a, b).second, tolerance, std::max(1.0, max_abs(b)));
    a = b;
    if (r.is_zero()) break;
    b = monic(r);
  }
  const Polynomial& g = b.degree() > 0 ? a : b;
  if (g.degree() < 1) return tf;
  auto num = chop(divmod(tf.num, g).first, tolerance, max_abs(tf.num));
  auto den = chop(divmod(tf.den, g).first, tolerance, max_abs(tf.den));
  return {std::move(num), std::move(den), tf.unit};
}

StateSpace to_state_space(const TransferFunction& tf) {
  if (!tf.is_proper()) throw ImproperTransferFunction("numerator degree exceeds denominator degree");
  const int n = tf.den.degree();
  const double lead = tf.den.leading();
  StateSpace ss;
  ss.unit = tf.unit;
  ss.A = Eigen::MatrixXd::Zero(n, n);
  ss.B = Eigen::VectorXd::Zero(n);
  ss.C = Eigen::RowVectorXd::Zero(n);
  ss.D = tf.num[static_cast<std::size_t>(n)] / lead;
  if (n == 0) return ss;

  for (int i = 0; i + 1 < n; ++i) ss.A(i, i + 1) = 1.0;
  for (int j = 0; j < n; ++j) {
    const double a = tf.den[static_cast<std::size_t>(j)] / lead;
    ss.A(n - 1, j) = -a;
    ss.C(j) = tf.num[static_cast<std::size_t>(j)] / lead - ss.D * a;
  }
  ss.B(n - 1) = 1.0;
  return ss;
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  if (n == 0) return m;
  const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd x = m / std::ldexp(1.0, squarings);

  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= 13; ++k) {
    term = term * x / static_cast<double>(k);
    result += term;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

StateSpace discretize(const StateSpace& ss, double step) {
  if (!(step > 0.0)) throw InvalidArgument("discretisation step must be positive");
  if (ss.is_discrete()) throw InvalidArgument("system is already discrete");
  const auto n = ss.order();
  StateSpace out = ss;
  out.step = step;
  if (n == 0) return out;

  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = ss.A * step;
  aug.topRightCorner(n, 1) = ss.B * step;
  const Eigen::MatrixXd e = expm(aug);
  out.A = e.topLeftCorner(n, n);
  out.B = e.topRightCorner(n, 1);
  return out;
}

DiscreteSystem::DiscreteSystem(StateSpace ss) : ss_(std::move(ss)), x_(Eigen::VectorXd::Zero(ss_.order())) {
  if (!ss_.is_discrete()) throw InvalidArgument("DiscreteSystem needs a discretised model");
}

double DiscreteSystem::peek(double u) const { return ss_.C.dot(x_) + ss_.D * u; }

double DiscreteSystem::step(double u) {
  const double y = peek(u);
  x_ = ss_.A * x_ + ss_.B * u;
  return y;
}

void DiscreteSystem::reset() { x_.setZero(); }

}  // namespace ncsbound::lti

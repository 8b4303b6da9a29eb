#pragma once

// Single-input single-output rational transfer functions with a time-unit
// tag, plus the state-space plumbing the loop simulator needs.

#include <complex>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ncsbound/units.hpp"

namespace ncsbound::lti {

/// Real polynomial in s, coefficients in ascending powers. Exact trailing
/// zeros are dropped on construction, so the leading coefficient of a
/// non-zero polynomial is never 0.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> ascending);
  Polynomial(std::initializer_list<double> ascending) : Polynomial(std::vector<double>(ascending)) {}

  static Polynomial constant(double c) { return Polynomial({c}); }

  const std::vector<double>& coefficients() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for the zero polynomial
  bool is_zero() const { return c_.empty(); }
  double leading() const { return c_.empty() ? 0.0 : c_.back(); }
  double operator[](std::size_t i) const { return i < c_.size() ? c_[i] : 0.0; }

  std::complex<double> operator()(std::complex<double> s) const;
  double operator()(double s) const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double k, const Polynomial& a);
  friend bool operator==(const Polynomial&, const Polynomial&) = default;

  std::string to_string() const;  // descending, e.g. "s^3 + 5.2 s^2 + 2 s + 1"

 private:
  std::vector<double> c_;
};

struct TransferFunction {
  Polynomial num;
  Polynomial den;
  TimeUnit unit = TimeUnit::Seconds;

  TransferFunction() : num({0.0}), den({1.0}) {}
  /// Throws InvalidArgument when `den` is the zero polynomial.
  TransferFunction(Polynomial num, Polynomial den, TimeUnit unit);

  static TransferFunction constant(double k, TimeUnit unit) { return {Polynomial({k}), Polynomial({1.0}), unit}; }

  bool is_proper() const { return num.degree() <= den.degree(); }
};

/// num(jw) / den(jw), w in rad per tf.unit. Throws PoleOnAxis when
/// |den(jw)| < 1e-300 and InvalidArgument for w < 0.
std::complex<double> evaluate(const TransferFunction& tf, double omega);

/// Same at an arbitrary complex point.
std::complex<double> evaluate_at(const TransferFunction& tf, std::complex<double> s);

/// Product a * b. Throws UnitMismatch.
TransferFunction series(const TransferFunction& a, const TransferFunction& b);

/// PC / (1 + PC) as num_P num_C / (den_P den_C + num_P num_C). No
/// cancellation. Throws UnitMismatch.
TransferFunction complementary_sensitivity(const TransferFunction& plant, const TransferFunction& controller);

/// Roots from the eigenvalues of the companion matrix.
std::vector<std::complex<double>> roots(const Polynomial& p);

/// Routh-Hurwitz tabular test. A zero first-column pivot is replaced by
/// 1e-12 to finish the table, but any such pivot means a root on or to the
/// right of the imaginary axis, so the answer is then false. Throws
/// InvalidArgument for the zero polynomial or degree 0.
bool is_hurwitz(const Polynomial& p);

/// (1 - tau s / 2) / (1 + tau s / 2). tau = 0 gives 1.
TransferFunction delay_rational_approx(double tau, TimeUnit unit);

inline constexpr double kRobustWeightCeiling = 3.465;

/// ubd s / (1 + ubd s / 3.465). Throws InvalidArgument for ubd <= 0.
TransferFunction robust_weight(double ubd, TimeUnit unit);

/// Cancels common roots found by a tolerant polynomial GCD. Never applied
/// implicitly.
TransferFunction reduce(const TransferFunction& tf, double tolerance = 1e-9);

struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;
  TimeUnit unit = TimeUnit::Seconds;
  double step = 0.0;  // 0 for continuous time

  Eigen::Index order() const { return A.rows(); }
  bool is_discrete() const { return step > 0.0; }
};

/// Controllable canonical form. Throws ImproperTransferFunction.
StateSpace to_state_space(const TransferFunction& tf);

/// Zero-order-hold discretisation through the exponential of the augmented
/// matrix [[A, B], [0, 0]] * step. Throws InvalidArgument for step <= 0 or a
/// discrete input.
StateSpace discretize(const StateSpace& ss, double step);

/// Scaling and squaring with a 13-term Taylor series.
Eigen::MatrixXd expm(const Eigen::MatrixXd& m);

/// Stateful evaluation of a discrete state-space model.
class DiscreteSystem {
 public:
  explicit DiscreteSystem(StateSpace ss);

  /// Output for input u held over the coming step; advances the state.
  double step(double u);
  /// Output the next call to step(u) would produce, without advancing.
  double peek(double u) const;
  void reset();

 private:
  StateSpace ss_;
  Eigen::VectorXd x_;
};

}  // namespace ncsbound::lti

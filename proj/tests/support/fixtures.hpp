#pragma once

// Shared models and generators for the test binaries.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ncsbound/lti.hpp"
#include "ncsbound/net_model.hpp"

namespace fixtures {

inline constexpr double k10Mbps = 1.25e6;  // bytes/s

/// The single-switch case study, built by hand rather than from the TOML.
inline ncsbound::net::NetworkModel case_study(double capacity = k10Mbps) {
  ncsbound::net::NetworkModel m;
  m.stations = {"process", "controller", "load3", "load4"};
  m.switches.push_back({"sw1", 4, std::nullopt});
  for (const auto& s : m.stations) m.add_duplex_link(s, "sw1", capacity);
  auto add = [&](std::string id, std::string src, std::string dst, double sigma, double rho) {
    m.streams.push_back({std::move(id), std::move(src), std::move(dst), {sigma, rho}, sigma, {"sw1"}});
  };
  add("s1", "process", "controller", 72, 7200);
  add("s2", "controller", "process", 72, 7200);
  add("s3", "load3", "process", 1526, 305200);
  add("s4", "load3", "controller", 1526, 305200);
  add("s5", "load4", "process", 1526, 305200);
  add("s6", "load4", "controller", 1526, 305200);
  return m;
}

/// One stream a -> sw -> b, nothing else.
inline ncsbound::net::NetworkModel single_stream(double sigma, double rho, double frame, double capacity = k10Mbps) {
  ncsbound::net::NetworkModel m;
  m.stations = {"a", "b"};
  m.switches.push_back({"sw", 2, std::nullopt});
  m.add_duplex_link("a", "sw", capacity);
  m.add_duplex_link("b", "sw", capacity);
  m.streams.push_back({"f", "a", "b", {sigma, rho}, frame, {"sw"}});
  return m;
}

/// a1, a2 -> sw1 -> sw2 -> b1, b2 with two streams crossing both switches.
inline ncsbound::net::NetworkModel two_switch_chain() {
  ncsbound::net::NetworkModel m;
  m.stations = {"a1", "a2", "b1", "b2"};
  m.switches.push_back({"sw1", 3, std::nullopt});
  m.switches.push_back({"sw2", 3, std::nullopt});
  m.add_duplex_link("a1", "sw1", k10Mbps);
  m.add_duplex_link("a2", "sw1", k10Mbps);
  m.add_duplex_link("sw1", "sw2", k10Mbps);
  m.add_duplex_link("sw2", "b1", k10Mbps);
  m.add_duplex_link("sw2", "b2", k10Mbps);
  m.streams.push_back({"x", "a1", "b1", {800, 1e5}, 400, {"sw1", "sw2"}});
  m.streams.push_back({"y", "a2", "b2", {1500, 2e5}, 1500, {"sw1", "sw2"}});
  return m;
}

inline ncsbound::lti::TransferFunction plant_ms() {
  return {{2.0}, {1.0, 5.2, 1.0}, ncsbound::TimeUnit::Milliseconds};
}

inline ncsbound::lti::TransferFunction controller_ms() {
  return {{0.5, 0.5}, {0.0, 1.0}, ncsbound::TimeUnit::Milliseconds};
}

/// Monic polynomial with the given roots; complex roots must come in
/// conjugate pairs.
inline ncsbound::lti::Polynomial from_roots(const std::vector<std::complex<double>>& r) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& z : r) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= z * c[i];
    }
    c = std::move(next);
  }
  std::vector<double> re;
  for (const auto& z : c) re.push_back(z.real());
  return ncsbound::lti::Polynomial(re);
}

/// Random real-coefficient root set of degree 1..6, every root at least
/// `gap` away from the imaginary axis. Leading coefficient scaled too.
struct RootSet {
  std::vector<std::complex<double>> roots;
  double scale = 1.0;
  bool stable() const {
    for (const auto& z : roots) {
      if (z.real() >= 0.0) return false;
    }
    return true;
  }
};

inline RootSet random_roots(std::mt19937_64& rng, double gap) {
  std::uniform_int_distribution<int> deg(1, 6);
  std::uniform_real_distribution<double> mag(gap, 3.0);
  std::uniform_real_distribution<double> im(0.0, 3.0);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution mostly_left(0.75);
  RootSet out;
  const int n = deg(rng);
  while (static_cast<int>(out.roots.size()) < n) {
    const double re = (mostly_left(rng) ? -1.0 : 1.0) * mag(rng);
    if (static_cast<int>(out.roots.size()) + 2 <= n && coin(rng)) {
      const double b = im(rng);
      out.roots.emplace_back(re, b);
      out.roots.emplace_back(re, -b);
    } else {
      out.roots.emplace_back(re, 0.0);
    }
  }
  out.scale = std::uniform_real_distribution<double>(0.2, 5.0)(rng);
  return out;
}

/// Companion-matrix root test, kept independent of the library's roots().
inline bool eigen_hurwitz(const ncsbound::lti::Polynomial& p) {
  const int n = p.degree();
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -p[static_cast<std::size_t>(i)] / p.leading();
  const Eigen::VectorXcd ev = comp.eigenvalues();
  for (int i = 0; i < n; ++i) {
    if (ev(i).real() >= 0.0) return false;
  }
  return true;
}

}  // namespace fixtures

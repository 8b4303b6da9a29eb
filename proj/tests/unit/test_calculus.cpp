#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ncsbound/calculus.hpp"
#include "ncsbound/error.hpp"

using namespace ncsbound;
using calculus::MuxInput;

namespace {

std::vector<MuxInput> two_inputs() {
  return {{{1000, 1e5}, 1e6, 100, "a"}, {{500, 1e5}, 1e6, 100, "b"}};
}

// Candidate backlog of the multiplexer written out term by term, kept apart
// from the library so the case-study value has an independent check.
double hand_backlog(std::size_t i, std::size_t k, const std::vector<MuxInput>& in, double c_out) {
  auto period = [](const MuxInput& x) { return x.envelope.sigma / (x.link_capacity - x.envelope.rho); };
  double u = period(in[k]);
  if (k != i) u = std::max(0.0, u - in[k].max_frame_len / in[k].link_capacity);
  double b = u * (in[k].link_capacity - c_out);
  for (std::size_t z = 0; z < in.size(); ++z) {
    if (z == k) continue;
    b += in[z].envelope.sigma + in[z].envelope.rho * (u + in[z].max_frame_len / in[z].link_capacity);
  }
  if (k != i) b += in[k].max_frame_len - in[i].envelope.rho * in[i].max_frame_len / in[i].link_capacity;
  return std::max(0.0, b);
}

}  // namespace

TEST(BacklogAt, BurstAtTimeZero) {
  const std::vector<MuxInput> in{{{1000, 1e5}, 1e6, 100, "a"}};
  EXPECT_DOUBLE_EQ(calculus::backlog_at(0.0, in, 1e6), 1000.0);
}

TEST(BacklogAt, DrainedQueueClampsAtZero) {
  const std::vector<MuxInput> in{{{1000, 1e5}, 1e6, 100, "a"}};
  EXPECT_EQ(calculus::backlog_at(1.0, in, 1e6), 0.0);
}

TEST(BacklogAt, TwoInputsAtBurstyPeriod) {
  const auto in = two_inputs();
  const double t = 1000.0 / 9e5;
  // 1000 + 1e5 t + 500 + 1e5 (t + 1e-4) - 1e6 t
  const double expected = 1500.0 + 2e5 * t + 10.0 - 1e6 * t;
  EXPECT_NEAR(calculus::backlog_at(t, in, 1e6), expected, 1e-9);
  EXPECT_NEAR(calculus::backlog_at(t, in, 1e6), 621.1, 0.05);
}

TEST(BurstyPeriod, Dominant) {
  EXPECT_NEAR(calculus::bursty_period({{1000, 1e5}, 1e6, 100, "a"}, true), 1000.0 / 9e5, 1e-15);
}

TEST(BurstyPeriod, NoBurst) { EXPECT_EQ(calculus::bursty_period({{0, 1e5}, 1e6, 100, "a"}, true), 0.0); }

TEST(BurstyPeriod, NonDominantSubtractsFrameTime) {
  EXPECT_NEAR(calculus::bursty_period({{500, 1e5}, 1e6, 100, "b"}, false), 500.0 / 9e5 - 1e-4, 1e-15);
  EXPECT_NEAR(calculus::bursty_period({{500, 1e5}, 1e6, 100, "b"}, false), 4.5556e-4, 1e-8);
}

TEST(BurstyPeriod, NegativeNonDominantClamps) {
  EXPECT_EQ(calculus::bursty_period({{10, 1e5}, 1e6, 1500, "b"}, false), 0.0);
}

TEST(BurstyPeriod, SaturatedInputThrows) {
  EXPECT_THROW(calculus::bursty_period({{10, 1e6}, 1e6, 100, "b"}, true), UnstableInput);
}

TEST(MuxBacklog, DominantCandidate) {
  const auto in = two_inputs();
  EXPECT_NEAR(calculus::mux_backlog_bound(0, 0, in, 1e6), 500 + 1e5 * (1000.0 / 9e5 + 1e-4), 1e-9);
  EXPECT_NEAR(calculus::mux_backlog_bound(0, 0, in, 1e6), 621.11, 0.005);
}

TEST(MuxBacklog, OtherCandidate) {
  const auto in = two_inputs();
  const double u = 500.0 / 9e5 - 1e-4;
  EXPECT_NEAR(calculus::mux_backlog_bound(0, 1, in, 1e6), 1000 + 1e5 * (u + 1e-4) - 10 + 100, 1e-9);
  EXPECT_NEAR(calculus::mux_backlog_bound(0, 1, in, 1e6), 1145.56, 0.005);
}

TEST(MuxBacklog, SingleInputAtLineRate) {
  const std::vector<MuxInput> in{{{1000, 1e5}, 1e6, 100, "a"}};
  EXPECT_EQ(calculus::mux_backlog_bound(0, 0, in, 1e6), 0.0);
}

TEST(MuxDelay, PicksTheSmallerCandidate) {
  const auto r = calculus::mux_delay_bound(0, two_inputs(), 1e6);
  EXPECT_NEAR(r.delay_bound, 6.2111e-4, 1e-8);
  EXPECT_EQ(r.argmin_k, 0u);
  EXPECT_EQ(r.argmin_id, "a");
}

TEST(MuxDelay, SingleInputIsFree) {
  const std::vector<MuxInput> in{{{1000, 1e5}, 1e6, 100, "a"}};
  EXPECT_EQ(calculus::mux_delay_bound(0, in, 1e6).delay_bound, 0.0);
}

TEST(MuxDelay, IdenticalInputsPreferTheirOwnPeriod) {
  // Identical inputs do not tie: the other candidate costs L (1 - 2 rho / C) more.
  const std::vector<MuxInput> in{{{700, 2e5}, 1e6, 300, "a"}, {{700, 2e5}, 1e6, 300, "b"}};
  EXPECT_NEAR(calculus::mux_backlog_bound(1, 0, in, 1e6) - calculus::mux_backlog_bound(1, 1, in, 1e6),
              300 * (1 - 2 * 2e5 / 1e6), 1e-9);
  EXPECT_EQ(calculus::mux_delay_bound(0, in, 1e6).argmin_k, 0u);
  EXPECT_EQ(calculus::mux_delay_bound(1, in, 1e6).argmin_k, 1u);
}

TEST(MuxDelay, TieGoesToLowestIndex) {
  // With zero frame length both candidates coincide for either input.
  const std::vector<MuxInput> in{{{700, 2e5}, 1e6, 0, "a"}, {{700, 2e5}, 1e6, 0, "b"}};
  EXPECT_EQ(calculus::mux_backlog_bound(1, 0, in, 1e6), calculus::mux_backlog_bound(1, 1, in, 1e6));
  EXPECT_EQ(calculus::mux_delay_bound(0, in, 1e6).argmin_k, 0u);
  EXPECT_EQ(calculus::mux_delay_bound(1, in, 1e6).argmin_k, 0u);
}

TEST(QueueDelay, SlowerDrain) {
  EXPECT_NEAR(calculus::queue_delay_bound({1000, 1e5}, 1e6, 5e5), (1 / 5e5) * (5e5 / 9e5) * 1000, 1e-15);
  EXPECT_NEAR(calculus::queue_delay_bound({1000, 1e5}, 1e6, 5e5), 1.1111e-3, 1e-7);
}

TEST(QueueDelay, NoBurstOrNoSpeedGap) {
  EXPECT_EQ(calculus::queue_delay_bound({0, 1e5}, 1e6, 5e5), 0.0);
  EXPECT_EQ(calculus::queue_delay_bound({1000, 1e5}, 1e6, 1e6), 0.0);
  EXPECT_EQ(calculus::queue_delay_bound({1000, 1e5}, 5e5, 1e6), 0.0);
}

TEST(QueueDelay, SaturationThrows) {
  EXPECT_THROW(calculus::queue_delay_bound({1000, 6e5}, 1e6, 5e5), UnstableInput);
}

TEST(PropagateEnvelope, AddsRhoTimesDelay) {
  const auto out = calculus::propagate_envelope({72, 7200}, 3.5e-3);
  EXPECT_NEAR(out.sigma, 97.2, 1e-12);
  EXPECT_EQ(out.rho, 7200);
  EXPECT_EQ(calculus::propagate_envelope({72, 7200}, 0.0), (net::TrafficEnvelope{72, 7200}));
  const auto big = calculus::propagate_envelope({1526, 305200}, 1e-3);
  EXPECT_NEAR(big.sigma, 1831.2, 1e-9);
}

TEST(PropagateEnvelope, EndToEndReadsBack) {
  // (sigma_h - sigma_0) / rho recovers the delay that grew the burst.
  const auto out = calculus::propagate_envelope({72, 7200}, 3.5e-3);
  EXPECT_NEAR((out.sigma - 72) / 7200, 3.5e-3, 1e-15);
}

TEST(SwitchBound, IdleSwitchSingleStream) {
  const auto m = fixtures::single_stream(1000, 1e5, 500);
  const auto state = calculus::initial_state(m);
  const auto sb = calculus::switch_delay_bound("f", 1, state, m);
  EXPECT_EQ(sb.total(), 0.0);
  EXPECT_EQ(sb.demux_delay, 0.0);
}

TEST(SwitchBound, CaseStudyMatchesHandEvaluation) {
  const auto m = fixtures::case_study();
  const auto sb = calculus::switch_delay_bound("s1", 1, calculus::initial_state(m), m);
  // s1 meets s4 and s6 at the controller port, each on its own ingress link.
  const std::vector<MuxInput> in{{{72, 7200}, 1.25e6, 72, "s1"},
                                 {{1526, 305200}, 1.25e6, 1526, "s4"},
                                 {{1526, 305200}, 1.25e6, 1526, "s6"}};
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < in.size(); ++k) best = std::min(best, hand_backlog(0, k, in, 1.25e6));
  EXPECT_NEAR(sb.mux.delay_bound, best / 1.25e6, 1e-15);
  EXPECT_EQ(sb.mux.argmin_id, "s4");
  EXPECT_EQ(sb.shared_queue_delay, 0.0);
  EXPECT_EQ(sb.output_queue_delay, 0.0);
}

TEST(SwitchBound, CaseStudyBackgroundStreams) {
  const auto m = fixtures::case_study();
  const auto sb = calculus::switch_delay_bound("s3", 1, calculus::initial_state(m), m);
  const std::vector<MuxInput> in{{{1526, 305200}, 1.25e6, 1526, "s3"},
                                 {{72, 7200}, 1.25e6, 72, "s2"},
                                 {{1526, 305200}, 1.25e6, 1526, "s5"}};
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < in.size(); ++k) best = std::min(best, hand_backlog(0, k, in, 1.25e6));
  EXPECT_NEAR(sb.total(), best / 1.25e6, 1e-15);
}

TEST(SwitchBound, ChainAddsPerHop) {
  const auto m = fixtures::two_switch_chain();
  const auto a = calculus::analyze(m);
  for (const auto& d : a.streams) {
    ASSERT_EQ(d.switches.size(), 2u);
    EXPECT_NEAR(d.switches[0].total() + d.switches[1].total(), d.switch_sum, 1e-18);
  }
}

TEST(AssembleSystem, Dimensions) {
  EXPECT_EQ(calculus::assemble_system(fixtures::single_stream(100, 1e4, 100)).dimension(), 1u);
  const auto cs = calculus::assemble_system(fixtures::case_study());
  EXPECT_EQ(cs.dimension(), 6u);
  EXPECT_EQ(cs.A.rows(), 6);
  EXPECT_EQ(cs.A.cols(), 6);
  EXPECT_EQ(calculus::assemble_system(fixtures::two_switch_chain()).dimension(), 4u);
}

TEST(AssembleSystem, SaturatedLinkIsNonConvergent) {
  auto m = fixtures::case_study();
  m.streams[2].envelope0.rho = 1e6;  // s3 + s4 exceed the load3 link
  EXPECT_THROW(calculus::assemble_system(m), NonConvergent);
}

TEST(AssembleSystem, BrokenModelIsInvalid) {
  auto m = fixtures::case_study();
  m.streams[0].route = {"nowhere"};
  EXPECT_THROW(calculus::assemble_system(m), InvalidModel);
}

TEST(SolveBurstiness, IdleSwitchKeepsSigma) {
  const auto sol = calculus::solve_burstiness(calculus::assemble_system(fixtures::single_stream(800, 1e5, 400)));
  ASSERT_EQ(sol.values.size(), 1u);
  EXPECT_EQ(sol.values[0].sigma, 800.0);
}

TEST(SolveBurstiness, ValueIterationAgreesWithLinearSolve) {
  const auto sys = calculus::assemble_system(fixtures::two_switch_chain());
  const auto direct = calculus::solve_burstiness(sys);
  calculus::SolverOptions opts;
  opts.force_value_iteration = true;
  const auto iterated = calculus::solve_burstiness(sys, opts);
  EXPECT_EQ(direct.method, calculus::SolveMethod::LinearSystem);
  EXPECT_EQ(iterated.method, calculus::SolveMethod::ValueIteration);
  for (std::size_t i = 0; i < direct.values.size(); ++i) {
    EXPECT_NEAR(direct.values[i].sigma, iterated.values[i].sigma, 1e-7 * direct.values[i].sigma);
  }
}

TEST(EndToEnd, CaseStudyBaseline) {
  // Frozen regression values at 10 Mb/s.
  const auto a = calculus::analyze(fixtures::case_study());
  EXPECT_EQ(a.stream("s1").end_to_end, a.stream("s2").end_to_end);
  EXPECT_NEAR(a.stream("s1").end_to_end, 2.8958281411955965e-3, 1e-15);
  EXPECT_NEAR(a.stream("s1").sigma_final, 92.849962616608295, 1e-9);
  EXPECT_NEAR(a.stream("s3").end_to_end, 1.9804622531955978e-3, 1e-15);
  EXPECT_EQ(calculus::end_to_end_delay(a, "s1"), a.stream("s1").end_to_end);
  EXPECT_EQ(a.solution.method, calculus::SolveMethod::LinearSystem);
}

TEST(EndToEnd, EqualsSumOfSwitchBounds) {
  for (const auto& m : {fixtures::case_study(), fixtures::two_switch_chain()}) {
    const auto a = calculus::analyze(m);
    for (const auto& d : a.streams) {
      EXPECT_NEAR(d.end_to_end, d.switch_sum, 1e-9 * std::max(d.switch_sum, 1e-12)) << d.stream_id;
    }
  }
}

TEST(EndToEnd, UnknownStreamThrows) {
  const auto a = calculus::analyze(fixtures::case_study());
  EXPECT_THROW(calculus::end_to_end_delay(a, "s9"), UnknownStream);
}

TEST(CapacitySweep, BaselinePerCapacity) {
  const std::array<double, 3> caps{6.25e5, 1.25e6, 1.25e7};
  const auto sweep = calculus::capacity_sweep(fixtures::case_study(), caps);
  ASSERT_EQ(sweep.size(), 3u);
  const std::array<double, 3> s1{7.3553754571807394e-3, 2.8958281411955965e-3, 2.5040284498623007e-4};
  for (std::size_t i = 0; i < 3; ++i) {
    ASSERT_TRUE(sweep[i].solved) << sweep[i].error;
    EXPECT_NEAR(sweep[i].delays[0].second, s1[i], 1e-15);
  }
}

TEST(CapacitySweep, TooSlowReportsWithoutThrowing) {
  const std::array<double, 1> caps{1.25e5};  // 1 Mb/s: bulk traffic saturates
  const auto sweep = calculus::capacity_sweep(fixtures::case_study(), caps);
  ASSERT_EQ(sweep.size(), 1u);
  EXPECT_FALSE(sweep[0].solved);
  EXPECT_FALSE(sweep[0].error.empty());
}

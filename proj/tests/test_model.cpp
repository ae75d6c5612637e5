#include <gtest/gtest.h>

#include <numbers>

#include "instances.hpp"
#include "stftpr/model.hpp"

namespace stftpr {
namespace {

using namespace std::complex_literals;
constexpr double kPi = std::numbers::pi;

TEST(Support, SingleNonzeroEntry) {
  ProblemConfig cfg{4, 1, 1};
  EXPECT_EQ(support(Signal{1.0, 0.0, 0.0, 0.0}, cfg), (SupportSet{0}));
}

TEST(Support, ZeroSignalHasEmptySupport) {
  ProblemConfig cfg{4, 1, 1};
  EXPECT_TRUE(support(Signal(4), cfg).empty());
}

TEST(Support, EntriesBelowRelativeToleranceAreDropped) {
  ProblemConfig cfg{4, 1, 1, 1e-12};
  EXPECT_EQ(support(Signal{1.0, 1e-15, 2.0i, 0.0}, cfg), (SupportSet{0, 2}));
}

TEST(Support, ZeroToleranceKeepsEveryNonzero) {
  ProblemConfig cfg{3, 1, 1, 0.0};
  EXPECT_EQ(support(Signal{1e-300, 0.0, 1.0}, cfg), (SupportSet{0, 2}));
}

TEST(Support, LengthMismatchIsDimensionError) {
  ProblemConfig cfg{5, 1, 1};
  EXPECT_THROW(support(Signal(4), cfg), DimensionError);
}

TEST(Support, InvariantUnderNonzeroScaling) {
  gen::Rng rng(11);
  ProblemConfig cfg{16, 1, 1};
  for (int trial = 0; trial < 20; ++trial) {
    SupportSet V;
    std::bernoulli_distribution keep(0.5);
    for (int n = 0; n < 16; ++n) {
      if (keep(rng)) V.push_back(n);
    }
    const auto x = gen::random_signal(16, rng, V);
    for (Complex c : {Complex{2.0, 0.0}, Complex{1.0, 1.0}, Complex{-1e-8, 3e-9}, Complex{1e6, 0}}) {
      Signal y = x;
      for (auto& v : y) v *= c;
      EXPECT_EQ(support(y, cfg), support(x, cfg));
    }
  }
}

TEST(ProblemConfig, RejectsHopNotDividingN) {
  EXPECT_THROW((ProblemConfig{8, 3, 1}.validate()), ConfigError);
  EXPECT_THROW((ProblemConfig{0, 1, 1}.validate()), ConfigError);
  EXPECT_THROW((ProblemConfig{8, 2, 0}.validate()), ConfigError);
  EXPECT_THROW((ProblemConfig{8, 2, 1, -1.0}.validate()), ConfigError);
  EXPECT_NO_THROW((ProblemConfig{12, 4, 2}.validate()));
}

TEST(WrapIndex, CanonicalRepresentative) {
  EXPECT_EQ(wrap_index(-1, 4), 3);
  EXPECT_EQ(wrap_index(-8, 4), 0);
  EXPECT_EQ(wrap_index(9, 4), 1);
}

TEST(PhaseDistance, ExactRotation) {
  // y = i x, so x = e^{-i pi/2} y = e^{i 3pi/2} y.
  const auto d = phase_distance(Signal{1.0, 1.0i}, Signal{1.0i, -1.0});
  EXPECT_NEAR(d.distance, 0.0, 1e-15);
  EXPECT_NEAR(d.aligning_phase, 3.0 * kPi / 2.0, 1e-15);
}

TEST(PhaseDistance, Identity) {
  const Signal x{1.0, 2.0, 3.0};
  const auto d = phase_distance(x, x);
  EXPECT_EQ(d.distance, 0.0);
  EXPECT_EQ(d.aligning_phase, 0.0);
}

TEST(PhaseDistance, OrthogonalVectors) {
  const auto d = phase_distance(Signal{1.0, 0.0}, Signal{0.0, 1.0});
  EXPECT_NEAR(d.distance, std::sqrt(2.0), 1e-15);
  EXPECT_EQ(d.aligning_phase, 0.0);
}

TEST(PhaseDistance, LengthMismatch) {
  EXPECT_THROW(phase_distance(Signal(2), Signal(3)), DimensionError);
}

TEST(PhaseDistance, ZeroForEveryGlobalRotation) {
  gen::Rng rng(5);
  const auto x = gen::random_signal(9, rng);
  for (int p = 0; p < 16; ++p) {
    const Complex rot = std::polar(1.0, 2.0 * kPi * p / 16.0);
    Signal y = x;
    for (auto& v : y) v *= rot;
    EXPECT_LE(phase_distance(x, y).distance, 1e-12) << "phase step " << p;
  }
}

TEST(PhaseDistance, SymmetricUpToPhaseSign) {
  gen::Rng rng(6);
  for (int trial = 0; trial < 25; ++trial) {
    const auto x = gen::random_signal(7, rng);
    const auto y = gen::random_signal(7, rng);
    const auto a = phase_distance(x, y);
    const auto b = phase_distance(y, x);
    EXPECT_NEAR(a.distance, b.distance, 1e-12);
    EXPECT_NEAR(std::remainder(a.aligning_phase + b.aligning_phase, 2.0 * kPi), 0.0, 1e-12);
  }
}

TEST(PhaseDistance, ClosedFormBeatsAGridOfPhases) {
  gen::Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = gen::random_signal(5, rng);
    const auto y = gen::random_signal(5, rng);
    const auto d = phase_distance(x, y);
    for (int p = 0; p < 360; ++p) {
      const Complex rot = std::polar(1.0, 2.0 * kPi * p / 360.0);
      double sq = 0.0;
      for (std::size_t n = 0; n < x.size(); ++n) sq += std::norm(x[n] - rot * y[n]);
      EXPECT_LE(d.distance, std::sqrt(sq) + 1e-12);
    }
  }
}

}  // namespace
}  // namespace stftpr

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mondyn/frame_potential.hpp"
#include "mondyn/propagator.hpp"

using namespace mondyn;

namespace {

struct Instance {
  HamiltonianSet hs;
  Spectral spectral;
};

Instance ising_instance(int n_s, int n_b) {
  CouplingSpec spec;
  spec.n_s = n_s;
  spec.n_b = n_b;
  Instance inst{build(spec), {}};
  inst.spectral = hermitian_eig(inst.hs.h);
  return inst;
}

double pair_weight(const Trajectory& a, const Trajectory& b, int k) {
  const double w = std::norm(a.final_state.amplitudes.dot(b.final_state.amplitudes));
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= w;
  return out;
}

// Naive full double loop, diagonal included.
double naive_exact(const Ensemble& e, int k) {
  double total = 0.0;
  for (const auto& a : e.members) {
    for (const auto& b : e.members) {
      total += a.probability * b.probability * pair_weight(a, b, k);
    }
  }
  return total;
}

double naive_u_statistic(const Ensemble& e, int k) {
  const double m = static_cast<double>(e.members.size());
  double total = 0.0;
  for (std::size_t i = 0; i < e.members.size(); ++i) {
    for (std::size_t j = 0; j < e.members.size(); ++j) {
      if (i == j) continue;
      total += pair_weight(e.members[i], e.members[j], k);
    }
  }
  return total / (m * (m - 1.0));
}

Trajectory constant_member(const StateVector& state) {
  Trajectory t;
  t.outcomes = {0};
  t.probability = 1.0;
  t.final_state = state;
  return t;
}

}  // namespace

TEST_CASE("exact frame potential matches a naive double loop") {
  const Instance inst = ising_instance(2, 1);
  ProtocolConfig cfg = make_protocol(15.0, 3, QubitPartition{2, 1});
  cfg.prune_threshold = 0.0;
  const Ensemble e = enumerate_ensemble(propagator(inst.spectral, cfg.dt()), cfg);

  const auto estimates = exact_frame_potentials(e, {1, 2, 3, 10});
  const int ks[] = {1, 2, 3, 10};
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(estimates[t].k == ks[t]);
    CHECK(std::abs(estimates[t].value - naive_exact(e, ks[t])) < 1e-12);
    CHECK(estimates[t].method == FpMethod::kExact);
    CHECK(estimates[t].std_error == 0.0);
  }
  // Frame potentials decrease with K and exceed the Haar floor.
  for (std::size_t t = 1; t < 4; ++t) CHECK(estimates[t].value <= estimates[t - 1].value);
  CHECK(estimates[0].value >= haar_frame_potential(2, 1) - 1e-12);
}

TEST_CASE("blocked overlap pass agrees with the naive loop beyond one block") {
  const Instance inst = ising_instance(2, 1);
  ProtocolConfig cfg = make_protocol(15.0, 2, QubitPartition{2, 1});
  const Matrix u = propagator(inst.spectral, cfg.dt());
  // 600 members spans three partial blocks of the pair pass.
  const Ensemble e = sample_ensemble(u, cfg, 600, 77);
  for (const int k : {1, 3}) {
    const FramePotentialEstimate est = sampled_frame_potential(e, k);
    CHECK(std::abs(est.value - naive_u_statistic(e, k)) < 1e-10);
    CHECK(est.sample_count == 600);
    CHECK(est.std_error > 0.0);
  }
}

TEST_CASE("degenerate ensembles hit the boundary values") {
  Ensemble same;
  same.kind = EnsembleKind::kSampled;
  for (int i = 0; i < 5; ++i) same.members.push_back(constant_member(zero_state(2)));
  const FramePotentialEstimate est = sampled_frame_potential(same, 3);
  CHECK(est.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(est.std_error == doctest::Approx(0.0));

  Ensemble orthogonal;
  orthogonal.kind = EnsembleKind::kExact;
  orthogonal.members.push_back(constant_member(basis_state(2, "00")));
  orthogonal.members.push_back(constant_member(basis_state(2, "01")));
  for (auto& t : orthogonal.members) t.probability = 0.5;
  for (const int k : {1, 2, 5}) {
    CHECK(exact_frame_potential(orthogonal, k).value == doctest::Approx(0.5));
  }
}

TEST_CASE("the pair estimator is unbiased across seeds") {
  const Instance inst = ising_instance(2, 1);
  ProtocolConfig cfg = make_protocol(15.0, 3, QubitPartition{2, 1});
  cfg.prune_threshold = 0.0;
  const Matrix u = propagator(inst.spectral, cfg.dt());
  const Ensemble exact = enumerate_ensemble(u, cfg);

  for (const int k : {1, 3}) {
    const double truth = exact_frame_potential(exact, k).value;
    const int seeds = 200;
    const int m = 200;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const double est =
          sampled_frame_potential(sample_ensemble(u, cfg, m, 1000 + s), k).value;
      sum += est;
      sum_sq += est * est;
    }
    const double mean = sum / seeds;
    const double variance = (sum_sq - seeds * mean * mean) / (seeds - 1.0);
    const double sem = std::sqrt(variance / seeds);
    CHECK(std::abs(mean - truth) < 4.0 * sem);
  }
}

TEST_CASE("haar frame potential closed form") {
  for (int n_s = 1; n_s <= 10; ++n_s) {
    CHECK(haar_frame_potential(n_s, 1) == doctest::Approx(std::ldexp(1.0, -n_s)));
  }
  // dimension 4, K = 2: 3! 2! / 5! = 1/10
  CHECK(haar_frame_potential(2, 2) == doctest::Approx(0.1).epsilon(1e-13));
  // dimension 2, K = 3: 1! 3! / 4! = 1/4
  CHECK(haar_frame_potential(1, 3) == doctest::Approx(0.25).epsilon(1e-13));
  for (int k = 2; k <= 8; ++k) {
    CHECK(haar_frame_potential(4, k) < haar_frame_potential(4, k - 1));
  }
  CHECK(haar_frame_potential(30, 2) > 0.0);
  CHECK(std::isfinite(haar_frame_potential(30, 2)));
  CHECK_THROWS_AS(haar_frame_potential(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(haar_frame_potential(2, 0), std::invalid_argument);
}

TEST_CASE("purity spans pure to maximally mixed") {
  const StateVector psi = basis_state(2, "10");
  const Matrix pure = psi.amplitudes * psi.amplitudes.adjoint();
  CHECK(purity(pure) == doctest::Approx(1.0));
  CHECK(purity(Matrix::Identity(8, 8) / 8.0) == doctest::Approx(0.125));
  CHECK_THROWS_AS(purity(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("estimator preconditions") {
  const Instance inst = ising_instance(2, 1);
  ProtocolConfig cfg = make_protocol(5.0, 2, QubitPartition{2, 1});
  cfg.prune_threshold = 0.0;
  const Matrix u = propagator(inst.spectral, cfg.dt());
  const Ensemble exact = enumerate_ensemble(u, cfg);
  const Ensemble sampled = sample_ensemble(u, cfg, 10, 1);

  CHECK_THROWS_AS(exact_frame_potential(sampled, 1), std::invalid_argument);
  CHECK_THROWS_AS(sampled_frame_potential(exact, 1), std::invalid_argument);
  CHECK_THROWS_AS(exact_frame_potentials(exact, {}), std::invalid_argument);
  CHECK_THROWS_AS(exact_frame_potential(exact, 0), std::invalid_argument);

  const Ensemble two = sample_ensemble(u, cfg, 2, 1);
  const FramePotentialEstimate est = sampled_frame_potential(two, 1);
  CHECK(est.std_error == 0.0);  // jackknife undefined at M = 2

  Ensemble one;
  one.kind = EnsembleKind::kSampled;
  one.members.push_back(constant_member(zero_state(2)));
  CHECK_THROWS_AS(sampled_frame_potential(one, 1), std::invalid_argument);
}

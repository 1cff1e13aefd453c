#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mondyn/errors.hpp"
#include "mondyn/monitored_protocol.hpp"
#include "mondyn/propagator.hpp"

using namespace mondyn;

namespace {

struct OracleBranch {
  std::vector<int> record;
  double probability = 0.0;
  Vector system;
};

// Independent record-tree expansion by direct amplitude slicing; normalizes
// each branch and multiplies conditional probabilities explicitly.
void oracle_descend(const Vector& joint, double prob, const Matrix& u,
                    const QubitPartition& part, const Vector& reset, int remaining,
                    std::vector<int>& record, std::vector<OracleBranch>& out) {
  const Vector evolved = u * joint;
  const Eigen::Index ds = part.system_dim();
  const Eigen::Index db = part.bath_dim();
  for (int m = 0; m < db; ++m) {
    Vector sys(ds);
    for (Eigen::Index s = 0; s < ds; ++s) sys(s) = evolved(s * db + m);
    const double p = sys.squaredNorm();
    if (p < 1e-14) continue;
    sys /= std::sqrt(p);
    record.push_back(m);
    if (remaining == 1) {
      out.push_back({record, prob * p, sys});
    } else {
      Vector next(ds * db);
      for (Eigen::Index s = 0; s < ds; ++s) {
        for (Eigen::Index b = 0; b < db; ++b) next(s * db + b) = sys(s) * reset(b);
      }
      oracle_descend(next, prob * p, u, part, reset, remaining - 1, record, out);
    }
    record.pop_back();
  }
}

std::vector<OracleBranch> oracle_tree(const Matrix& u, const ProtocolConfig& cfg) {
  const Vector joint =
      attach_reset_bath(cfg.initial_system, cfg.partition, cfg.reset_state).amplitudes;
  std::vector<int> record;
  std::vector<OracleBranch> out;
  oracle_descend(joint, 1.0, u, cfg.partition, cfg.reset_state.amplitudes, cfg.cycles,
                 record, out);
  return out;
}

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

// 99th percentile of chi-square via the Wilson-Hilferty cube approximation.
double chi2_q99(int dof) {
  const double d = static_cast<double>(dof);
  const double z = 2.3263478740408408;  // standard normal 99th percentile
  const double h = 2.0 / (9.0 * d);
  const double c = 1.0 - h + z * std::sqrt(h);
  return d * c * c * c;
}

}  // namespace

TEST_CASE("enumeration matches the brute-force oracle branch by branch") {
  const Instance inst = ising_instance(2, 1);
  for (const int cycles : {1, 2, 4, 6}) {
    ProtocolConfig cfg = make_protocol(15.0, cycles, QubitPartition{2, 1});
    cfg.prune_threshold = 0.0;
    const Matrix u = propagator(inst.spectral, cfg.dt());

    const Ensemble ensemble = enumerate_ensemble(u, cfg);
    const auto oracle = oracle_tree(u, cfg);
    REQUIRE(ensemble.members.size() == oracle.size());
    CHECK(ensemble.truncated_mass == doctest::Approx(0.0));

    double total = 0.0;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      const Trajectory& got = ensemble.members[i];
      CHECK(got.outcomes == oracle[i].record);
      CHECK(std::abs(got.probability - oracle[i].probability) < 1e-9);
      const Complex ov = got.final_state.amplitudes.dot(oracle[i].system);
      CHECK(std::abs(ov) > 1.0 - 1e-9);
      total += got.probability;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-11));
  }
}

TEST_CASE("records come out in lexicographic order") {
  const Instance inst = ising_instance(1, 2);
  ProtocolConfig cfg = make_protocol(6.0, 2, QubitPartition{1, 2});
  cfg.prune_threshold = 0.0;
  const Ensemble ensemble = enumerate_ensemble(propagator(inst.spectral, cfg.dt()), cfg);
  REQUIRE(ensemble.members.size() > 1);
  for (std::size_t i = 1; i < ensemble.members.size(); ++i) {
    CHECK(ensemble.members[i - 1].outcomes < ensemble.members[i].outcomes);
  }
}

TEST_CASE("step agrees with the measurement distribution of the evolved state") {
  const Instance inst = ising_instance(2, 1);
  ProtocolConfig cfg = make_protocol(3.0, 1, QubitPartition{2, 1});
  const Matrix u = propagator(inst.spectral, cfg.dt());

  const StateVector joint =
      attach_reset_bath(cfg.initial_system, cfg.partition, cfg.reset_state);
  const auto outcomes = step(joint, u, cfg);
  const auto dist = measure_bath_distribution(evolve(u, joint), cfg.partition);
  REQUIRE(outcomes.size() == dist.size());
  for (const auto& [m, o] : outcomes) {
    CHECK(o.probability == doctest::Approx(dist.at(m).probability));
    const StateVector expected =
        attach_reset_bath(dist.at(m).system_state, cfg.partition, cfg.reset_state);
    CHECK(fidelity(o.next_joint, expected) == doctest::Approx(1.0));
  }
}

TEST_CASE("pruning accounts for all dropped mass") {
  const Instance inst = ising_instance(2, 1);
  ProtocolConfig cfg = make_protocol(15.0, 4, QubitPartition{2, 1});
  cfg.prune_threshold = 0.05;
  const Ensemble pruned = enumerate_ensemble(propagator(inst.spectral, cfg.dt()), cfg);
  CHECK(pruned.truncated_mass > 0.0);
  double kept = 0.0;
  for (const auto& t : pruned.members) {
    CHECK(t.probability >= cfg.prune_threshold);
    kept += t.probability;
  }
  CHECK(kept + pruned.truncated_mass == doctest::Approx(1.0).epsilon(1e-12));

  cfg.prune_threshold = 1.5;  // every branch falls below threshold
  CHECK_THROWS_AS(enumerate_ensemble(propagator(inst.spectral, cfg.dt()), cfg),
                  std::invalid_argument);
}

TEST_CASE("branch cap aborts oversized enumerations") {
  const Instance inst = ising_instance(1, 2);
  ProtocolConfig cfg = make_protocol(8.0, 4, QubitPartition{1, 2});
  cfg.prune_threshold = 0.0;
  cfg.branch_cap = 8;
  CHECK_THROWS_AS(enumerate_ensemble(propagator(inst.spectral, cfg.dt()), cfg),
                  ResourceLimitError);
}

TEST_CASE("hamiltonian overload matches the explicit propagator") {
  const Instance inst = ising_instance(2, 1);
  ProtocolConfig cfg = make_protocol(5.0, 3, QubitPartition{2, 1});
  cfg.prune_threshold = 0.0;
  const Ensemble a = enumerate_ensemble(propagator(inst.spectral, cfg.dt()), cfg);
  const Ensemble b = enumerate_ensemble(inst.hs, cfg);
  REQUIRE(a.members.size() == b.members.size());
  for (std::size_t i = 0; i < a.members.size(); ++i) {
    CHECK(a.members[i].probability ==
          doctest::Approx(b.members[i].probability).epsilon(1e-12));
    CHECK(fidelity(a.members[i].final_state, b.members[i].final_state) ==
          doctest::Approx(1.0));
  }
}

TEST_CASE("sampled trajectories reproduce enumerated records") {
  const Instance inst = ising_instance(2, 1);
  ProtocolConfig cfg = make_protocol(15.0, 3, QubitPartition{2, 1});
  cfg.prune_threshold = 0.0;
  const Matrix u = propagator(inst.spectral, cfg.dt());
  const Ensemble exact = enumerate_ensemble(u, cfg);

  SubstreamRng rng(123, 0);
  const Trajectory draw = sample_trajectory(u, cfg, rng);
  bool found = false;
  for (const auto& t : exact.members) {
    if (t.outcomes != draw.outcomes) continue;
    found = true;
    CHECK(std::abs(t.probability - draw.probability) < 1e-12);
    CHECK(fidelity(t.final_state, draw.final_state) == doctest::Approx(1.0));
  }
  CHECK(found);
}

TEST_CASE("sampling is deterministic and order independent") {
  const Instance inst = ising_instance(2, 1);
  ProtocolConfig cfg = make_protocol(15.0, 2, QubitPartition{2, 1});
  const Matrix u = propagator(inst.spectral, cfg.dt());

  const Ensemble a = sample_ensemble(u, cfg, 40, 9);
  const Ensemble b = sample_ensemble(u, cfg, 40, 9);
  REQUIRE(a.members.size() == 40);
  CHECK(a.kind == EnsembleKind::kSampled);
  for (std::size_t i = 0; i < 40; ++i) {
    CHECK(a.members[i].outcomes == b.members[i].outcomes);
    CHECK((a.members[i].final_state.amplitudes - b.members[i].final_state.amplitudes)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  // Trajectory i depends only on (seed, i), not on how many others are drawn.
  const Ensemble c = sample_ensemble(u, cfg, 10, 9);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(c.members[i].outcomes == a.members[i].outcomes);
  }

  const Ensemble d = sample_ensemble(u, cfg, 40, 10);
  bool any_difference = false;
  for (std::size_t i = 0; i < 40; ++i) {
    any_difference = any_difference || d.members[i].outcomes != a.members[i].outcomes;
  }
  CHECK(any_difference);
}

TEST_CASE("single-cycle outcome frequency sits within five sigma") {
  const Instance inst = ising_instance(2, 1);
  ProtocolConfig cfg = make_protocol(15.0, 1, QubitPartition{2, 1});
  const Matrix u = propagator(inst.spectral, cfg.dt());

  const StateVector joint =
      attach_reset_bath(cfg.initial_system, cfg.partition, cfg.reset_state);
  const double p0 = step(joint, u, cfg).at(0).probability;

  const int m = 2000;
  const Ensemble samples = sample_ensemble(u, cfg, m, 31);
  int zeros = 0;
  for (const auto& t : samples.members) zeros += t.outcomes.front() == 0 ? 1 : 0;
  const double freq = static_cast<double>(zeros) / m;
  CHECK(std::abs(freq - p0) < 5.0 * std::sqrt(p0 * (1.0 - p0) / m));
}

TEST_CASE("sampled record histogram passes a chi-square check") {
  const Instance inst = ising_instance(2, 1);
  ProtocolConfig cfg = make_protocol(15.0, 2, QubitPartition{2, 1});
  cfg.prune_threshold = 0.0;
  const Matrix u = propagator(inst.spectral, cfg.dt());
  const Ensemble exact = enumerate_ensemble(u, cfg);

  const int m = 3000;
  const Ensemble samples = sample_ensemble(u, cfg, m, 5);
  double chi2 = 0.0;
  int cells = 0;
  for (const auto& branch : exact.members) {
    const double expectation = m * branch.probability;
    if (expectation < 5.0) continue;
    int count = 0;
    for (const auto& s : samples.members) count += s.outcomes == branch.outcomes ? 1 : 0;
    chi2 += (count - expectation) * (count - expectation) / expectation;
    ++cells;
  }
  REQUIRE(cells >= 2);
  CHECK(chi2 < chi2_q99(cells - 1));
}

TEST_CASE("record-averaged state equals the ensemble average") {
  for (const auto& [n_s, n_b, cycles] : {std::tuple{2, 1, 4}, {2, 2, 3}, {1, 2, 2}}) {
    const Instance inst = ising_instance(n_s, n_b);
    ProtocolConfig cfg = make_protocol(11.0, cycles, QubitPartition{n_s, n_b});
    cfg.prune_threshold = 0.0;
    const Matrix u = propagator(inst.spectral, cfg.dt());

    const Ensemble exact = enumerate_ensemble(u, cfg);
    Matrix averaged = Matrix::Zero(cfg.partition.system_dim(), cfg.partition.system_dim());
    for (const auto& t : exact.members) {
      averaged += t.probability * t.final_state.amplitudes *
                  t.final_state.amplitudes.adjoint();
    }
    const Matrix channel = averaged_system_state(u, cfg);
    CHECK((channel - averaged).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(channel.trace().real() - 1.0) < 1e-10);
  }
}

TEST_CASE("channel via hamiltonian overload matches") {
  const Instance inst = ising_instance(2, 1);
  ProtocolConfig cfg = make_protocol(7.0, 5, QubitPartition{2, 1});
  const Matrix a = averaged_system_state(propagator(inst.spectral, cfg.dt()), cfg);
  const Matrix b = averaged_system_state(inst.hs, cfg);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("unmonitored composition is plain evolution") {
  const Instance inst = ising_instance(2, 1);
  ProtocolConfig cfg = make_protocol(4.0, 8, QubitPartition{2, 1});
  const StateVector composed = compose_unmonitored(propagator(inst.spectral, cfg.dt()), cfg);
  const StateVector direct = evolve(
      propagator(inst.spectral, cfg.total_time),
      attach_reset_bath(cfg.initial_system, cfg.partition, cfg.reset_state));
  CHECK(fidelity(composed, direct) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("protocol configuration is validated") {
  CHECK_THROWS_AS(make_protocol(0.0, 3, QubitPartition{1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(make_protocol(1.0, 0, QubitPartition{1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(make_protocol(1.0, 3, QubitPartition{0, 1}), std::invalid_argument);
  const ProtocolConfig cfg = make_protocol(15.0, 4, QubitPartition{2, 1});
  CHECK(cfg.dt() == doctest::Approx(3.75));
  CHECK(cfg.initial_system.num_qubits == 2);
  CHECK(cfg.reset_state.num_qubits == 1);
}

TEST_CASE("survival probability of decoupled transverse fields is cos^4") {
  CouplingSpec spec;
  spec.n_s = 1;
  spec.n_b = 1;
  spec.j_z = 0.0;
  spec.j_zz = 0.0;
  spec.j_x = 1.0;
  const HamiltonianSet hs = build(spec);

  std::vector<double> times;
  for (int i = 0; i <= 800; ++i) times.push_back(4.0 * i / 800.0);
  const RevivalCurve curve = revival_curve(hs, zero_state(2), times);

  REQUIRE(curve.points.size() == times.size());
  CHECK(curve.points.front().second == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& [t, xi] : curve.points) {
    const double expected = std::pow(std::cos(t), 4);
    CHECK(std::abs(xi - expected) < 1e-10);
    CHECK(xi <= 1.0 + 1e-10);
  }
  // First dip at pi/2, first full return at pi.
  REQUIRE(curve.first_revival_time.has_value());
  CHECK(*curve.first_revival_time == doctest::Approx(3.14159265).epsilon(1e-2));
}

TEST_CASE("revival grid requirements are enforced") {
  const HamiltonianSet hs = build(CouplingSpec{});
  CHECK_THROWS_AS(revival_curve(hs, zero_state(2), {0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(revival_curve(hs, zero_state(2), {0.0, 1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(revival_curve(hs, zero_state(3), {0.0, 1.0, 2.0}), std::invalid_argument);
}

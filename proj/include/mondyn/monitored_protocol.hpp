#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "mondyn/hamiltonian.hpp"
#include "mondyn/rng.hpp"
#include "mondyn/spin_hilbert.hpp"

namespace mondyn {

// One experiment protocol: evolve the joint system+bath state for
// total_time/cycles, measure the bath in the computational basis, reattach
// the reset state, and repeat `cycles` times. States default to all-|0>.
struct ProtocolConfig {
  double total_time = 15.0;
  int cycles = 1;
  QubitPartition partition;
  StateVector initial_system;
  StateVector reset_state;
  double prune_threshold = 1e-10;
  std::size_t branch_cap = 2'000'000;

  double dt() const { return total_time / cycles; }
};

ProtocolConfig make_protocol(double total_time, int cycles, const QubitPartition& part);

struct StepOutcome {
  double probability = 0.0;
  StateVector next_joint;  // collapsed system with the bath already reset
};

// A single measurement record: the outcome sequence, its probability, and the
// normalized system state it conditions.
struct Trajectory {
  std::vector<int> outcomes;
  double probability = 0.0;
  StateVector final_state;
};

enum class EnsembleKind { kExact, kSampled };

// Either the full branch tree of records (kExact, probabilities attached, in
// lexicographic record order) or i.i.d. draws from it (kSampled, each member
// carrying its record probability for reference). truncated_mass is the total
// probability dropped by pruning; zero for sampled ensembles.
struct Ensemble {
  EnsembleKind kind = EnsembleKind::kExact;
  std::vector<Trajectory> members;
  double truncated_mass = 0.0;
};

// One protocol cycle applied to a normalized joint state: evolve by u, then
// branch on the bath outcome. Keys are bath basis indices; each branch's
// next_joint already has the bath reset.
std::map<int, StepOutcome> step(const StateVector& joint, const Matrix& u,
                                const ProtocolConfig& cfg);

// Depth-first enumeration of all measurement records. Branches whose
// accumulated probability drops below cfg.prune_threshold are dropped and
// accounted in truncated_mass. Throws ResourceLimitError when the number of
// live branches would exceed cfg.branch_cap.
Ensemble enumerate_ensemble(const Matrix& u, const ProtocolConfig& cfg);
Ensemble enumerate_ensemble(const HamiltonianSet& hs, const ProtocolConfig& cfg);

// One record drawn from the Born distribution, one conditional draw per cycle.
Trajectory sample_trajectory(const Matrix& u, const ProtocolConfig& cfg, SubstreamRng& rng);
Trajectory sample_trajectory(const HamiltonianSet& hs, const ProtocolConfig& cfg,
                             SubstreamRng& rng);

// num_samples i.i.d. trajectories; trajectory i draws from substream i of the
// seed, so the result is independent of evaluation order.
Ensemble sample_ensemble(const Matrix& u, const ProtocolConfig& cfg, int num_samples,
                         std::uint64_t seed);
Ensemble sample_ensemble(const HamiltonianSet& hs, const ProtocolConfig& cfg, int num_samples,
                         std::uint64_t seed);

// Record-averaged system density matrix after cfg.cycles cycles. The
// measure-and-reset cycle acts linearly on density matrices, so this equals
// the probability-weighted average over the full (unpruned) record tree; its
// purity is the exact first-order frame potential of that ensemble.
Matrix averaged_system_state(const Matrix& u, const ProtocolConfig& cfg);
Matrix averaged_system_state(const HamiltonianSet& hs, const ProtocolConfig& cfg);

// cfg.cycles applications of u with no measurement in between; for checking
// that the protocol plumbing reduces to plain unitary evolution.
StateVector compose_unmonitored(const Matrix& u, const ProtocolConfig& cfg);

struct RevivalCurve {
  std::vector<std::pair<double, double>> points;  // (t, overlap with the initial state)
  // First strict local maximum after the first strict local minimum of the
  // sampled curve; empty when the grid shows no such structure.
  std::optional<double> first_revival_time;
};

// Survival probability |<psi0| exp(-i h t) |psi0>|^2 of a joint state on a
// strictly increasing time grid (at least 3 points).
RevivalCurve revival_curve(const HamiltonianSet& hs, const StateVector& psi0,
                           const std::vector<double>& times);

}  // namespace mondyn

#include "mondyn/monitored_protocol.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mondyn/errors.hpp"
#include "mondyn/propagator.hpp"

namespace mondyn {

namespace {

void validate_config(const ProtocolConfig& cfg) {
  if (!(cfg.total_time > 0.0) || !std::isfinite(cfg.total_time)) {
    throw std::invalid_argument("protocol: total_time must be positive and finite");
  }
  if (cfg.cycles < 1) throw std::invalid_argument("protocol: need at least one cycle");
  if (cfg.partition.n_s < 1 || cfg.partition.n_b < 1) {
    throw std::invalid_argument("protocol: partition needs system and bath sites");
  }
  if (cfg.initial_system.num_qubits != cfg.partition.n_s) {
    throw std::invalid_argument("protocol: initial system state does not match partition");
  }
  if (cfg.reset_state.num_qubits != cfg.partition.n_b) {
    throw std::invalid_argument("protocol: reset state does not match partition");
  }
  if (!(cfg.prune_threshold >= 0.0)) {
    throw std::invalid_argument("protocol: prune threshold must be non-negative");
  }
}

void validate_unitary(const Matrix& u, const ProtocolConfig& cfg) {
  const Eigen::Index dim = Eigen::Index{1} << cfg.partition.total();
  if (u.rows() != dim || u.cols() != dim) {
    throw std::invalid_argument("protocol: unitary does not match partition dimension");
  }
}

Matrix cycle_unitary(const HamiltonianSet& hs, const ProtocolConfig& cfg) {
  return propagator(hermitian_eig(hs.h), cfg.dt());
}

// Bath block extraction on unnormalized amplitudes; squared norm of the
// result is the accumulated probability of the extended record.
Vector unnormalized_branch(const Vector& joint, const QubitPartition& part, Eigen::Index m) {
  const Eigen::Index ds = part.system_dim();
  const Eigen::Index db = part.bath_dim();
  Vector block(ds);
  for (Eigen::Index s = 0; s < ds; ++s) block(s) = joint(s * db + m);
  return block;
}

Vector reattach(const Vector& system, const StateVector& reset, const QubitPartition& part) {
  const Eigen::Index db = part.bath_dim();
  Vector out(system.size() * db);
  for (Eigen::Index s = 0; s < system.size(); ++s) {
    out.segment(s * db, db) = system(s) * reset.amplitudes;
  }
  return out;
}

struct EnumerationState {
  const Matrix* u = nullptr;
  const ProtocolConfig* cfg = nullptr;
  std::vector<Trajectory> leaves;
  std::vector<int> record;
  double truncated_mass = 0.0;

  void descend(const Vector& branch, int depth) {
    const QubitPartition& part = cfg->partition;
    const Vector evolved = (*u) * branch;
    for (Eigen::Index m = 0; m < part.bath_dim(); ++m) {
      Vector child = unnormalized_branch(evolved, part, m);
      const double mass = child.squaredNorm();
      if (mass < cfg->prune_threshold || mass == 0.0) {
        truncated_mass += mass;
        continue;
      }
      if (leaves.size() + static_cast<std::size_t>(depth) + 1 >= cfg->branch_cap) {
        throw ResourceLimitError(
            "enumerate_ensemble: more than " + std::to_string(cfg->branch_cap) +
            " live branches; rerun with method=sample, or raise branch_cap / prune_threshold");
      }
      record.push_back(static_cast<int>(m));
      if (depth + 1 == cfg->cycles) {
        Trajectory leaf;
        leaf.outcomes = record;
        leaf.probability = mass;
        leaf.final_state.num_qubits = part.n_s;
        leaf.final_state.amplitudes = child / std::sqrt(mass);
        leaves.push_back(std::move(leaf));
      } else {
        descend(reattach(child, cfg->reset_state, part), depth + 1);
      }
      record.pop_back();
    }
  }
};

}  // namespace

ProtocolConfig make_protocol(double total_time, int cycles, const QubitPartition& part) {
  ProtocolConfig cfg;
  cfg.total_time = total_time;
  cfg.cycles = cycles;
  cfg.partition = part;
  cfg.initial_system = zero_state(part.n_s);
  cfg.reset_state = zero_state(part.n_b);
  validate_config(cfg);
  return cfg;
}

std::map<int, StepOutcome> step(const StateVector& joint, const Matrix& u,
                                const ProtocolConfig& cfg) {
  validate_config(cfg);
  validate_unitary(u, cfg);
  const StateVector evolved = evolve(u, joint);
  std::map<int, StepOutcome> out;
  for (const auto& [m, outcome] : measure_bath_distribution(evolved, cfg.partition)) {
    StepOutcome o;
    o.probability = outcome.probability;
    o.next_joint = attach_reset_bath(outcome.system_state, cfg.partition, cfg.reset_state);
    out.emplace(m, std::move(o));
  }
  return out;
}

Ensemble enumerate_ensemble(const Matrix& u, const ProtocolConfig& cfg) {
  validate_config(cfg);
  validate_unitary(u, cfg);

  EnumerationState state;
  state.u = &u;
  state.cfg = &cfg;
  state.record.reserve(static_cast<std::size_t>(cfg.cycles));

  const Vector root =
      attach_reset_bath(cfg.initial_system, cfg.partition, cfg.reset_state).amplitudes;
  state.descend(root, 0);

  Ensemble out;
  out.kind = EnsembleKind::kExact;
  out.members = std::move(state.leaves);
  out.truncated_mass = state.truncated_mass;
  if (out.members.empty()) {
    throw std::invalid_argument(
        "enumerate_ensemble: pruning removed every branch; lower prune_threshold");
  }
  return out;
}

Ensemble enumerate_ensemble(const HamiltonianSet& hs, const ProtocolConfig& cfg) {
  return enumerate_ensemble(cycle_unitary(hs, cfg), cfg);
}

Trajectory sample_trajectory(const Matrix& u, const ProtocolConfig& cfg, SubstreamRng& rng) {
  validate_config(cfg);
  validate_unitary(u, cfg);

  Trajectory traj;
  traj.outcomes.reserve(static_cast<std::size_t>(cfg.cycles));
  traj.probability = 1.0;

  StateVector joint = attach_reset_bath(cfg.initial_system, cfg.partition, cfg.reset_state);
  StateVector collapsed = cfg.initial_system;
  for (int k = 0; k < cfg.cycles; ++k) {
    const StateVector evolved = evolve(u, joint);
    const auto distribution = measure_bath_distribution(evolved, cfg.partition);
    if (distribution.empty()) {
      throw std::runtime_error("sample_trajectory: empty outcome distribution");
    }
    double total = 0.0;
    for (const auto& [m, o] : distribution) total += o.probability;
    // CDF walk in ascending outcome order; scaling by the kept mass keeps the
    // draw well-defined when sub-epsilon outcomes were dropped.
    const double target = rng.uniform() * total;
    double acc = 0.0;
    const auto* chosen = &*distribution.rbegin();
    int chosen_m = distribution.rbegin()->first;
    for (const auto& [m, o] : distribution) {
      acc += o.probability;
      if (target < acc) {
        chosen = &*distribution.find(m);
        chosen_m = m;
        break;
      }
    }
    traj.outcomes.push_back(chosen_m);
    traj.probability *= chosen->second.probability;
    collapsed = chosen->second.system_state;
    if (k + 1 < cfg.cycles) {
      joint = attach_reset_bath(collapsed, cfg.partition, cfg.reset_state);
    }
  }
  traj.final_state = collapsed;
  return traj;
}

Trajectory sample_trajectory(const HamiltonianSet& hs, const ProtocolConfig& cfg,
                             SubstreamRng& rng) {
  return sample_trajectory(cycle_unitary(hs, cfg), cfg, rng);
}

Ensemble sample_ensemble(const Matrix& u, const ProtocolConfig& cfg, int num_samples,
                         std::uint64_t seed) {
  if (num_samples < 1) throw std::invalid_argument("sample_ensemble: need at least one sample");
  Ensemble out;
  out.kind = EnsembleKind::kSampled;
  out.members.reserve(static_cast<std::size_t>(num_samples));
  for (int i = 0; i < num_samples; ++i) {
    SubstreamRng rng(seed, static_cast<std::uint64_t>(i));
    out.members.push_back(sample_trajectory(u, cfg, rng));
  }
  return out;
}

Ensemble sample_ensemble(const HamiltonianSet& hs, const ProtocolConfig& cfg, int num_samples,
                         std::uint64_t seed) {
  return sample_ensemble(cycle_unitary(hs, cfg), cfg, num_samples, seed);
}

Matrix averaged_system_state(const Matrix& u, const ProtocolConfig& cfg) {
  validate_config(cfg);
  validate_unitary(u, cfg);
  const QubitPartition& part = cfg.partition;
  const Eigen::Index ds = part.system_dim();
  const Eigen::Index db = part.bath_dim();

  // W maps a system vector to u * (system (x) reset); its bath-m row blocks
  // are the Kraus operators of one measure-and-reset cycle.
  Matrix w = Matrix::Zero(ds * db, ds);
  for (Eigen::Index s = 0; s < ds; ++s) {
    for (Eigen::Index b = 0; b < db; ++b) {
      if (cfg.reset_state.amplitudes(b) == Complex{0.0, 0.0}) continue;
      w.col(s) += cfg.reset_state.amplitudes(b) * u.col(s * db + b);
    }
  }
  std::vector<Matrix> kraus;
  kraus.reserve(static_cast<std::size_t>(db));
  for (Eigen::Index m = 0; m < db; ++m) {
    Matrix km(ds, ds);
    for (Eigen::Index i = 0; i < ds; ++i) km.row(i) = w.row(i * db + m);
    kraus.push_back(std::move(km));
  }

  Matrix rho = cfg.initial_system.amplitudes * cfg.initial_system.amplitudes.adjoint();
  for (int k = 0; k < cfg.cycles; ++k) {
    Matrix next = Matrix::Zero(ds, ds);
    for (const Matrix& km : kraus) next += km * rho * km.adjoint();
    rho = std::move(next);
  }
  const double trace = rho.trace().real();
  if (std::abs(trace - 1.0) > 1e-8) {
    throw std::runtime_error("averaged_system_state: trace drifted from one");
  }
  return rho;
}

Matrix averaged_system_state(const HamiltonianSet& hs, const ProtocolConfig& cfg) {
  return averaged_system_state(cycle_unitary(hs, cfg), cfg);
}

StateVector compose_unmonitored(const Matrix& u, const ProtocolConfig& cfg) {
  validate_config(cfg);
  validate_unitary(u, cfg);
  StateVector joint = attach_reset_bath(cfg.initial_system, cfg.partition, cfg.reset_state);
  for (int k = 0; k < cfg.cycles; ++k) joint = evolve(u, joint);
  return joint;
}

RevivalCurve revival_curve(const HamiltonianSet& hs, const StateVector& psi0,
                           const std::vector<double>& times) {
  if (times.size() < 3) {
    throw std::invalid_argument("revival_curve: need at least 3 grid points");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument("revival_curve: times must be strictly increasing");
    }
  }
  if (psi0.amplitudes.size() != hs.dim()) {
    throw std::invalid_argument("revival_curve: state does not match Hamiltonian dimension");
  }
  if (std::abs(psi0.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("revival_curve: state is not normalized");
  }

  const Spectral spectral = hermitian_eig(hs.h);
  // <psi0| exp(-i h t) |psi0> = sum_k |<v_k|psi0>|^2 exp(-i lambda_k t).
  // Normalizing by the summed weights cancels the eigenbasis rounding, so
  // the curve starts at exactly 1.
  Eigen::VectorXd weights = (spectral.eigenvectors.adjoint() * psi0.amplitudes)
                                .cwiseAbs2();
  const double weight_norm = weights.sum() * weights.sum();

  RevivalCurve curve;
  curve.points.reserve(times.size());
  for (double t : times) {
    Complex amplitude{0.0, 0.0};
    for (Eigen::Index k = 0; k < weights.size(); ++k) {
      amplitude += weights(k) * std::exp(Complex{0.0, -spectral.eigenvalues(k) * t});
    }
    curve.points.emplace_back(t, std::norm(amplitude) / weight_norm);
  }

  // First strict local minimum, then the first strict local maximum after it.
  // Raw grid values, no smoothing.
  std::size_t min_index = 0;
  bool have_min = false;
  for (std::size_t i = 1; i + 1 < curve.points.size(); ++i) {
    const double prev = curve.points[i - 1].second;
    const double here = curve.points[i].second;
    const double next = curve.points[i + 1].second;
    if (!have_min && here < prev && here < next) {
      have_min = true;
      min_index = i;
      continue;
    }
    if (have_min && i > min_index && here > prev && here > next) {
      curve.first_revival_time = curve.points[i].first;
      break;
    }
  }
  return curve;
}

}  // namespace mondyn

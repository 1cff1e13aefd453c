#pragma once

#include <vector>

#include "mondyn/monitored_protocol.hpp"

namespace mondyn {

enum class FpMethod { kExact, kPairEstimator };

struct FramePotentialEstimate {
  int k = 1;
  double value = 0.0;
  double std_error = 0.0;      // jackknife; zero for exact ensembles
  FpMethod method = FpMethod::kExact;
  int sample_count = 0;        // pair estimator only
  double truncated_mass = 0.0; // carried over from the ensemble
  double bias_bound = 0.0;     // 2 * truncated_mass, worst-case pruning bias
};

// Double sum over an exact ensemble:
//   F_K = sum_{z,z'} p_z p_z' |<psi_z|psi_z'>|^(2K).
// Overlaps are computed once per pair and raised to each requested power, so
// asking for several K at once costs one pass.
FramePotentialEstimate exact_frame_potential(const Ensemble& ensemble, int k);
std::vector<FramePotentialEstimate> exact_frame_potentials(const Ensemble& ensemble,
                                                           const std::vector<int>& ks);

// Unbiased two-sample U-statistic over an i.i.d. sampled ensemble,
//   F_K ~ 1/(M(M-1)) sum_{i != j} |<psi_i|psi_j>|^(2K),
// with a delete-one jackknife standard error.
FramePotentialEstimate sampled_frame_potential(const Ensemble& ensemble, int k);
std::vector<FramePotentialEstimate> sampled_frame_potentials(const Ensemble& ensemble,
                                                             const std::vector<int>& ks);

// Haar value (N_s - 1)! K! / (N_s + K - 1)! for N_s = 2^n_s, evaluated in
// log space so large system sizes cannot overflow.
double haar_frame_potential(int n_s, int k);

// Purity of a density matrix; applied to the record-averaged system state it
// gives the exact K=1 frame potential without enumerating records.
double purity(const Matrix& rho);

}  // namespace mondyn

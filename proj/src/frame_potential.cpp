#include "mondyn/frame_potential.hpp"

#include <cmath>
#include <stdexcept>

namespace mondyn {

namespace {

void validate_ks(const std::vector<int>& ks) {
  if (ks.empty()) throw std::invalid_argument("frame_potential: empty K list");
  for (int k : ks) {
    if (k < 1) throw std::invalid_argument("frame_potential: K must be >= 1");
  }
}

double integer_power(double w, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= w;
  return out;
}

// Visits every unordered pair i < j once with |<psi_i|psi_j>|^2. The states are
// packed into one matrix so the overlap pass runs as dense column-block
// products instead of M^2 separate dot products.
template <typename Visit>
void for_each_pair_overlap(const std::vector<Trajectory>& members, Visit&& visit) {
  const std::size_t m = members.size();
  const Eigen::Index dim = members.front().final_state.amplitudes.size();
  Matrix states(dim, static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    states.col(static_cast<Eigen::Index>(i)) = members[i].final_state.amplitudes;
  }
  constexpr Eigen::Index kBlock = 256;
  for (Eigen::Index j0 = 0; j0 < states.cols(); j0 += kBlock) {
    const Eigen::Index jn = std::min<Eigen::Index>(kBlock, states.cols() - j0);
    for (Eigen::Index i0 = 0; i0 <= j0; i0 += kBlock) {
      const Eigen::Index in = std::min<Eigen::Index>(kBlock, states.cols() - i0);
      const Matrix g = states.middleCols(i0, in).adjoint() * states.middleCols(j0, jn);
      for (Eigen::Index jc = 0; jc < jn; ++jc) {
        const Eigen::Index j = j0 + jc;
        const Eigen::Index row_end = std::min(i0 + in, j);  // keep i < j
        for (Eigen::Index i = i0; i < row_end; ++i) {
          visit(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                std::norm(g(i - i0, jc)));
        }
      }
    }
  }
}

}  // namespace

std::vector<FramePotentialEstimate> exact_frame_potentials(const Ensemble& ensemble,
                                                           const std::vector<int>& ks) {
  validate_ks(ks);
  if (ensemble.kind != EnsembleKind::kExact) {
    throw std::invalid_argument("exact_frame_potential: ensemble is not exact");
  }
  const auto& members = ensemble.members;
  if (members.empty()) throw std::invalid_argument("exact_frame_potential: empty ensemble");

  std::vector<double> acc(ks.size(), 0.0);
  double diagonal = 0.0;
  for (const Trajectory& member : members) {
    diagonal += member.probability * member.probability;
  }
  for_each_pair_overlap(members, [&](std::size_t i, std::size_t j, double w) {
    const double pq = members[i].probability * members[j].probability;
    for (std::size_t t = 0; t < ks.size(); ++t) {
      acc[t] += 2.0 * pq * integer_power(w, ks[t]);
    }
  });

  std::vector<FramePotentialEstimate> out;
  out.reserve(ks.size());
  for (std::size_t t = 0; t < ks.size(); ++t) {
    FramePotentialEstimate e;
    e.k = ks[t];
    e.value = diagonal + acc[t];  // |<psi|psi>|^(2K) = 1 on the diagonal
    e.method = FpMethod::kExact;
    e.truncated_mass = ensemble.truncated_mass;
    e.bias_bound = 2.0 * ensemble.truncated_mass;
    out.push_back(e);
  }
  return out;
}

FramePotentialEstimate exact_frame_potential(const Ensemble& ensemble, int k) {
  return exact_frame_potentials(ensemble, {k}).front();
}

std::vector<FramePotentialEstimate> sampled_frame_potentials(const Ensemble& ensemble,
                                                             const std::vector<int>& ks) {
  validate_ks(ks);
  if (ensemble.kind != EnsembleKind::kSampled) {
    throw std::invalid_argument("sampled_frame_potential: ensemble is not sampled");
  }
  const auto& members = ensemble.members;
  const std::size_t m = members.size();
  if (m < 2) throw std::invalid_argument("sampled_frame_potential: need at least 2 samples");

  // Row sums r_i = sum_{j != i} w_ij^K feed both the U-statistic and the
  // delete-one jackknife without a second pass over pairs.
  std::vector<std::vector<double>> row_sums(ks.size(), std::vector<double>(m, 0.0));
  std::vector<double> totals(ks.size(), 0.0);
  for_each_pair_overlap(members, [&](std::size_t i, std::size_t j, double w) {
    for (std::size_t t = 0; t < ks.size(); ++t) {
      const double wk = integer_power(w, ks[t]);
      row_sums[t][i] += wk;
      row_sums[t][j] += wk;
      totals[t] += 2.0 * wk;
    }
  });

  const double md = static_cast<double>(m);
  std::vector<FramePotentialEstimate> out;
  out.reserve(ks.size());
  for (std::size_t t = 0; t < ks.size(); ++t) {
    FramePotentialEstimate e;
    e.k = ks[t];
    e.method = FpMethod::kPairEstimator;
    e.sample_count = static_cast<int>(m);
    e.value = totals[t] / (md * (md - 1.0));
    if (m > 2) {
      double mean = 0.0;
      std::vector<double> deleted(m);
      for (std::size_t i = 0; i < m; ++i) {
        deleted[i] = (totals[t] - 2.0 * row_sums[t][i]) / ((md - 1.0) * (md - 2.0));
        mean += deleted[i];
      }
      mean /= md;
      double ss = 0.0;
      for (double d : deleted) ss += (d - mean) * (d - mean);
      e.std_error = std::sqrt((md - 1.0) / md * ss);
    }
    out.push_back(e);
  }
  return out;
}

FramePotentialEstimate sampled_frame_potential(const Ensemble& ensemble, int k) {
  return sampled_frame_potentials(ensemble, {k}).front();
}

double haar_frame_potential(int n_s, int k) {
  if (n_s < 1) throw std::invalid_argument("haar_frame_potential: need n_s >= 1");
  if (k < 1) throw std::invalid_argument("haar_frame_potential: need K >= 1");
  // K = 1 reduces to 1/N_s; bypass lgamma so the identity holds exactly.
  if (k == 1) return std::ldexp(1.0, -n_s);
  const double ns = std::ldexp(1.0, n_s);  // 2^n_s
  return std::exp(std::lgamma(ns) + std::lgamma(static_cast<double>(k) + 1.0) -
                  std::lgamma(ns + static_cast<double>(k)));
}

double purity(const Matrix& rho) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("purity: matrix must be square");
  return (rho * rho).trace().real();
}

}  // namespace mondyn

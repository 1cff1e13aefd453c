#include "mondyn/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mondyn/errors.hpp"
#include "mondyn/frame_potential.hpp"
#include "mondyn/propagator.hpp"
#include "mondyn/rng.hpp"

namespace mondyn::theory {

namespace {

constexpr double kLn2 = 0.6931471805599453094172321214582;

void require_counts(int n_s, int n_b) {
  if (n_s < 1 || n_b < 1) {
    throw std::invalid_argument("theory: qubit counts must be at least 1");
  }
  if (n_s > 40 || n_b > 40) {
    throw std::invalid_argument("theory: qubit counts capped at 40");
  }
}

void require_alpha(int alpha) {
  if (alpha != 1 && alpha != 3) {
    throw std::invalid_argument("theory: alpha must be 1 or 3");
  }
}

double pow2d(int n) { return std::ldexp(1.0, n); }

// Applies 1 (x) (1_b - |reset><reset|) to a joint vector.
Vector project_out_reset(const Vector& joint, const QubitPartition& part,
                         const StateVector& reset) {
  const Eigen::Index ds = part.system_dim();
  const Eigen::Index db = part.bath_dim();
  Vector out = joint;
  for (Eigen::Index s = 0; s < ds; ++s) {
    const Complex overlap = reset.amplitudes.dot(joint.segment(s * db, db));
    out.segment(s * db, db) -= overlap * reset.amplitudes;
  }
  return out;
}

// Columns map a system vector psi to (1 (x) Q) h (psi (x) reset); the squared
// norm of a column set applied to psi is the per-unit-time bath leak rate.
Matrix leak_map(const HamiltonianSet& hs) {
  const QubitPartition part = hs.partition();
  const StateVector& reset = *hs.reset_state;
  const Eigen::Index ds = part.system_dim();
  const Eigen::Index db = part.bath_dim();
  Matrix map(ds * db, ds);
  Vector column(ds * db);
  for (Eigen::Index s = 0; s < ds; ++s) {
    column.setZero();
    for (Eigen::Index b = 0; b < db; ++b) {
      if (reset.amplitudes(b) == Complex{0.0, 0.0}) continue;
      column += reset.amplitudes(b) * hs.h.col(s * db + b);
    }
    map.col(s) = project_out_reset(column, part, reset);
  }
  return map;
}

// Bath factor of a strictly bath-supported joint operator (fails loudly when
// the operator has genuine system dependence).
Matrix bath_factor(const Matrix& joint_op, const QubitPartition& part) {
  const Eigen::Index db = part.bath_dim();
  Matrix factor(db, db);
  for (Eigen::Index a = 0; a < db; ++a) {
    for (Eigen::Index b = 0; b < db; ++b) {
      const Matrix block = bath_basis_block(joint_op, part, static_cast<int>(a),
                                            static_cast<int>(b));
      const Complex scalar = block(0, 0);
      Matrix deviation = block;
      deviation.diagonal().array() -= scalar;
      if (deviation.cwiseAbs().maxCoeff() > 1e-10) {
        throw UnsupportedError("theory: operator is not a pure bath operator");
      }
      factor(a, b) = scalar;
    }
  }
  return factor;
}

}  // namespace

double f1_floor(int n_s, int n_b) {
  require_counts(n_s, n_b);
  const double ns = pow2d(n_s);
  const double nb = pow2d(n_b);
  return ns * ns * (nb + 1.0) / (ns * ns * nb + 1.0) * haar_frame_potential(n_s, 1);
}

double f1_decay_rate(int n_s, int n_b) {
  require_counts(n_s, n_b);
  const double ns = pow2d(n_s);
  const double nb = pow2d(n_b);
  return std::log((ns * ns - 1.0) * nb) - std::log(ns * ns * nb * nb - 1.0);
}

double f1_expected(int n_s, int n_b, double cycles) {
  require_counts(n_s, n_b);
  if (cycles < 0.0) throw std::invalid_argument("f1_expected: negative cycle count");
  const double ns = pow2d(n_s);
  const double nb = pow2d(n_b);
  const double prefactor = (ns - 1.0) * (ns * nb - 1.0) / (ns * ns * nb + 1.0);
  return f1_floor(n_s, n_b) + prefactor * std::exp(cycles * f1_decay_rate(n_s, n_b));
}

double fk_floor(int n_s, int n_b, int k) {
  require_counts(n_s, n_b);
  if (k < 1) throw std::invalid_argument("fk_floor: K must be >= 1");
  const double nb = pow2d(n_b);
  const double excess = (pow2d(k) - 1.0) / nb;  // (2^K - 1) / N_b
  return (1.0 + excess) * haar_frame_potential(n_s, k);
}

double fk_decay_rate(int n_s, int n_b) {
  require_counts(n_s, n_b);
  const double ns = pow2d(n_s);
  const double nb = pow2d(n_b);
  return std::log(ns * ns * nb) - std::log(ns * ns * nb * nb - 1.0);
}

double fk_lower_bound(int n_s, int n_b, double cycles, int k) {
  if (k < 2) throw std::invalid_argument("fk_lower_bound: defined for K >= 2 only");
  if (cycles < 0.0) throw std::invalid_argument("fk_lower_bound: negative cycle count");
  const double qk = fk_floor(n_s, n_b, k);
  return (1.0 - qk) * std::exp(cycles * fk_decay_rate(n_s, n_b)) - qk;
}

double fk_lower_bound_saturating(int n_s, int n_b, double cycles, int k) {
  if (k < 2) {
    throw std::invalid_argument("fk_lower_bound_saturating: defined for K >= 2 only");
  }
  if (cycles < 0.0) {
    throw std::invalid_argument("fk_lower_bound_saturating: negative cycle count");
  }
  const double qk = fk_floor(n_s, n_b, k);
  return (1.0 - qk) * std::exp(cycles * fk_decay_rate(n_s, n_b)) + qk;
}

double saturation_cycles(int n_s, int n_b, double r) {
  require_counts(n_s, n_b);
  if (!(r > 0.0) || r > 1.0) {
    throw std::invalid_argument("saturation_cycles: r must lie in (0, 1]");
  }
  return (static_cast<double>(n_s) - std::log2(r)) / static_cast<double>(n_b);
}

DecayCoefficient decay_coefficient_alpha1(const HamiltonianSet& hs,
                                          CoefficientAveraging averaging,
                                          const CoefficientOptions& options) {
  if (!hs.reset_state) {
    throw std::invalid_argument("decay_coefficient_alpha1: run mean_field_shift first");
  }
  const QubitPartition part = hs.partition();
  const Eigen::Index ds = part.system_dim();
  const Matrix map = leak_map(hs);

  DecayCoefficient out;
  out.averaging = averaging;
  switch (averaging) {
    case CoefficientAveraging::kHaar:
      // Haar average of |M psi|^2 over unit psi is tr(M'M)/N_s.
      out.value = 2.0 * map.squaredNorm() / static_cast<double>(ds);
      return out;
    case CoefficientAveraging::kMonteCarlo: {
      if (options.samples < 2) {
        throw std::invalid_argument("decay_coefficient_alpha1: need at least 2 samples");
      }
      SubstreamRng rng(options.seed, 0);
      std::vector<double> values(static_cast<std::size_t>(options.samples));
      for (double& value : values) {
        Vector psi(ds);
        for (Eigen::Index s = 0; s < ds; ++s) psi(s) = Complex{rng.normal(), rng.normal()};
        psi /= psi.norm();
        value = 2.0 * (map * psi).squaredNorm();
      }
      const double m = static_cast<double>(options.samples);
      double sum = 0.0;
      for (double value : values) sum += value;
      out.value = sum / m;
      // Two passes: the textbook sum-of-squares form cancels catastrophically
      // when the integrand is (near) constant over states.
      double variance = 0.0;
      for (double value : values) variance += (value - out.value) * (value - out.value);
      variance /= m - 1.0;
      out.std_error = std::sqrt(variance / m);
      return out;
    }
    case CoefficientAveraging::kEvolved: {
      if (!hs.h_s0) {
        throw std::invalid_argument("decay_coefficient_alpha1: run mean_field_shift first");
      }
      if (options.grid_points < 2 || !(options.t_max > 0.0)) {
        throw std::invalid_argument("decay_coefficient_alpha1: bad averaging grid");
      }
      const Matrix h_sys = bath_expectation(*hs.h_s0, part, *hs.reset_state);
      const Spectral spectral = hermitian_eig(h_sys);
      const Vector psi0 = zero_state(part.n_s).amplitudes;
      const Vector coeffs = spectral.eigenvectors.adjoint() * psi0;
      double sum = 0.0;
      for (int j = 0; j < options.grid_points; ++j) {
        const double t =
            options.t_max * static_cast<double>(j) / (options.grid_points - 1.0);
        Vector psi(ds);
        for (Eigen::Index s = 0; s < ds; ++s) {
          psi(s) = coeffs(s) * std::exp(Complex{0.0, -spectral.eigenvalues(s) * t});
        }
        psi = spectral.eigenvectors * psi;
        sum += 2.0 * (map * psi).squaredNorm();
      }
      out.value = sum / options.grid_points;
      return out;
    }
  }
  throw std::logic_error("decay_coefficient_alpha1: unreachable");
}

double decay_coefficient_alpha3(const HamiltonianSet& hs, int k) {
  if (k < 1) throw std::invalid_argument("decay_coefficient_alpha3: K must be >= 1");
  if (!hs.h_c0 || !hs.reset_state) {
    throw std::invalid_argument("decay_coefficient_alpha3: run mean_field_shift first");
  }
  if (!hs.v) throw std::invalid_argument("decay_coefficient_alpha3: run bath_split first");
  if (classify_alpha(hs) != 3) {
    throw UnsupportedError(
        "decay_coefficient_alpha3: coupling does not commute with the bath projectors");
  }
  const QubitPartition part = hs.partition();
  const Matrix v_bath = bath_factor(*hs.v, part);
  const Vector couplings = v_bath * hs.reset_state->amplitudes;  // <m|V|reset>

  double sum = 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver;
  for (Eigen::Index m = 0; m < part.bath_dim(); ++m) {
    const double weight = std::norm(couplings(m));
    if (weight == 0.0) continue;
    const Matrix block = bath_basis_block(*hs.h_c0, part, static_cast<int>(m),
                                          static_cast<int>(m));
    solver.compute(block, Eigen::EigenvaluesOnly);
    const double mu =
        0.5 * (solver.eigenvalues().maxCoeff() - solver.eigenvalues().minCoeff());
    sum += weight * mu * mu;
  }
  return 0.5 * static_cast<double>(k) * sum;
}

double zeno_lower_bound(double total_time, double cycles, int alpha, double c_h) {
  require_alpha(alpha);
  if (!(total_time > 0.0) || !(cycles > 0.0)) {
    throw std::invalid_argument("zeno_lower_bound: time and cycle count must be positive");
  }
  if (c_h < 0.0) throw std::invalid_argument("zeno_lower_bound: negative coefficient");
  return std::exp(-c_h * std::pow(total_time, alpha + 1) / std::pow(cycles, alpha));
}

double zeno_onset_cycles(double total_time, int n_s, int alpha, double c_h) {
  require_alpha(alpha);
  if (!(total_time > 0.0)) throw std::invalid_argument("zeno_onset_cycles: need T > 0");
  if (n_s < 1) throw std::invalid_argument("zeno_onset_cycles: need n_s >= 1");
  if (!(c_h > 0.0)) {
    throw UndefinedThresholdError("zeno_onset_cycles: undefined for vanishing coefficient");
  }
  return std::pow(c_h * std::pow(total_time, alpha + 1) / (n_s * kLn2), 1.0 / alpha);
}

double threshold_time(int n_s, int n_b, double r, int alpha, double c_h) {
  require_alpha(alpha);
  require_counts(n_s, n_b);
  if (!(r > 0.0) || r > 1.0) throw std::invalid_argument("threshold_time: r must lie in (0, 1]");
  if (!(c_h > 0.0)) {
    throw UndefinedThresholdError("threshold_time: undefined for vanishing coefficient");
  }
  const double bits = static_cast<double>(n_s) - std::log2(r);
  const double numerator = std::pow(bits, alpha) * n_s * kLn2;
  const double denominator = std::pow(static_cast<double>(n_b), alpha) * c_h;
  return std::pow(numerator / denominator, 1.0 / (alpha + 1));
}

double crossover_cycles(double total_time, int n_b, int alpha, double c_h) {
  require_alpha(alpha);
  if (!(total_time > 0.0)) throw std::invalid_argument("crossover_cycles: need T > 0");
  if (n_b < 1) throw std::invalid_argument("crossover_cycles: need n_b >= 1");
  if (!(c_h > 0.0)) {
    throw UndefinedThresholdError("crossover_cycles: undefined for vanishing coefficient");
  }
  return total_time * std::pow(c_h / (n_b * kLn2), 1.0 / (alpha + 1));
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y,
                     double floor) {
  if (x.size() != y.size()) throw std::invalid_argument("log_log_slope: length mismatch");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > floor)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++used;
  }
  if (used < 2) return std::numeric_limits<double>::quiet_NaN();
  const double denom = used * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (used * sxy - sx * sy) / denom;
}

StepErrorReport step_error_scaling(const HamiltonianSet& hs, std::vector<double> dt_list) {
  if (hs.dim() > 64) {
    throw std::invalid_argument("step_error_scaling: instance capped at 6 qubits total");
  }
  if (!hs.h_s0 || !hs.h_c0) {
    throw std::invalid_argument("step_error_scaling: run mean_field_shift first");
  }
  if (!hs.h_bm || !hs.v) {
    throw std::invalid_argument("step_error_scaling: run bath_split first");
  }
  if (dt_list.empty()) dt_list = {0.2, 0.1, 0.05, 0.025, 0.0125, 0.01};
  for (double dt : dt_list) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_error_scaling: dt must be positive");
  }

  const QubitPartition part = hs.partition();
  const Eigen::Index db = part.bath_dim();
  const Spectral full = hermitian_eig(hs.h);
  const Spectral coupling = hermitian_eig(*hs.h_c0);
  const Spectral interior = hermitian_eig(*hs.h_s0 + hs.h_b);

  const Matrix bath = bath_factor(hs.h_b, part);
  const Matrix v_bath = bath_factor(*hs.v, part);
  const StateVector& reset = *hs.reset_state;
  // Reset is a basis state for every configuration built here; identify its
  // index for the leak bookkeeping.
  Eigen::Index reset_index = 0;
  reset.amplitudes.cwiseAbs().maxCoeff(&reset_index);
  const double e_reset = bath(reset_index, reset_index).real();

  const Vector root =
      attach_reset_bath(zero_state(part.n_s), part, reset).amplitudes;

  StepErrorReport report;
  for (double dt : dt_list) {
    StepErrorRow row;
    row.dt = dt;

    const Matrix u_exact = propagator(full, dt);
    const Matrix u_split = propagator(coupling, dt / 2.0) * propagator(interior, dt) *
                           propagator(coupling, dt / 2.0);
    row.split_error =
        Eigen::JacobiSVD<Matrix>(u_exact - u_split).singularValues()(0);

    const Vector evolved = u_exact * root;
    const Eigen::Index ds = part.system_dim();
    double leak = 0.0;
    for (Eigen::Index m = 0; m < db; ++m) {
      if (m == reset_index) continue;
      double p = 0.0;
      for (Eigen::Index s = 0; s < ds; ++s) p += std::norm(evolved(s * db + m));
      leak += p;
    }
    row.leak_exact = leak;

    double perturbative = 0.0;
    for (Eigen::Index m = 0; m < db; ++m) {
      if (m == reset_index) continue;
      const double coupling_sq = std::norm(v_bath(m, reset_index));
      if (coupling_sq == 0.0) continue;
      const double gap = e_reset - bath(m, m).real();
      if (std::abs(gap) < 1e-12) {
        perturbative += coupling_sq * dt * dt;
      } else {
        const double s = std::sin(gap * dt / 2.0);
        perturbative += 4.0 * coupling_sq / (gap * gap) * s * s;
      }
    }
    row.leak_perturbative = perturbative;

    const double scale = std::max(row.leak_exact, row.leak_perturbative);
    row.leak_rel_error =
        scale < 1e-20 ? 0.0 : std::abs(row.leak_exact - row.leak_perturbative) / scale;
    report.rows.push_back(row);
  }

  std::vector<double> dts, split_errs, leaks;
  for (const auto& row : report.rows) {
    dts.push_back(row.dt);
    split_errs.push_back(row.split_error);
    leaks.push_back(row.leak_exact);
  }
  report.split_exponent = log_log_slope(dts, split_errs);
  report.leak_exponent = log_log_slope(dts, leaks);
  return report;
}

}  // namespace mondyn::theory

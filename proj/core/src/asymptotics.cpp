#include "mocrisk/asymptotics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "mocrisk/errors.hpp"

namespace mocrisk {
namespace {

Eigen::Matrix3d symmetrized(const Eigen::Matrix3d& m) { return 0.5 * (m + m.transpose()); }

Eigen::Vector3d xi_vector(const CellTable& table, double beta) {
  Eigen::Vector3d xi = Eigen::Vector3d::Zero();
  for (std::size_t l = 0; l < table.size(); ++l) xi += std::pow(table.floored(l), beta) * table.grads[l];
  return xi;
}

Eigen::Matrix3d j_from_table(const CellTable& table, double beta) {
  Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
  for (std::size_t l = 0; l < table.size(); ++l) {
    if (table.probs[l] <= 0.0) continue;  // empty interval of a non-strict grid
    j += std::pow(table.floored(l), beta - 1.0) * table.grads[l] * table.grads[l].transpose();
  }
  return symmetrized(j);
}

Eigen::Matrix3d k_from_table(const CellTable& table, double beta) {
  Eigen::Matrix3d k = Eigen::Matrix3d::Zero();
  for (std::size_t l = 0; l < table.size(); ++l) {
    if (table.probs[l] <= 0.0) continue;
    k += std::pow(table.floored(l), 2.0 * beta - 1.0) * table.grads[l] * table.grads[l].transpose();
  }
  const Eigen::Vector3d xi = xi_vector(table, beta);
  return symmetrized(k - xi * xi.transpose());
}

void require_null(const Theta& theta0, const Eigen::Vector3d& a0) {
  const double contrast = a0.dot(theta0.vector());
  if (std::abs(contrast) > 1e-10 * a0.norm() * theta0.vector().norm()) {
    throw std::invalid_argument("second-order Wald influence needs a0' theta0 = 0");
  }
}

}  // namespace

Eigen::Matrix3d j_matrix(const Theta& theta, const InspectionGrid& grid, TuningBeta beta) {
  return j_from_table(cell_table(theta, grid), beta.value());
}

Eigen::Matrix3d k_matrix(const Theta& theta, const InspectionGrid& grid, TuningBeta beta) {
  return k_from_table(cell_table(theta, grid), beta.value());
}

Eigen::Matrix3d guarded_inverse(const Eigen::Matrix3d& m, const char* what) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(symmetrized(m));
  if (eig.info() != Eigen::Success) {
    throw SingularMatrixError(std::string(what) + ": eigendecomposition failed");
  }
  const Eigen::Vector3d ev = eig.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  const double smallest = ev.minCoeff();
  if (!(smallest > 0.0) || !(largest / smallest <= kConditionLimit)) {
    std::ostringstream msg;
    msg << what << " is numerically singular (eigenvalues " << ev.transpose()
        << "); the inspection grid is degenerate";
    throw SingularMatrixError(msg.str());
  }
  const Eigen::Matrix3d inv =
      eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return symmetrized(inv);
}

SandwichCovariance sandwich(const Theta& theta, const InspectionGrid& grid, TuningBeta beta) {
  const CellTable table = cell_table(theta, grid);
  SandwichCovariance out;
  out.j = j_from_table(table, beta.value());
  out.k = beta.is_mle() ? out.j : k_from_table(table, beta.value());
  const Eigen::Matrix3d j_inv = guarded_inverse(out.j, "J");
  out.sigma = symmetrized(j_inv * out.k * j_inv);
  return out;
}

std::vector<Eigen::Vector3d> influence_table(const Theta& theta, const InspectionGrid& grid,
                                             TuningBeta beta) {
  const double b = beta.value();
  const CellTable table = cell_table(theta, grid);
  const Eigen::Matrix3d j_inv = guarded_inverse(j_from_table(table, b), "J");
  const Eigen::Vector3d xi = xi_vector(table, b);
  std::vector<Eigen::Vector3d> out(table.size());
  for (std::size_t l = 0; l < table.size(); ++l) {
    out[l] = j_inv * (std::pow(table.floored(l), b - 1.0) * table.grads[l] - xi);
  }
  return out;
}

Eigen::Vector3d influence_cell(std::size_t cell, const Theta& theta, const InspectionGrid& grid,
                               TuningBeta beta) {
  if (cell >= grid.cell_count()) throw std::out_of_range("cell index out of range");
  return influence_table(theta, grid, beta)[cell];
}

double wald_influence2_cell(std::size_t cell, const Theta& theta0, const InspectionGrid& grid,
                            TuningBeta beta, const Eigen::Vector3d& a0) {
  require_null(theta0, a0);
  const Eigen::Vector3d inf = influence_cell(cell, theta0, grid, beta);
  const double var = a0.dot(sandwich(theta0, grid, beta).sigma * a0);
  if (!(var > 0.0)) throw SingularMatrixError("a0' Sigma a0 is not positive");
  const double proj = a0.dot(inf);
  return 2.0 * proj * proj / var;
}

double wald_influence2(const BivariateObservation& x, const Theta& theta0, const InspectionGrid& grid,
                       TuningBeta beta, const Eigen::Vector3d& a0) {
  return wald_influence2_cell(classify_cell(x, grid), theta0, grid, beta, a0);
}

InfluenceVector influence_point(const BivariateObservation& x, const Theta& theta,
                                const InspectionGrid& grid, TuningBeta beta) {
  const std::size_t cell = classify_cell(x, grid);
  InfluenceVector out;
  out.value = influence_cell(cell, theta, grid, beta);
  const Eigen::Vector3d a0 = default_contrast();
  const double var = a0.dot(sandwich(theta, grid, beta).sigma * a0);
  if (!(var > 0.0)) throw SingularMatrixError("a0' Sigma a0 is not positive");
  const double proj = a0.dot(out.value);
  out.wald_second_order = 2.0 * proj * proj / var;
  return out;
}

}  // namespace mocrisk

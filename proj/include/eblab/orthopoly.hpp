#pragma once

#include "eblab/mixture.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <stdexcept>
#include <vector>

namespace eblab {

class DegreeUnstable : public std::runtime_error {
 public:
  DegreeUnstable(int degree, double drift);
  int degree;
  double drift;
};

class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(int iterations, double estimate);
  int iterations;
  double estimate;
};

class HypothesisViolated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discretization of w = φ² / f_ν: node y_i, quadrature weight times w(y_i), and m_ν(y_i).
struct WeightGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> posterior_mean;
  double radius = 0.0;
};

/// y q_j = a_{j+1} q_{j+1} + b_j q_j + a_j q_{j-1} for the orthonormal polynomials of w.
/// a[0] is unused; a[1..k+1] and b[0..k+1] are filled.
struct RecurrenceTable {
  int k = 0;
  std::vector<double> a;
  std::vector<double> b;
  WeightGrid grid;
  /// max |⟨q_i, q_j⟩ - 1{i=j}| over i, j ≤ k+1, polynomials taken from the recurrence.
  double orthonormality_residual = 0.0;
};

/// Composite Gauss-Legendre grid (400 panels of 10 nodes) on the window
/// [-R, R], R = max(M + 12, M + 2√(k+2) + 10).
WeightGrid weight_grid(const DiscretePrior& nu, int k);

/// Discretized Stieltjes procedure with one reorthogonalization pass per degree.
/// Throws DegreeUnstable for k > 60 or when a norm drifts from 1 by more than 1e-6.
RecurrenceTable recurrence_for_weight(const DiscretePrior& nu, int k);
RecurrenceTable recurrence_for_weight(const QuadraturePrior& nu, int k);

/// Values and first derivatives of q_0..q_n at every grid node (rows = nodes).
struct PolynomialValues {
  Eigen::MatrixXd q;
  Eigen::MatrixXd dq;
};
PolynomialValues evaluate_polynomials(const RecurrenceTable& table, int n);

struct OperatorMatrices {
  Eigen::MatrixXd L;  ///< ⟨q_i, q_j'⟩
  Eigen::MatrixXd A;  ///< ⟨q_i, q_j m_ν⟩ for i < j
  Eigen::MatrixXd B;  ///< B(j-1, j) = a_j
  Eigen::MatrixXd S;  ///< ⟨q_i, V' q_j⟩, V' = y + m_ν
  Eigen::MatrixXd J;  ///< (k+2)×(k+2) Jacobi matrix
};

OperatorMatrices build_operators(const RecurrenceTable& table);

/// β_j = ⟨q_j, q_{j-1} m_ν⟩ = A(j-1, j), j = 1..k.
std::vector<double> beta_coefficients(const OperatorMatrices& ops);

/// Largest singular value by block power iteration on MᵀM (block of up to 8 vectors,
/// Rayleigh-Ritz each step; stops when the top Ritz residual is below 1e-10 relative,
/// at most 10000 iterations).
double operator_norm(const Eigen::MatrixXd& mat);

/// ‖L‖_op for degree-k polynomials in L²(w).
double bernstein_constant(const DiscretePrior& nu, int k);

/// (2M + 1)√(k + 1).
double bernstein_bound(double M, int k);

/// Everything the Bernstein checks look at for one (ν, k).
struct BernsteinDiagnostics {
  int k = 0;
  double M = 0.0;
  double norm = 0.0;                    ///< ‖L‖_op
  double bound = 0.0;                   ///< (2M + 1)√(k + 1)
  double finer_bound = 0.0;             ///< √k + M + M√k
  double orthonormality_residual = 0.0;
  double triangular_residual = 0.0;     ///< max_{i ≥ j} |L_ij|
  double split_residual = 0.0;          ///< max |L - (A + B)|
  double symmetry_residual = 0.0;       ///< max |S - (L + Lᵀ)|
  double identity_residual = 0.0;       ///< max_j |a_j (a_j + β_j) - j|
  double max_abs_beta = 0.0;
  double S_norm = 0.0;
};

BernsteinDiagnostics bernstein_diagnostics(const DiscretePrior& nu, int k);

struct JacobiCheckReport {
  int k = 0;
  double C1 = 0.0;
  double C2 = 0.0;
  double max_row_identity_residual = 0.0;  ///< |a_{j+1}² + b_j² + a_j² - ∫ y² q_j² w|
  double max_row_ratio = 0.0;              ///< max_j row / ((4j+2)/C2 + C1²/C2²)
  bool row_bound_holds = false;
  double jacobi_row_sum_bound = 0.0;
  double jacobi_norm = 0.0;
  double L_norm = 0.0;
  double S_norm = 0.0;
  double empirical_C = 0.0;        ///< ‖L‖ / (√k log(k+1))
  double triangular_ratio = 0.0;   ///< ‖L‖ / (log(k+1) ‖S‖)
};

/// Checks |V'(y)| ≤ C1(1 + |y|) and V''(y) ≥ C2 on the grid (HypothesisViolated
/// otherwise), then the per-row Jacobi bounds and the norm ratios.
JacobiCheckReport jacobi_norm_bound_check(const DiscretePrior& nu, int k, double C1, double C2);

/// Writes a matrix as headerless CSV with 17 significant digits.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& mat);
/// Writes L.csv, A.csv, B.csv, S.csv and J.csv into `dir`.
void dump_operators(const std::filesystem::path& dir, const OperatorMatrices& ops);

}  // namespace eblab

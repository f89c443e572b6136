#include "eblab/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

namespace eblab {

namespace {

constexpr int kMaxStieltjesDegree = 60;
constexpr int kPanels = 400;

// 10-point Gauss-Legendre rule on [-1, 1], positive half.
constexpr double kGlNodes[5] = {0.1488743389816312108848260, 0.4333953941292471907992659,
                                0.6794095682990244062343274, 0.8650633666889845107320967,
                                0.9739065285171717200779640};
constexpr double kGlWeights[5] = {0.2955242247147528701738930, 0.2692667193099963550912269,
                                  0.2190863625159820439955349, 0.1494513491505805931457763,
                                  0.0666713443086881375935688};

double dot(const std::vector<double>& w, const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i] * y[i];
  return acc;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

DegreeUnstable::DegreeUnstable(int degree_, double drift_)
    : std::runtime_error("DegreeUnstable: norm of q_" + std::to_string(degree_) + " drifted by " +
                         format_double(drift_)),
      degree(degree_),
      drift(drift_) {}

NoConvergence::NoConvergence(int iterations_, double estimate_)
    : std::runtime_error("NoConvergence: power iteration stopped after " +
                         std::to_string(iterations_) + " iterations at " + format_double(estimate_)),
      iterations(iterations_),
      estimate(estimate_) {}

WeightGrid weight_grid(const DiscretePrior& nu, int k) {
  const MarginalModel model(nu);
  const double M = nu.support_radius();
  WeightGrid g;
  g.radius = std::max(M + 12.0, M + 2.0 * std::sqrt(k + 2.0) + 10.0);
  const double h = 2.0 * g.radius / kPanels;
  g.nodes.reserve(kPanels * 10);
  for (int p = 0; p < kPanels; ++p) {
    const double mid = -g.radius + (p + 0.5) * h;
    for (int s = 4; s >= 0; --s) {
      g.nodes.push_back(mid - 0.5 * h * kGlNodes[s]);
      g.weights.push_back(0.5 * h * kGlWeights[s]);
    }
    for (int s = 0; s < 5; ++s) {
      g.nodes.push_back(mid + 0.5 * h * kGlNodes[s]);
      g.weights.push_back(0.5 * h * kGlWeights[s]);
    }
  }
  g.posterior_mean.resize(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double y = g.nodes[i];
    const auto mom = model.posterior_moments(y);
    g.weights[i] *= std::exp(2.0 * std_normal_log_pdf(y) - mom.log_density);
    g.posterior_mean[i] = mom.mean;
  }
  return g;
}

RecurrenceTable recurrence_for_weight(const DiscretePrior& nu, int k) {
  if (k < 0) throw std::invalid_argument("recurrence_for_weight: negative degree");
  if (k > kMaxStieltjesDegree) throw DegreeUnstable(k, std::numeric_limits<double>::infinity());
  RecurrenceTable t;
  t.k = k;
  t.grid = weight_grid(nu, k);
  t.a.assign(k + 2, 0.0);
  t.b.assign(k + 2, 0.0);
  const auto& W = t.grid.weights;
  const auto& y = t.grid.nodes;
  const std::size_t n = y.size();

  std::vector<std::vector<double>> q;
  q.reserve(k + 2);
  const double mass = std::accumulate(W.begin(), W.end(), 0.0);
  q.emplace_back(n, 1.0 / std::sqrt(mass));
  std::vector<double> yq(n);
  for (int j = 0; j <= k; ++j) {
    for (std::size_t i = 0; i < n; ++i) yq[i] = y[i] * q[j][i];
    t.b[j] = dot(W, yq, q[j]);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = yq[i] - t.b[j] * q[j][i] - (j > 0 ? t.a[j] * q[j - 1][i] : 0.0);
    for (int r = 0; r <= j; ++r) {
      const double c = dot(W, v, q[r]);
      for (std::size_t i = 0; i < n; ++i) v[i] -= c * q[r][i];
    }
    const double norm = std::sqrt(dot(W, v, v));
    if (!(norm > 0.0) || !std::isfinite(norm)) throw DegreeUnstable(j + 1, 1.0);
    t.a[j + 1] = norm;
    for (double& x : v) x /= norm;
    q.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < n; ++i) yq[i] = y[i] * q[k + 1][i];
  t.b[k + 1] = dot(W, yq, q[k + 1]);

  // The polynomials used downstream come from the recurrence alone; check that they
  // are still orthonormal on the grid.
  const PolynomialValues pv = evaluate_polynomials(t, k + 1);
  Eigen::Map<const Eigen::VectorXd> Wv(W.data(), static_cast<Eigen::Index>(n));
  const Eigen::MatrixXd gram = pv.q.transpose() * Wv.asDiagonal() * pv.q;
  double residual = 0.0;
  for (int j = 0; j <= k + 1; ++j) {
    const double drift = std::abs(gram(j, j) - 1.0);
    if (drift > 1e-6) throw DegreeUnstable(j, drift);
    for (int i = 0; i <= k + 1; ++i)
      residual = std::max(residual, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));
  }
  t.orthonormality_residual = residual;
  return t;
}

RecurrenceTable recurrence_for_weight(const QuadraturePrior& nu, int k) {
  return recurrence_for_weight(nu.as_discrete(), k);
}

PolynomialValues evaluate_polynomials(const RecurrenceTable& t, int n) {
  if (n < 0 || n > t.k + 1) throw std::invalid_argument("evaluate_polynomials: degree out of range");
  const auto& y = t.grid.nodes;
  const auto N = static_cast<Eigen::Index>(y.size());
  const double mass = std::accumulate(t.grid.weights.begin(), t.grid.weights.end(), 0.0);
  PolynomialValues pv{Eigen::MatrixXd(N, n + 1), Eigen::MatrixXd(N, n + 1)};
  for (Eigen::Index i = 0; i < N; ++i) {
    double q_prev = 0.0;
    double dq_prev = 0.0;
    double q_cur = 1.0 / std::sqrt(mass);
    double dq_cur = 0.0;
    pv.q(i, 0) = q_cur;
    pv.dq(i, 0) = 0.0;
    for (int j = 0; j < n; ++j) {
      const double shift = y[i] - t.b[j];
      const double back = j > 0 ? t.a[j] : 0.0;
      const double q_next = (shift * q_cur - back * q_prev) / t.a[j + 1];
      const double dq_next = (shift * dq_cur + q_cur - back * dq_prev) / t.a[j + 1];
      q_prev = q_cur;
      dq_prev = dq_cur;
      q_cur = q_next;
      dq_cur = dq_next;
      pv.q(i, j + 1) = q_cur;
      pv.dq(i, j + 1) = dq_cur;
    }
  }
  return pv;
}

OperatorMatrices build_operators(const RecurrenceTable& t) {
  const int k = t.k;
  const PolynomialValues pv = evaluate_polynomials(t, k);
  const auto N = static_cast<Eigen::Index>(t.grid.nodes.size());
  Eigen::VectorXd W(N);
  Eigen::VectorXd Wm(N);
  Eigen::VectorXd Wv(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    W[i] = t.grid.weights[i];
    Wm[i] = W[i] * t.grid.posterior_mean[i];
    Wv[i] = W[i] * (t.grid.nodes[i] + t.grid.posterior_mean[i]);
  }
  OperatorMatrices ops;
  ops.L = pv.q.transpose() * W.asDiagonal() * pv.dq;
  const Eigen::MatrixXd Mfull = pv.q.transpose() * Wm.asDiagonal() * pv.q;
  ops.A = Mfull.triangularView<Eigen::StrictlyUpper>();
  ops.B = Eigen::MatrixXd::Zero(k + 1, k + 1);
  for (int j = 1; j <= k; ++j) ops.B(j - 1, j) = t.a[j];
  ops.S = pv.q.transpose() * Wv.asDiagonal() * pv.q;
  ops.J = Eigen::MatrixXd::Zero(k + 2, k + 2);
  for (int j = 0; j <= k + 1; ++j) ops.J(j, j) = t.b[j];
  for (int j = 1; j <= k + 1; ++j) ops.J(j - 1, j) = ops.J(j, j - 1) = t.a[j];
  return ops;
}

std::vector<double> beta_coefficients(const OperatorMatrices& ops) {
  const auto n = ops.A.cols();
  std::vector<double> beta(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index j = 1; j < n; ++j) beta[j] = ops.A(j - 1, j);
  return beta;
}

double operator_norm(const Eigen::MatrixXd& mat) {
  if (!mat.allFinite()) throw std::invalid_argument("operator_norm: non-finite entry");
  const Eigen::Index n = mat.cols();
  if (n == 0 || mat.rows() == 0) return 0.0;
  const Eigen::MatrixXd gram = mat.transpose() * mat;
  if (gram.lpNorm<Eigen::Infinity>() == 0.0) return 0.0;

  // Block power iteration with a Rayleigh-Ritz step. A block of p vectors converges
  // at rate σ_{p+1}/σ_1, so near-equal leading singular values (S has eigenvalues in
  // near ± pairs) do not stall it the way a single vector does.
  const Eigen::Index p = std::min<Eigen::Index>(n, 8);
  Eigen::MatrixXd V(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) V(i, j) = std::sin(1.0 + static_cast<double>(i * (j + 1) + j));
  V = Eigen::HouseholderQR<Eigen::MatrixXd>(V).householderQ() * Eigen::MatrixXd::Identity(n, p);
  constexpr int kMaxIterations = 10000;
  constexpr double kTol = 1e-10;
  double lambda = 0.0;
  for (int it = 1; it <= kMaxIterations; ++it) {
    const Eigen::MatrixXd W = gram * V;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(V.transpose() * W);
    const Eigen::MatrixXd Y = ritz.eigenvectors();
    lambda = ritz.eigenvalues()(p - 1);
    const Eigen::VectorXd top = V * Y.col(p - 1);
    const double residual = (gram * top - lambda * top).norm();
    if (residual <= kTol * std::abs(lambda)) return std::sqrt(std::max(lambda, 0.0));
    V = Eigen::HouseholderQR<Eigen::MatrixXd>(W * Y).householderQ() * Eigen::MatrixXd::Identity(n, p);
  }
  throw NoConvergence(kMaxIterations, std::sqrt(std::max(lambda, 0.0)));
}

double bernstein_constant(const DiscretePrior& nu, int k) {
  return operator_norm(build_operators(recurrence_for_weight(nu, k)).L);
}

double bernstein_bound(double M, int k) { return (2.0 * M + 1.0) * std::sqrt(k + 1.0); }

BernsteinDiagnostics bernstein_diagnostics(const DiscretePrior& nu, int k) {
  const RecurrenceTable t = recurrence_for_weight(nu, k);
  const OperatorMatrices ops = build_operators(t);
  BernsteinDiagnostics d;
  d.k = k;
  d.M = nu.support_radius();
  d.norm = operator_norm(ops.L);
  d.bound = bernstein_bound(d.M, k);
  d.finer_bound = std::sqrt(static_cast<double>(k)) * (1.0 + d.M) + d.M;
  d.orthonormality_residual = t.orthonormality_residual;
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j <= i; ++j) d.triangular_residual = std::max(d.triangular_residual, std::abs(ops.L(i, j)));
  d.split_residual = (ops.L - ops.A - ops.B).cwiseAbs().maxCoeff();
  d.symmetry_residual = (ops.S - ops.L - ops.L.transpose()).cwiseAbs().maxCoeff();
  const std::vector<double> beta = beta_coefficients(ops);
  for (int j = 1; j <= k; ++j) {
    d.identity_residual = std::max(d.identity_residual, std::abs(t.a[j] * (t.a[j] + beta[j]) - j));
    d.max_abs_beta = std::max(d.max_abs_beta, std::abs(beta[j]));
  }
  d.S_norm = operator_norm(ops.S);
  return d;
}

JacobiCheckReport jacobi_norm_bound_check(const DiscretePrior& nu, int k, double C1, double C2) {
  if (!(C1 > 0.0 && C2 > 0.0))
    throw std::invalid_argument("jacobi_norm_bound_check: C1 and C2 must be positive");
  const RecurrenceTable t = recurrence_for_weight(nu, k);
  const MarginalModel model(nu);
  for (std::size_t i = 0; i < t.grid.nodes.size(); ++i) {
    const double y = t.grid.nodes[i];
    const double vp = y + t.grid.posterior_mean[i];
    if (std::abs(vp) > C1 * (1.0 + std::abs(y)))
      throw HypothesisViolated("jacobi_norm_bound_check: |V'(y)| > C1 (1 + |y|) at y = " +
                               format_double(y));
    if (1.0 + model.posterior_variance(y) < C2)
      throw HypothesisViolated("jacobi_norm_bound_check: V''(y) < C2 at y = " + format_double(y));
  }

  JacobiCheckReport r;
  r.k = k;
  r.C1 = C1;
  r.C2 = C2;
  const PolynomialValues pv = evaluate_polynomials(t, k);
  r.row_bound_holds = true;
  for (int j = 0; j <= k; ++j) {
    double second = 0.0;
    for (std::size_t i = 0; i < t.grid.nodes.size(); ++i) {
      const double yq = t.grid.nodes[i] * pv.q(static_cast<Eigen::Index>(i), j);
      second += t.grid.weights[i] * yq * yq;
    }
    const double row = t.a[j + 1] * t.a[j + 1] + t.b[j] * t.b[j] + t.a[j] * t.a[j];
    r.max_row_identity_residual = std::max(r.max_row_identity_residual, std::abs(row - second));
    const double bound = (4.0 * j + 2.0) / C2 + C1 * C1 / (C2 * C2);
    r.max_row_ratio = std::max(r.max_row_ratio, row / bound);
    if (row > bound) r.row_bound_holds = false;
  }
  const OperatorMatrices ops = build_operators(t);
  for (Eigen::Index i = 0; i < ops.J.rows(); ++i)
    r.jacobi_row_sum_bound = std::max(r.jacobi_row_sum_bound, ops.J.row(i).cwiseAbs().sum());
  r.jacobi_norm = operator_norm(ops.J);
  r.L_norm = operator_norm(ops.L);
  r.S_norm = operator_norm(ops.S);
  const double logk = std::log(k + 1.0);
  r.empirical_C = k > 0 ? r.L_norm / (std::sqrt(static_cast<double>(k)) * logk) : 0.0;
  r.triangular_ratio = k > 0 && r.S_norm > 0.0 ? r.L_norm / (logk * r.S_norm) : 0.0;
  return r;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& mat) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_matrix_csv: cannot open " + path.string());
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      if (j) out << ',';
      out << format_double(mat(i, j));
    }
    out << '\n';
  }
}

void dump_operators(const std::filesystem::path& dir, const OperatorMatrices& ops) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "L.csv", ops.L);
  write_matrix_csv(dir / "A.csv", ops.A);
  write_matrix_csv(dir / "B.csv", ops.B);
  write_matrix_csv(dir / "S.csv", ops.S);
  write_matrix_csv(dir / "J.csv", ops.J);
}

}  // namespace eblab

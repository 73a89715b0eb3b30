#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mhlr/kernels.hpp"
#include "mhlr/types.hpp"

namespace mhlr {

struct Hyperparams {
  double gamma_K = 1e-4;      // RKHS norm weight, must be > 0
  double gamma_I = 1e-3;      // manifold term weight, 0 disables it
  double gamma_theta = 0.1;   // kernel-weight ridge
  double gamma_beta = 0.1;    // regularizer-weight ridge
  double cg_tol = 1e-7;       // block-solver objective-change stop
  int cg_max_iter = 500;
  double outer_tol = 1e-5;    // relative objective-change stop, outer loop
  int outer_max_iter = 100;

  void validate() const {
    if (!(gamma_K > 0.0)) throw config_error("gamma_K must be > 0");
    if (!(gamma_I >= 0.0)) throw config_error("gamma_I must be >= 0");
    if (!(gamma_theta > 0.0)) throw config_error("gamma_theta must be > 0");
    if (!(gamma_beta > 0.0)) throw config_error("gamma_beta must be > 0");
    if (!(cg_tol > 0.0)) throw config_error("cg_tol must be > 0");
    if (!(outer_tol > 0.0)) throw config_error("outer_tol must be > 0");
    if (cg_max_iter < 1) throw config_error("cg_max_iter must be >= 1");
    if (outer_max_iter < 1) throw config_error("outer_max_iter must be >= 1");
  }
};

/// The finite-dimensional training problem: per-view Gram matrices, per-view
/// regularizer matrices, and {0,1} labels on the labeled subset of the n
/// training points.
struct ProblemInstance {
  std::vector<Matrix> grams;
  std::vector<Matrix> regularizers;
  std::vector<Index> labeled_indices;
  Vector labels01;
  Index n = 0;
  Hyperparams hyper;

  Index kernel_views() const { return static_cast<Index>(grams.size()); }
  Index regularizer_views() const { return static_cast<Index>(regularizers.size()); }
  Index labeled_count() const { return static_cast<Index>(labeled_indices.size()); }

  void validate() const {
    hyper.validate();
    if (grams.empty()) throw validation_error("problem needs at least one Gram matrix");
    if (regularizers.empty()) throw validation_error("problem needs at least one regularizer");
    for (const Matrix& m : grams) {
      if (m.rows() != n || m.cols() != n) throw validation_error("Gram matrix is not n x n");
    }
    for (const Matrix& m : regularizers) {
      if (m.rows() != n || m.cols() != n) throw validation_error("regularizer is not n x n");
    }
    if (labeled_indices.empty()) throw validation_error("problem needs at least one labeled point");
    if (static_cast<Index>(labels01.size()) != labeled_count()) {
      throw validation_error("labels01 length does not match labeled index count");
    }
    std::vector<Index> sorted = labeled_indices;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] < 0 || sorted[i] >= n) throw validation_error("labeled index out of range");
      if (i > 0 && sorted[i] == sorted[i - 1]) throw validation_error("duplicate labeled index");
    }
    for (Index i = 0; i < labels01.size(); ++i) {
      if (labels01[i] != 0.0 && labels01[i] != 1.0) {
        throw validation_error("labels01 entries must be 0 or 1");
      }
    }
  }
};

namespace detail {

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// log(1 + e^t) without overflow.
inline double softplus(double t) {
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

/// Mean logistic loss over labeled points given their decision values.
inline double mean_logistic_loss(const Vector& t_labeled, const Vector& y01) {
  double sum = 0.0;
  for (Index i = 0; i < t_labeled.size(); ++i) {
    sum += softplus(t_labeled[i]) - y01[i] * t_labeled[i];
  }
  return sum / static_cast<double>(t_labeled.size());
}

/// Weights may drift slightly off the simplex (finite-difference probes,
/// rounding); grossly infeasible vectors are still rejected.
inline void check_near_simplex(const Vector& w, const char* name) {
  if (w.size() < 1) throw validation_error(std::string(name) + " must have length >= 1");
  double sum = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < -1e-3) {
      throw validation_error(std::string(name) + " is not on the simplex (entry " +
                             std::to_string(i) + ")");
    }
    sum += w[i];
  }
  if (std::abs(sum - 1.0) > 1e-3) {
    throw validation_error(std::string(name) + " is not on the simplex (sum " +
                           std::to_string(sum) + ")");
  }
}

inline Vector gather(const Vector& full, const std::vector<Index>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Index>(i)] = full[idx[i]];
  return out;
}

}  // namespace detail

/// J(alpha, theta, beta): mean logistic loss on labeled points plus
/// gamma_K a'Ka + gamma_I a'KHKa + gamma_theta |theta|^2 + gamma_beta |beta|^2,
/// with K and H the simplex-weighted view combinations.
inline double objective(const Vector& alpha, const Vector& theta, const Vector& beta,
                        const ProblemInstance& problem) {
  const Hyperparams& hp = problem.hyper;
  if (alpha.size() != problem.n) throw validation_error("alpha length must be n");
  if (theta.size() != problem.kernel_views()) throw validation_error("theta length must match view count");
  if (beta.size() != problem.regularizer_views()) throw validation_error("beta length must match view count");
  detail::check_near_simplex(theta, "theta");
  detail::check_near_simplex(beta, "beta");

  Matrix k = Matrix::Zero(problem.n, problem.n);
  for (Index v = 0; v < problem.kernel_views(); ++v) {
    if (theta[v] != 0.0) k += theta[v] * problem.grams[static_cast<std::size_t>(v)];
  }
  const Vector t = k * alpha;

  double j = detail::mean_logistic_loss(detail::gather(t, problem.labeled_indices), problem.labels01);
  j += hp.gamma_K * alpha.dot(t);
  if (hp.gamma_I > 0.0) {
    Vector hr = Vector::Zero(problem.n);
    for (Index v = 0; v < problem.regularizer_views(); ++v) {
      if (beta[v] != 0.0) hr += beta[v] * (problem.regularizers[static_cast<std::size_t>(v)] * t);
    }
    j += hp.gamma_I * t.dot(hr);  // a'KHKa = (Ka)'H(Ka)
  }
  j += hp.gamma_theta * theta.squaredNorm();
  j += hp.gamma_beta * beta.squaredNorm();
  return j;
}

/// Exact gradient of [objective] in alpha:
/// (1/l) K_L' (sigma(K_L a) - y) + 2 gamma_K K a + 2 gamma_I K H K a.
inline Vector gradient_alpha(const Vector& alpha, const Vector& theta, const Vector& beta,
                             const ProblemInstance& problem) {
  const Hyperparams& hp = problem.hyper;
  if (alpha.size() != problem.n) throw validation_error("alpha length must be n");
  detail::check_near_simplex(theta, "theta");
  detail::check_near_simplex(beta, "beta");

  Matrix k = Matrix::Zero(problem.n, problem.n);
  for (Index v = 0; v < problem.kernel_views(); ++v) {
    if (theta[v] != 0.0) k += theta[v] * problem.grams[static_cast<std::size_t>(v)];
  }
  const Vector ka = k * alpha;
  const double l = static_cast<double>(problem.labeled_count());

  Vector g = 2.0 * hp.gamma_K * ka;
  for (std::size_t i = 0; i < problem.labeled_indices.size(); ++i) {
    const Index li = problem.labeled_indices[i];
    const double residual = detail::sigmoid(ka[li]) - problem.labels01[static_cast<Index>(i)];
    g += (residual / l) * k.col(li);
  }
  if (hp.gamma_I > 0.0) {
    Vector hka = Vector::Zero(problem.n);
    for (Index v = 0; v < problem.regularizer_views(); ++v) {
      if (beta[v] != 0.0) hka += beta[v] * (problem.regularizers[static_cast<std::size_t>(v)] * ka);
    }
    g += 2.0 * hp.gamma_I * (k * hka);
  }
  return g;
}

/// Gradient of [objective] in theta (the unconstrained extension; the solver
/// couples it with a simplex projection):
/// component k = (1/l) sum_L (sigma(t_i) - y_i)(K^k a)_i + gamma_K a'K^k a
///             + 2 gamma_I (HKa)'(K^k a) + 2 gamma_theta theta_k.
inline Vector gradient_theta(const Vector& alpha, const Vector& theta, const Vector& beta,
                             const ProblemInstance& problem) {
  const Hyperparams& hp = problem.hyper;
  if (alpha.size() != problem.n) throw validation_error("alpha length must be n");
  detail::check_near_simplex(theta, "theta");
  detail::check_near_simplex(beta, "beta");
  const Index vk = problem.kernel_views();
  const double l = static_cast<double>(problem.labeled_count());

  std::vector<Vector> pk(static_cast<std::size_t>(vk));
  for (Index v = 0; v < vk; ++v) pk[static_cast<std::size_t>(v)] = problem.grams[static_cast<std::size_t>(v)] * alpha;
  Vector ka = Vector::Zero(problem.n);
  for (Index v = 0; v < vk; ++v) ka += theta[v] * pk[static_cast<std::size_t>(v)];

  Vector hka = Vector::Zero(problem.n);
  if (hp.gamma_I > 0.0) {
    for (Index v = 0; v < problem.regularizer_views(); ++v) {
      if (beta[v] != 0.0) hka += beta[v] * (problem.regularizers[static_cast<std::size_t>(v)] * ka);
    }
  }

  Vector g(vk);
  for (Index v = 0; v < vk; ++v) {
    const Vector& p = pk[static_cast<std::size_t>(v)];
    double loss_part = 0.0;
    for (std::size_t i = 0; i < problem.labeled_indices.size(); ++i) {
      const Index li = problem.labeled_indices[i];
      loss_part += (detail::sigmoid(ka[li]) - problem.labels01[static_cast<Index>(i)]) * p[li];
    }
    g[v] = loss_part / l + hp.gamma_K * alpha.dot(p) + 2.0 * hp.gamma_I * hka.dot(p) +
           2.0 * hp.gamma_theta * theta[v];
  }
  return g;
}

/// Euclidean projection onto the probability simplex (sort-based threshold).
inline SimplexWeights project_simplex(const Vector& v) {
  if (v.size() < 1) throw validation_error("project_simplex needs length >= 1");
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw validation_error("project_simplex: non-finite input");
  }
  const Index m = v.size();
  std::vector<double> u(v.data(), v.data() + m);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double prefix = 0.0;
  double tau = 0.0;
  for (Index j = 0; j < m; ++j) {
    prefix += u[static_cast<std::size_t>(j)];
    const double candidate = (prefix - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - candidate > 0.0) tau = candidate;
  }
  Vector w(m);
  for (Index i = 0; i < m; ++i) w[i] = std::max(v[i] - tau, 0.0);
  // Guard against catastrophic cancellation on extreme inputs; for ordinary
  // magnitudes the raw projection already sums to 1 within a few ulps.
  const double sum = w.sum();
  if (std::abs(sum - 1.0) > SimplexWeights::kSumTolerance) {
    if (sum > 0.0) {
      w /= sum;
    } else {
      w.setConstant(1.0 / static_cast<double>(m));
    }
  }
  return SimplexWeights(std::move(w));
}

struct AlphaSolveResult {
  Vector alpha;
  double objective = 0.0;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool stalled = false;
};

struct CgOptions {
  double tol = 1e-7;
  int max_iter = 500;
};

namespace detail {

constexpr double kArmijoC1 = 1e-4;
constexpr int kMaxBacktracks = 60;

/// State for evaluating J along alpha updates without re-multiplying by K:
/// tracks Ka and H(Ka) incrementally.
struct AlphaEvaluator {
  const ProblemInstance& problem;
  Matrix k;      // combined kernel
  Matrix khk;    // combined K H K, symmetrized; empty when gamma_I == 0
  double constant;
  bool use_manifold;

  AlphaEvaluator(const ProblemInstance& p, const Vector& theta, const Vector& beta)
      : problem(p), constant(0.0) {
    const Hyperparams& hp = p.hyper;
    use_manifold = hp.gamma_I > 0.0;
    k = Matrix::Zero(p.n, p.n);
    for (Index v = 0; v < p.kernel_views(); ++v) {
      if (theta[v] != 0.0) k += theta[v] * p.grams[static_cast<std::size_t>(v)];
    }
    if (use_manifold) {
      Matrix h = Matrix::Zero(p.n, p.n);
      for (Index v = 0; v < p.regularizer_views(); ++v) {
        if (beta[v] != 0.0) h += beta[v] * p.regularizers[static_cast<std::size_t>(v)];
      }
      khk = k * h * k;
      khk = (0.5 * (khk + khk.transpose())).eval();
    }
    constant = hp.gamma_theta * theta.squaredNorm() + hp.gamma_beta * beta.squaredNorm();
  }

  double value(const Vector& alpha, const Vector& ka, const Vector& khka) const {
    const Hyperparams& hp = problem.hyper;
    double j = mean_logistic_loss(gather(ka, problem.labeled_indices), problem.labels01);
    j += hp.gamma_K * alpha.dot(ka);
    if (use_manifold) j += hp.gamma_I * alpha.dot(khka);
    return j + constant;
  }

  Vector gradient(const Vector& ka, const Vector& khka) const {
    const Hyperparams& hp = problem.hyper;
    const double l = static_cast<double>(problem.labeled_count());
    Vector g = 2.0 * hp.gamma_K * ka;
    if (use_manifold) g += 2.0 * hp.gamma_I * khka;
    for (std::size_t i = 0; i < problem.labeled_indices.size(); ++i) {
      const Index li = problem.labeled_indices[i];
      const double residual = sigmoid(ka[li]) - problem.labels01[static_cast<Index>(i)];
      g += (residual / l) * k.col(li);
    }
    return g;
  }
};

}  // namespace detail

/// Minimizes J in alpha with theta, beta fixed: nonlinear conjugate gradient,
/// Fletcher-Reeves direction updates, Armijo backtracking line search.
/// Stops when the objective change drops below tol or the iteration cap.
inline AlphaSolveResult solve_alpha(const ProblemInstance& problem, const Vector& theta,
                                    const Vector& beta, const Vector& alpha_init,
                                    const CgOptions& opts = {}) {
  detail::check_near_simplex(theta, "theta");
  detail::check_near_simplex(beta, "beta");
  if (alpha_init.size() != problem.n) throw validation_error("alpha_init length must be n");

  const detail::AlphaEvaluator eval(problem, theta, beta);
  AlphaSolveResult res;
  res.alpha = alpha_init;

  Vector ka = eval.k * res.alpha;
  Vector khka = eval.use_manifold ? Vector(eval.khk * res.alpha) : Vector::Zero(problem.n);
  double f = eval.value(res.alpha, ka, khka);
  res.objective_trace.push_back(f);
  Vector g = eval.gradient(ka, khka);

  if (g.norm() < opts.tol) {
    res.objective = f;
    return res;
  }

  Vector d = -g;
  for (int m = 1; m <= opts.max_iter; ++m) {
    if (g.dot(d) >= 0.0 || m % problem.n == 0) d = -g;  // restart

    const Vector kd = eval.k * d;
    const Vector khkd = eval.use_manifold ? Vector(eval.khk * d) : Vector::Zero(problem.n);
    const double slope = g.dot(d);

    double step = 1.0;
    bool accepted = false;
    double f_new = f;
    for (int bt = 0; bt < detail::kMaxBacktracks; ++bt) {
      const Vector ka_try = ka + step * kd;
      const Vector khka_try = khka + step * khkd;
      const Vector alpha_try = res.alpha + step * d;
      f_new = eval.value(alpha_try, ka_try, khka_try);
      if (f_new <= f + detail::kArmijoC1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No decrease along a descent direction: either we are numerically at
      // the optimum or the solver is stuck.
      if (g.norm() <= 1e-10 * std::max(1.0, std::abs(f))) break;
      res.stalled = true;
      break;
    }

    res.alpha += step * d;
    ka += step * kd;
    khka += step * khkd;
    if (m % 128 == 0) {  // re-anchor the cached products; incremental updates drift
      ka = eval.k * res.alpha;
      if (eval.use_manifold) khka = eval.khk * res.alpha;
    }
    res.iterations = m;

    const double drop = std::abs(f - f_new);
    f = f_new;
    res.objective_trace.push_back(f);
    if (drop < opts.tol) break;

    const Vector g_new = eval.gradient(ka, khka);
    const double fr = g_new.squaredNorm() / g.squaredNorm();
    d = -g_new + fr * d;
    g = g_new;
  }
  res.objective = f;
  return res;
}

struct ThetaSolveResult {
  SimplexWeights theta;
  double objective = 0.0;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool stalled = false;
};

/// Minimizes J in theta with alpha, beta fixed: projected gradient descent
/// with backtracking on the projected point. The objective reduces to
/// l labeled logits t = P theta, a linear term, and the quadratic
/// theta' M theta with M_kj = (K^k a)' H (K^j a), all precomputed.
inline ThetaSolveResult solve_theta(const ProblemInstance& problem, const Vector& alpha,
                                    const Vector& beta, const SimplexWeights& theta_init,
                                    const CgOptions& opts = {}) {
  detail::check_near_simplex(beta, "beta");
  if (alpha.size() != problem.n) throw validation_error("alpha length must be n");
  const Hyperparams& hp = problem.hyper;
  const Index vk = problem.kernel_views();
  if (theta_init.size() != vk) throw validation_error("theta_init length must match view count");

  if (vk == 1) {
    double j = objective(alpha, theta_init.values(), beta, problem);
    return ThetaSolveResult{theta_init, j, {j}, 0, false};
  }

  const double l = static_cast<double>(problem.labeled_count());
  std::vector<Vector> pk(static_cast<std::size_t>(vk));
  for (Index v = 0; v < vk; ++v) pk[static_cast<std::size_t>(v)] = problem.grams[static_cast<std::size_t>(v)] * alpha;

  Matrix p_labeled(problem.labeled_count(), vk);
  Vector q(vk);
  for (Index v = 0; v < vk; ++v) {
    const Vector& p = pk[static_cast<std::size_t>(v)];
    q[v] = alpha.dot(p);
    for (std::size_t i = 0; i < problem.labeled_indices.size(); ++i) {
      p_labeled(static_cast<Index>(i), v) = p[problem.labeled_indices[i]];
    }
  }

  Matrix quad = Matrix::Zero(vk, vk);
  if (hp.gamma_I > 0.0) {
    Matrix h = Matrix::Zero(problem.n, problem.n);
    for (Index v = 0; v < problem.regularizer_views(); ++v) {
      if (beta[v] != 0.0) h += beta[v] * problem.regularizers[static_cast<std::size_t>(v)];
    }
    for (Index a = 0; a < vk; ++a) {
      const Vector hp_a = h * pk[static_cast<std::size_t>(a)];
      for (Index b = a; b < vk; ++b) {
        quad(a, b) = quad(b, a) = hp_a.dot(pk[static_cast<std::size_t>(b)]);
      }
    }
  }
  const double constant = hp.gamma_beta * beta.squaredNorm();

  auto value = [&](const Vector& th) {
    double j = detail::mean_logistic_loss(p_labeled * th, problem.labels01);
    j += hp.gamma_K * q.dot(th);
    if (hp.gamma_I > 0.0) j += hp.gamma_I * th.dot(quad * th);
    return j + hp.gamma_theta * th.squaredNorm() + constant;
  };
  auto grad = [&](const Vector& th) {
    const Vector t = p_labeled * th;
    Vector sres(t.size());
    for (Index i = 0; i < t.size(); ++i) sres[i] = detail::sigmoid(t[i]) - problem.labels01[i];
    Vector g = p_labeled.transpose() * sres / l + hp.gamma_K * q + 2.0 * hp.gamma_theta * th;
    if (hp.gamma_I > 0.0) g += 2.0 * hp.gamma_I * (quad * th);
    return g;
  };

  ThetaSolveResult res{theta_init, 0.0, {}, 0, false};
  Vector th = theta_init.values();
  double f = value(th);
  res.objective_trace.push_back(f);

  for (int m = 1; m <= opts.max_iter; ++m) {
    const Vector g = grad(th);
    double step = 1.0;
    bool accepted = false;
    bool stationary = false;
    Vector th_new = th;
    double f_new = f;
    for (int bt = 0; bt < detail::kMaxBacktracks; ++bt) {
      th_new = project_simplex(th - step * g).values();
      const double move2 = (th_new - th).squaredNorm();
      if (move2 <= 1e-30) {
        stationary = true;
        break;
      }
      f_new = value(th_new);
      if (f_new <= f - detail::kArmijoC1 / step * move2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (stationary) break;
    if (!accepted) {
      res.stalled = true;
      break;
    }
    th = th_new;
    res.iterations = m;
    const double drop = std::abs(f - f_new);
    f = f_new;
    res.objective_trace.push_back(f);
    if (drop < opts.tol) break;
  }

  res.theta = SimplexWeights(th);
  res.objective = f;
  return res;
}

/// Minimizes J in beta with alpha, theta fixed. With c_j = a'K H^j K a >= 0
/// the problem is gamma_I c'beta + gamma_beta |beta|^2 over the simplex,
/// whose minimizer is the projection of -gamma_I c / (2 gamma_beta).
inline SimplexWeights solve_beta(const ProblemInstance& problem, const Vector& alpha,
                                 const SimplexWeights& theta) {
  const Hyperparams& hp = problem.hyper;
  if (alpha.size() != problem.n) throw validation_error("alpha length must be n");
  const Index vr = problem.regularizer_views();
  if (vr == 1) return SimplexWeights::one_hot(1, 0);

  Matrix k = Matrix::Zero(problem.n, problem.n);
  for (Index v = 0; v < problem.kernel_views(); ++v) {
    if (theta[v] != 0.0) k += theta[v] * problem.grams[static_cast<std::size_t>(v)];
  }
  const Vector r = k * alpha;
  Vector c(vr);
  for (Index v = 0; v < vr; ++v) {
    c[v] = r.dot(problem.regularizers[static_cast<std::size_t>(v)] * r);
  }
  return project_simplex(-hp.gamma_I / (2.0 * hp.gamma_beta) * c);
}

struct SolverInit {
  std::optional<Vector> alpha;
  std::optional<SimplexWeights> theta;
  std::optional<SimplexWeights> beta;
};

struct SolverState {
  Vector alpha;
  SimplexWeights theta;
  SimplexWeights beta;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
};

/// Alternating block optimization: alpha with theta, beta fixed; then theta;
/// then beta in closed form. Records the objective after every outer
/// iteration; stops on relative change below outer_tol. Finds a local
/// solution; a stalled block ends the loop with converged = false.
inline SolverState alternate(const ProblemInstance& problem, const SolverInit& init = {}) {
  problem.validate();
  const Hyperparams& hp = problem.hyper;
  const CgOptions cg{hp.cg_tol, hp.cg_max_iter};

  SolverState state{
      init.alpha.value_or(Vector::Zero(problem.n)),
      init.theta.value_or(SimplexWeights::uniform(problem.kernel_views())),
      init.beta.value_or(SimplexWeights::uniform(problem.regularizer_views())),
      {},
      0,
      false};

  double j = objective(state.alpha, state.theta.values(), state.beta.values(), problem);
  state.objective_trace.push_back(j);

  for (int outer = 1; outer <= hp.outer_max_iter; ++outer) {
    bool stalled = false;

    AlphaSolveResult ares =
        solve_alpha(problem, state.theta.values(), state.beta.values(), state.alpha, cg);
    state.alpha = std::move(ares.alpha);
    stalled = stalled || ares.stalled;

    ThetaSolveResult tres = solve_theta(problem, state.alpha, state.beta.values(), state.theta, cg);
    state.theta = tres.theta;
    stalled = stalled || tres.stalled;

    state.beta = solve_beta(problem, state.alpha, state.theta);

    const double j_new =
        objective(state.alpha, state.theta.values(), state.beta.values(), problem);
    state.objective_trace.push_back(j_new);
    state.iterations = outer;

    if (stalled) break;
    if (std::abs(j - j_new) / std::max(std::abs(j), 1e-12) < hp.outer_tol) {
      state.converged = true;
      break;
    }
    j = j_new;
  }
  return state;
}

}  // namespace mhlr

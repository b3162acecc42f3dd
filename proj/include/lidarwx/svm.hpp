#pragma once

// Soft-margin SVM trained in the dual with an SMO solver (maximal-gain
// second-order working-set selection), one-vs-one for multiple classes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lidarwx/error.hpp"
#include "lidarwx/standardizer.hpp"

namespace lidarwx {

enum class KernelKind : std::uint8_t { linear = 0, rbf = 1 };

struct Kernel {
  KernelKind kind = KernelKind::rbf;
  double gamma = 1.0;

  double operator()(std::span<const double> a, std::span<const double> b) const {
    if (kind == KernelKind::linear) {
      double s = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
      return s;
    }
    return std::exp(-gamma * squared_distance(a, b));
  }
  friend bool operator==(const Kernel&, const Kernel&) = default;
};

struct SvmParams {
  KernelKind kernel = KernelKind::rbf;
  double c = 1.0;
  double gamma = 0.0;  // <= 0: median heuristic
  double tolerance = 1e-3;
  long max_iterations = 0;  // <= 0: max(10^7, 100 n)
};

/// Dual solution of one binary problem, y = +1 for `positive`.
struct BinarySvm {
  int positive = 0;
  int negative = 1;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> coef;  // alpha_i * y_i for each support vector
  double bias = 0.0;         // decision = sum coef_i K(sv_i, x) + bias
  long iterations = 0;

  double decision(const Kernel& kernel, std::span<const double> x) const {
    double s = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i)
      s += coef[i] * kernel(support_vectors[i], x);
    return s;
  }
  friend bool operator==(const BinarySvm&, const BinarySvm&) = default;
};

struct SvmModel {
  Kernel kernel;
  double c = 1.0;
  std::vector<int> classes;  // sorted class indices
  std::vector<BinarySvm> pairs;

  friend bool operator==(const SvmModel&, const SvmModel&) = default;
};

/// Solves min 1/2 a'Qa - sum a s.t. 0 <= a <= C, y'a = 0, Q_ij = y_i y_j K_ij.
/// Returns the full alpha vector; `rho` receives the offset so that the
/// decision value is sum a_i y_i K(x_i, x) - rho.
struct DualSolution {
  std::vector<double> alpha;
  double rho = 0.0;
  long iterations = 0;
  double gap = 0.0;
  bool converged = false;
};

inline DualSolution solve_svm_dual(const std::vector<std::vector<double>>& x,
                                   const std::vector<int>& y, const Kernel& kernel, double c,
                                   double tolerance, long max_iterations) {
  const std::size_t n = x.size();
  constexpr double kTau = 1e-12;
  std::vector<std::vector<double>> rows(n);  // lazily filled kernel rows
  auto row = [&](std::size_t i) -> const std::vector<double>& {
    if (rows[i].empty()) {
      rows[i].resize(n);
      for (std::size_t t = 0; t < n; ++t) rows[i][t] = kernel(x[i], x[t]);
    }
    return rows[i];
  };
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = kernel(x[i], x[i]);

  DualSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto& alpha = sol.alpha;
  const auto up = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
  };
  const auto low = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c);
  };

  if (max_iterations <= 0) max_iterations = std::max<long>(10'000'000L, 100L * static_cast<long>(n));
  for (sol.iterations = 0; sol.iterations < max_iterations; ++sol.iterations) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (up(t) && -y[t] * grad[t] >= gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    double gmin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t)
      if (low(t)) gmin = std::min(gmin, -y[t] * grad[t]);
    sol.gap = gmax - gmin;
    if (i == n || sol.gap < tolerance) {
      sol.converged = true;
      break;
    }

    const auto& ki = row(i);
    std::size_t j = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (!low(t)) continue;
      const double b = gmax + y[t] * grad[t];
      if (b <= 0.0) continue;
      double a = diag[i] + diag[t] - 2.0 * ki[t];
      if (a <= 0.0) a = kTau;
      const double gain = -(b * b) / a;
      if (gain <= best) {
        best = gain;
        j = t;
      }
    }
    if (j == n) {
      sol.converged = true;
      break;
    }
    const auto& kj = row(j);

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = diag[i] + diag[j] + 2.0 * (y[i] * y[j] * ki[j]);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = diag[i] + diag[j] - 2.0 * ki[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
  }

  // Offset from free variables, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  sol.rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;
  return sol;
}

/// Median-heuristic RBF width: 1 / (16 * median pairwise squared distance),
/// over at most 1000 evenly strided samples.
inline double median_heuristic_gamma(const std::vector<std::vector<double>>& x) {
  const std::size_t stride = std::max<std::size_t>(1, (x.size() + 999) / 1000);
  std::vector<const std::vector<double>*> sub;
  for (std::size_t i = 0; i < x.size(); i += stride) sub.push_back(&x[i]);
  std::vector<double> d2;
  for (std::size_t i = 0; i < sub.size(); ++i)
    for (std::size_t j = i + 1; j < sub.size(); ++j) d2.push_back(squared_distance(*sub[i], *sub[j]));
  if (d2.empty()) return 1.0;
  auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
  std::nth_element(d2.begin(), mid, d2.end());
  const double med = *mid;
  return med > 0.0 ? 1.0 / (16.0 * med) : 1.0;
}

/// Trains one-vs-one SVMs on standardized samples with class-index labels.
inline SvmModel svm_train(const std::vector<std::vector<double>>& x, const std::vector<int>& labels,
                          const SvmParams& params = {}) {
  if (x.size() != labels.size()) throw InvalidArgument("svm_train: label count mismatch");
  if (!(params.c > 0.0)) throw InvalidArgument("svm_train: C must be > 0");
  SvmModel model;
  model.c = params.c;
  model.kernel.kind = params.kernel;
  model.kernel.gamma = params.gamma > 0.0 ? params.gamma : median_heuristic_gamma(x);
  model.classes = labels;
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
  if (model.classes.size() < 2) throw InvalidArgument("svm_train: need at least two classes");

  for (std::size_t a = 0; a < model.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
      std::vector<std::vector<double>> px;
      std::vector<int> py;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (labels[i] == model.classes[a]) {
          px.push_back(x[i]);
          py.push_back(+1);
        } else if (labels[i] == model.classes[b]) {
          px.push_back(x[i]);
          py.push_back(-1);
        }
      }
      const DualSolution sol =
          solve_svm_dual(px, py, model.kernel, params.c, params.tolerance, params.max_iterations);
      if (!sol.converged)
        throw SvmNotConverged(model.classes[a], model.classes[b], sol.iterations, sol.gap);
      BinarySvm pair;
      pair.positive = model.classes[a];
      pair.negative = model.classes[b];
      pair.bias = -sol.rho;
      pair.iterations = sol.iterations;
      for (std::size_t i = 0; i < px.size(); ++i) {
        if (sol.alpha[i] > 0.0) {
          pair.support_vectors.push_back(px[i]);
          pair.coef.push_back(sol.alpha[i] * py[i]);
        }
      }
      model.pairs.push_back(std::move(pair));
    }
  }
  return model;
}

/// Pairwise voting; ties go to the class with the largest summed margin.
inline int svm_predict_standardized(const SvmModel& model, std::span<const double> x) {
  const std::size_t m = model.classes.size();
  std::vector<int> votes(m, 0);
  std::vector<double> margin(m, 0.0);
  const auto slot = [&](int cls) {
    return static_cast<std::size_t>(
        std::lower_bound(model.classes.begin(), model.classes.end(), cls) - model.classes.begin());
  };
  for (const BinarySvm& p : model.pairs) {
    const double d = p.decision(model.kernel, x);
    const std::size_t pa = slot(p.positive);
    const std::size_t pb = slot(p.negative);
    ++votes[d > 0.0 ? pa : pb];
    margin[pa] += d;
    margin[pb] -= d;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < m; ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && margin[c] > margin[best])) best = c;
  }
  return model.classes[best];
}

}  // namespace lidarwx

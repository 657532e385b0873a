#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vcasir/error.hpp"

namespace vcasir {

enum class KernelType { Rbf, Linear };

inline std::string_view to_string(KernelType k) { return k == KernelType::Rbf ? "rbf" : "linear"; }

inline KernelType parse_kernel(std::string_view s) {
  if (s == "rbf") return KernelType::Rbf;
  if (s == "linear") return KernelType::Linear;
  throw ParameterError("unknown kernel '" + std::string(s) + "'");
}

struct SvrParams {
  KernelType kernel = KernelType::Rbf;
  double C = 10.0;
  double epsilon = 0.1;
  std::optional<double> gamma;  // defaults to 1 / feature_dim
  double tol = 1e-3;
  std::size_t max_iter = 0;     // 0: 10 * n^2, clamped to [10^4, 10^7]
  std::uint64_t seed = 0;

  void validate() const {
    if (!(C > 0.0)) throw ParameterError("SVR: C must be positive");
    if (!(epsilon >= 0.0)) throw ParameterError("SVR: epsilon must be non-negative");
    if (gamma && !(*gamma > 0.0)) throw ParameterError("SVR: gamma must be positive");
    if (!(tol > 0.0)) throw ParameterError("SVR: tol must be positive");
  }
};

/// Solution of the epsilon-SVR dual
///   min 1/2 (a - a*)' K (a - a*) + eps sum(a + a*) - y'(a - a*)
///   s.t. sum(a - a*) = 0, 0 <= a, a* <= C.
struct DualSolution {
  std::vector<double> alpha;
  std::vector<double> alpha_star;
  double bias = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;
  double gap = 0.0;  // final maximal KKT violation

  std::vector<double> coefficients() const {
    std::vector<double> c(alpha.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = alpha[i] - alpha_star[i];
    return c;
  }
};

inline std::size_t default_max_iter(std::size_t n) {
  const double v = 10.0 * static_cast<double>(n) * static_cast<double>(n);
  return static_cast<std::size_t>(std::clamp(v, 1e4, 1e7));
}

/// SMO over the 2n doubled variables with maximal-violating-pair working sets (ties go to the
/// lowest index). `gram` is the row-major n x n kernel matrix.
inline DualSolution solve_svr_dual(std::span<const double> gram, std::span<const double> y, double C,
                                   double epsilon, double tol, std::size_t max_iter = 0) {
  const std::size_t n = y.size();
  if (gram.size() != n * n) throw InputError("SVR dual: Gram matrix size mismatch");
  if (n == 0) throw InputError("SVR dual: no samples");
  if (max_iter == 0) max_iter = default_max_iter(n);
  const std::size_t m = 2 * n;
  constexpr double kTau = 1e-12;

  auto sign = [n](std::size_t t) { return t < n ? 1.0 : -1.0; };
  auto kern = [&](std::size_t s, std::size_t t) { return gram[(s % n) * n + (t % n)]; };
  auto q = [&](std::size_t s, std::size_t t) { return sign(s) * sign(t) * kern(s, t); };

  std::vector<double> beta(m, 0.0);
  std::vector<double> grad(m);
  std::vector<double> lin(m);
  for (std::size_t i = 0; i < n; ++i) {
    lin[i] = epsilon - y[i];
    lin[i + n] = epsilon + y[i];
  }
  grad = lin;

  auto in_up = [&](std::size_t t) { return sign(t) > 0 ? beta[t] < C : beta[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return sign(t) > 0 ? beta[t] > 0.0 : beta[t] < C; };

  DualSolution sol;
  std::size_t iter = 0;
  double gap = 0.0;
  for (;;) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t i = m, j = m;
    for (std::size_t t = 0; t < m; ++t) {
      const double v = -sign(t) * grad[t];
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    gap = (i == m || j == m) ? 0.0 : gmax - gmin;
    if (gap < tol) break;
    if (iter >= max_iter)
      throw ConvergenceError("SVR: SMO did not converge within " + std::to_string(max_iter) + " iterations",
                             iter, gap);
    ++iter;

    const double old_i = beta[i];
    const double old_j = beta[j];
    const double qii = q(i, i), qjj = q(j, j), qij = q(i, j);
    if (sign(i) != sign(j)) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = beta[i] - beta[j];
      beta[i] += delta;
      beta[j] += delta;
      if (diff > 0.0) {
        if (beta[j] < 0.0) {
          beta[j] = 0.0;
          beta[i] = diff;
        }
      } else if (beta[i] < 0.0) {
        beta[i] = 0.0;
        beta[j] = -diff;
      }
      if (diff > 0.0) {
        if (beta[i] > C) {
          beta[i] = C;
          beta[j] = C - diff;
        }
      } else if (beta[j] > C) {
        beta[j] = C;
        beta[i] = C + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = beta[i] + beta[j];
      beta[i] -= delta;
      beta[j] += delta;
      if (sum > C) {
        if (beta[i] > C) {
          beta[i] = C;
          beta[j] = sum - C;
        }
        if (beta[j] > C) {
          beta[j] = C;
          beta[i] = sum - C;
        }
      } else {
        if (beta[j] < 0.0) {
          beta[j] = 0.0;
          beta[i] = sum;
        }
        if (beta[i] < 0.0) {
          beta[i] = 0.0;
          beta[j] = sum;
        }
      }
    }
    const double di = beta[i] - old_i;
    const double dj = beta[j] - old_j;
    for (std::size_t t = 0; t < m; ++t) grad[t] += q(i, t) * di + q(j, t) * dj;
  }

  // Bias from free variables, or the midpoint of the feasible interval when none are free.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < m; ++t) {
    const double yg = sign(t) * grad[t];
    if (beta[t] >= C) {
      if (sign(t) < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (beta[t] <= 0.0) {
      if (sign(t) > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

  sol.alpha.assign(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(n));
  sol.alpha_star.assign(beta.begin() + static_cast<std::ptrdiff_t>(n), beta.end());
  sol.bias = -rho;
  double obj = 0.0;
  for (std::size_t t = 0; t < m; ++t) obj += beta[t] * (grad[t] + lin[t]);
  sol.objective = 0.5 * obj;
  sol.iterations = iter;
  sol.gap = gap;
  return sol;
}

inline double kernel_value(KernelType k, double gamma, std::span<const double> a, std::span<const double> b) {
  if (k == KernelType::Linear) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * d2);
}

/// Trained epsilon-SVR: z-score normalization plus the kernel expansion.
struct SvrModel {
  KernelType kernel = KernelType::Rbf;
  double C = 10.0;
  double epsilon = 0.1;
  double gamma = 1.0;
  double tol = 1e-3;
  std::vector<double> norm_mean;
  std::vector<double> norm_std;
  std::vector<std::vector<double>> support_vectors;  // normalized
  std::vector<double> coefficients;                  // alpha - alpha*
  double bias = 0.0;

  // Training diagnostics; not serialized.
  std::size_t iterations = 0;
  double kkt_gap = 0.0;

  std::size_t dims() const noexcept { return norm_mean.size(); }
};

/// Per-dimension mean and population std; dimensions with std below 1e-12 get std 1.
inline void zscore_stats(const std::vector<std::vector<double>>& x, std::vector<double>& mean,
                         std::vector<double>& stdev) {
  const std::size_t d = x.front().size();
  mean.assign(d, 0.0);
  stdev.assign(d, 0.0);
  for (const auto& row : x)
    for (std::size_t k = 0; k < d; ++k) mean[k] += row[k];
  for (auto& v : mean) v /= static_cast<double>(x.size());
  for (const auto& row : x)
    for (std::size_t k = 0; k < d; ++k) stdev[k] += (row[k] - mean[k]) * (row[k] - mean[k]);
  for (auto& v : stdev) {
    v = std::sqrt(v / static_cast<double>(x.size()));
    if (!(v >= 1e-12)) v = 1.0;
  }
}

inline std::vector<double> normalize(const SvrModel& model, std::span<const double> x) {
  std::vector<double> z(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) z[k] = (x[k] - model.norm_mean[k]) / model.norm_std[k];
  return z;
}

inline SvrModel train_svr(const std::vector<std::vector<double>>& x, std::span<const double> y,
                          const SvrParams& params = {}) {
  params.validate();
  if (x.size() < 2) throw InputError("SVR: need at least 2 samples");
  if (x.size() != y.size()) throw InputError("SVR: feature/label count mismatch");
  const std::size_t d = x.front().size();
  if (d == 0) throw InputError("SVR: zero-dimensional features");
  for (const auto& row : x) {
    if (row.size() != d) throw InputError("SVR: inconsistent feature dimensions");
    for (double v : row)
      if (!std::isfinite(v)) throw DataError("SVR: non-finite feature");
  }
  for (double v : y)
    if (!std::isfinite(v)) throw DataError("SVR: non-finite label");

  SvrModel model;
  model.kernel = params.kernel;
  model.C = params.C;
  model.epsilon = params.epsilon;
  model.gamma = params.gamma.value_or(1.0 / static_cast<double>(d));
  model.tol = params.tol;
  zscore_stats(x, model.norm_mean, model.norm_std);

  std::vector<std::vector<double>> z;
  z.reserve(x.size());
  for (const auto& row : x) z.push_back(normalize(model, row));
  const std::size_t n = z.size();
  std::vector<double> gram(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      gram[i * n + j] = gram[j * n + i] = kernel_value(model.kernel, model.gamma, z[i], z[j]);

  const DualSolution sol = solve_svr_dual(gram, y, params.C, params.epsilon, params.tol, params.max_iter);
  const auto coef = sol.coefficients();
  for (std::size_t i = 0; i < n; ++i) {
    if (coef[i] == 0.0) continue;
    model.support_vectors.push_back(z[i]);
    model.coefficients.push_back(coef[i]);
  }
  model.bias = sol.bias;
  model.iterations = sol.iterations;
  model.kkt_gap = sol.gap;
  return model;
}

inline double predict_svr(const SvrModel& model, std::span<const double> x) {
  if (x.size() != model.dims())
    throw InputError("SVR: feature dimension " + std::to_string(x.size()) + " does not match model (" +
                     std::to_string(model.dims()) + ")");
  const auto z = normalize(model, x);
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    f += model.coefficients[i] * kernel_value(model.kernel, model.gamma, model.support_vectors[i], z);
  return f;
}

/// Shortest round-tripping text form of a double (17 significant digits).
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr std::string_view kModelHeader = "VCASIR-MODEL v1";

inline std::string serialize_model(const SvrModel& m) {
  std::string out;
  auto line_of = [&](std::span<const double> v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ' ';
      out += format_real(v[i]);
    }
    out += '\n';
  };
  out += kModelHeader;
  out += '\n';
  out += to_string(m.kernel);
  out += '\n';
  out += format_real(m.C) + ' ' + format_real(m.epsilon) + ' ' + format_real(m.gamma) + ' ' +
         format_real(m.tol) + '\n';
  out += std::to_string(m.dims()) + '\n';
  line_of(m.norm_mean);
  line_of(m.norm_std);
  out += format_real(m.bias) + '\n';
  out += std::to_string(m.support_vectors.size()) + '\n';
  for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
    std::vector<double> row{m.coefficients[i]};
    row.insert(row.end(), m.support_vectors[i].begin(), m.support_vectors[i].end());
    line_of(row);
  }
  return out;
}

namespace detail {

inline std::vector<double> parse_reals(const std::string& line, std::size_t expected, const char* what) {
  std::vector<double> v;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (*end != '\0' || !std::isfinite(x)) throw ParseError(std::string("model: bad number in ") + what);
    v.push_back(x);
  }
  if (v.size() != expected) throw ParseError(std::string("model: wrong value count in ") + what);
  return v;
}

inline std::size_t parse_count(const std::string& line, const char* what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(line, &pos);
  } catch (const std::exception&) {
    throw ParseError(std::string("model: bad ") + what);
  }
  if (pos != line.size()) throw ParseError(std::string("model: bad ") + what);
  return static_cast<std::size_t>(v);
}

}  // namespace detail

inline SvrModel parse_model(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
  }
  if (lines.empty() || lines[0] != kModelHeader) {
    if (!lines.empty() && lines[0].rfind("VCASIR-MODEL ", 0) == 0)
      throw FormatError("model: unsupported version '" + lines[0].substr(13) + "'");
    throw FormatError("model: missing 'VCASIR-MODEL v1' header");
  }
  if (lines.size() < 8) throw ParseError("model: truncated header");
  SvrModel m;
  m.kernel = parse_kernel(lines[1]);
  const auto hp = detail::parse_reals(lines[2], 4, "hyperparameters");
  m.C = hp[0];
  m.epsilon = hp[1];
  m.gamma = hp[2];
  m.tol = hp[3];
  const std::size_t d = detail::parse_count(lines[3], "feature dimension");
  m.norm_mean = detail::parse_reals(lines[4], d, "norm_mean");
  m.norm_std = detail::parse_reals(lines[5], d, "norm_std");
  for (double s : m.norm_std)
    if (!(s > 0.0)) throw ParseError("model: norm_std must be positive");
  m.bias = detail::parse_reals(lines[6], 1, "bias")[0];
  const std::size_t count = detail::parse_count(lines[7], "support vector count");
  if (lines.size() - 8 != count)
    throw ParseError("model: support vector count " + std::to_string(count) + " does not match " +
                     std::to_string(lines.size() - 8) + " rows");
  for (std::size_t i = 0; i < count; ++i) {
    auto row = detail::parse_reals(lines[8 + i], d + 1, "support vector row");
    m.coefficients.push_back(row[0]);
    m.support_vectors.emplace_back(row.begin() + 1, row.end());
  }
  return m;
}

inline void save_model(const SvrModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << serialize_model(m);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline SvrModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace vcasir

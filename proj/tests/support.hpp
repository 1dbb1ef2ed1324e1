#pragma once

// Independent reference implementations and fixtures shared by the tests.
// Oracles avoid the library's code paths: explicit matrix inverses instead
// of Cholesky solves, bitmask enumeration instead of lgamma sums.

#include "apex/domain.hpp"
#include "apex/random.hpp"

#include <Eigen/Dense>

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace apex::test {

inline ParameterSpace crystal_space() {
  return enumerate_space({{"tx_power", {-5.0, -3.0, -1.0, 0.0}, "dBm", Scale::linear},
                          {"n_tx", {1.0, 2.0, 3.0, 4.0}, "", Scale::linear}});
}

/// minimize energy subject to prr >= 65 at the median.
inline Requirement crystal_requirement() {
  Requirement r;
  r.goal = {"energy", Direction::minimize, "J", 1.0};
  ConstraintSpec c;
  c.metric = "prr";
  c.relation = Relation::greater_equal;
  c.bound = 65.0;
  c.percentile = 0.5;
  r.constraints.push_back(c);
  return r;
}

/// Appends observations with consecutive trial indices.
class HistoryBuilder {
 public:
  explicit HistoryBuilder(std::size_t space_size) : h_(space_size) {}
  HistoryBuilder& add(SetIndex set, Metrics m) {
    h_.append({static_cast<int>(h_.size()) + 1, set, std::move(m)});
    return *this;
  }
  const History& get() const { return h_; }

 private:
  History h_;
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("apex-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream(file(name)) << content;
    return file(name);
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---------------------------------------------------------------------------
// GP oracle

struct OraclePrediction {
  double mean;
  double variance;
};

/// GP posterior via an explicitly inverted covariance matrix (LU), with its
/// own kernel and standardization code.
inline std::vector<OraclePrediction> gp_oracle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                               const Eigen::MatrixXd& query, double length_scale,
                                               double signal_variance, double noise_plus_jitter) {
  const Eigen::Index n = x.cols();
  double mean = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) mean += y(i);
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) var += (y(i) - mean) * (y(i) - mean);
  var /= static_cast<double>(n);
  const double sd = var > 0.0 ? std::sqrt(var) : 1.0;

  auto k = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double d2 = 0.0;
    for (Eigen::Index q = 0; q < a.size(); ++q) d2 += (a(q) - b(q)) * (a(q) - b(q));
    return signal_variance * std::exp(-d2 / (2.0 * length_scale * length_scale));
  };
  Eigen::MatrixXd kk(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) kk(i, j) = k(x.col(i), x.col(j)) + (i == j ? noise_plus_jitter : 0.0);
  const Eigen::MatrixXd inv = kk.fullPivLu().inverse();
  Eigen::VectorXd ys(n);
  for (Eigen::Index i = 0; i < n; ++i) ys(i) = (y(i) - mean) / sd;

  std::vector<OraclePrediction> out;
  for (Eigen::Index c = 0; c < query.cols(); ++c) {
    Eigen::VectorXd kx(n);
    for (Eigen::Index i = 0; i < n; ++i) kx(i) = k(x.col(i), query.col(c));
    const double mu = kx.dot(inv * ys);
    const double v = std::max(k(query.col(c), query.col(c)) - kx.dot(inv * kx), 0.0);
    out.push_back({mean + sd * mu, sd * sd * v});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Order statistics

/// sum_{k<l} C(N,k) p^k (1-p)^(N-k) by enumerating all 2^N outcomes.
inline std::vector<long double> binomial_brute_table(int n, double p) {
  std::vector<long double> by_count(static_cast<std::size_t>(n) + 1, 0.0L);
  const long double lp = p;
  const long double lq = 1.0L - p;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const int k = __builtin_popcount(mask);
    long double prob = 1.0L;
    for (int i = 0; i < k; ++i) prob *= lp;
    for (int i = k; i < n; ++i) prob *= lq;
    by_count[static_cast<std::size_t>(k)] += prob;
  }
  return by_count;
}

inline double binomial_brute(const std::vector<long double>& table, int l) {
  long double s = 0.0L;
  for (int k = 0; k < l; ++k) s += table[static_cast<std::size_t>(k)];
  return static_cast<double>(s);
}

inline double kappa_oracle(double space_size, double n, double delta) {
  const double pi = 3.14159265358979323846;
  return std::sqrt(2.0 * std::log(space_size * n * n * pi * pi / (6.0 * delta)));
}

/// Closed-form EI with Phi from erfc.
inline double ei_oracle(double mu, double sigma, double f_best) {
  if (sigma <= 0.0) return 0.0;
  const double z = (f_best - mu) / sigma;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  return (f_best - mu) * cdf + sigma * pdf;
}

// ---------------------------------------------------------------------------
// Tabular value iteration

/// Deterministic MDP: next[s][a] and reward on entering a state.
struct ChainMdp {
  std::vector<std::vector<std::size_t>> next;
  std::vector<double> reward;
};

/// Optimal Q via value iteration.
inline std::vector<std::vector<double>> value_iteration(const ChainMdp& m, double gamma, int sweeps = 2000) {
  std::vector<std::vector<double>> q(m.next.size());
  for (std::size_t s = 0; s < m.next.size(); ++s) q[s].assign(m.next[s].size(), 0.0);
  for (int it = 0; it < sweeps; ++it) {
    for (std::size_t s = 0; s < m.next.size(); ++s)
      for (std::size_t a = 0; a < m.next[s].size(); ++a) {
        const std::size_t t = m.next[s][a];
        double best = q[t][0];
        for (double v : q[t]) best = std::max(best, v);
        q[s][a] = m.reward[t] + gamma * best;
      }
  }
  return q;
}

}  // namespace apex::test

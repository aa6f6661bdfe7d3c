#pragma once

#include <set>
#include <string>
#include <vector>

#include "regext/corpus.hpp"
#include "regext/report.hpp"

namespace regext {

struct VerifyTolerances {
  double reproduction = 1e-8;
  double near_best = 10.0;
  double near_best_l2 = 1e-8;
  double partition_sum = 1e-12;
  double hlw = 10.0;
  double restriction = 10.0;
  double drift = 2.0;
  double skip_fraction = 0.2;
  double ladder_density = 0.01;
  double q64 = 0.05;
  double ms = 0.01;
};

struct VerifyConfig {
  std::vector<CorpusSet> sets;
  /// Used for every set when non-empty; otherwise default_functions per set.
  std::vector<FunctionSpec> functions;
  int max_degree = 2;

  std::vector<double> s_values{0.3, 0.7, 1.5};
  std::vector<int> k_values{1, 2};
  std::vector<double> p_values{2.0, kInf};
  std::vector<double> q_values{1.0, 2.0, kInf};
  std::vector<double> u_values{1.0, 2.0, 0.0};  // 0 stands for u = p

  double ladder_density = 4.0;
  double stride_factor = 2.0;
  double stride_factor_1d = 8.0;
  unsigned seed = 1;
  std::size_t pointwise_samples = 1000;
  std::size_t near_best_pairs = 10;   // per corpus entry
  std::size_t approx_centers = 8;     // per corpus entry
  int reproduction_max_k = 4;

  /// Check groups to run; empty runs all of them.
  std::set<std::string> groups;
  VerifyTolerances tol;
  std::string output;
  ReportFormat format = ReportFormat::json;
  /// Fault injection: "skip_normalization" leaves the partition of unity unnormalised.
  std::string fault;
  unsigned threads = 0;
};

/// Names accepted in VerifyConfig::groups.
const std::vector<std::string>& verify_groups();

VerifyConfig default_verify_config();
/// Keys absent from the JSON keep their defaults. Sets may be default names or full objects.
VerifyConfig parse_verify_config(const std::string& json);
VerifyConfig load_verify_config(const std::string& path);

struct VerifyTiming {
  std::string label;
  double seconds = 0.0;
};

struct VerifyRun {
  Report report;
  std::vector<VerifyTiming> timings;  // kept out of the report so it stays byte-deterministic
  double seconds = 0.0;
};

VerifyRun run_verification(const VerifyConfig& config);

}  // namespace regext

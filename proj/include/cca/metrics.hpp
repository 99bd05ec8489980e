#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cca {

// One per-trial (or per-episode) output row. final_state and
// occupancy_entropy apply to discrete runs only and stay empty otherwise.
struct MetricsRow {
  std::uint64_t seed = 0;
  int index = 0;  // trial or episode number
  long env_steps = 0;
  double episode_return = 0.0;
  double average_reward = 0.0;
  double cumulative_reward = 0.0;
  std::optional<int> final_state;
  std::optional<double> occupancy_entropy;
};

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr const char* kCsvSchemaComment = "# schema=1";
constexpr const char* kCsvHeader =
    "seed,index,env_steps,episode_return,average_reward,cumulative_reward,"
    "final_state,occupancy_entropy";

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << kCsvSchemaComment << "\n" << kCsvHeader << "\n";
  for (const auto& r : rows) {
    os << r.seed << ',' << r.index << ',' << r.env_steps << ','
       << format_double(r.episode_return) << ',' << format_double(r.average_reward)
       << ',' << format_double(r.cumulative_reward) << ',';
    if (r.final_state) os << *r.final_state;
    os << ',';
    if (r.occupancy_entropy) os << format_double(*r.occupancy_entropy);
    os << '\n';
  }
}

inline std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("metrics: cannot open '" + path + "'");
  std::vector<MetricsRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("seed,", 0) == 0) continue;
    std::istringstream ss(line);
    std::string cell;
    MetricsRow r;
    auto next = [&]() {
      if (!std::getline(ss, cell, ',')) cell.clear();
      return cell;
    };
    r.seed = std::stoull(next());
    r.index = std::stoi(next());
    r.env_steps = std::stol(next());
    r.episode_return = std::stod(next());
    r.average_reward = std::stod(next());
    r.cumulative_reward = std::stod(next());
    next();
    if (!cell.empty()) r.final_state = std::stoi(cell);
    next();
    if (!cell.empty()) r.occupancy_entropy = std::stod(cell);
    rows.push_back(r);
  }
  return rows;
}

// Cross-seed aggregate at one index: arithmetic mean and sample standard
// deviation (0 when fewer than two seeds contribute).
struct AggregateRow {
  int index = 0;
  int num_seeds = 0;
  double episode_return_mean = 0.0, episode_return_std = 0.0;
  double average_reward_mean = 0.0, average_reward_std = 0.0;
  double cumulative_reward_mean = 0.0, cumulative_reward_std = 0.0;
  std::optional<double> occupancy_entropy_mean, occupancy_entropy_std;
};

namespace detail {
inline void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  sd = 0.0;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
}
}  // namespace detail

inline std::vector<AggregateRow> aggregate_metrics(
    const std::vector<std::vector<MetricsRow>>& per_seed) {
  std::size_t max_len = 0;
  for (const auto& rows : per_seed) max_len = std::max(max_len, rows.size());
  std::vector<AggregateRow> out;
  out.reserve(max_len);
  for (std::size_t i = 0; i < max_len; ++i) {
    std::vector<double> ret, avg, cum, ent;
    for (const auto& rows : per_seed) {
      if (i >= rows.size()) continue;
      ret.push_back(rows[i].episode_return);
      avg.push_back(rows[i].average_reward);
      cum.push_back(rows[i].cumulative_reward);
      if (rows[i].occupancy_entropy) ent.push_back(*rows[i].occupancy_entropy);
    }
    if (ret.empty()) continue;
    AggregateRow a;
    a.index = static_cast<int>(i);
    a.num_seeds = static_cast<int>(ret.size());
    detail::mean_std(ret, a.episode_return_mean, a.episode_return_std);
    detail::mean_std(avg, a.average_reward_mean, a.average_reward_std);
    detail::mean_std(cum, a.cumulative_reward_mean, a.cumulative_reward_std);
    if (!ent.empty()) {
      double m, s;
      detail::mean_std(ent, m, s);
      a.occupancy_entropy_mean = m;
      a.occupancy_entropy_std = s;
    }
    out.push_back(a);
  }
  return out;
}

inline void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
  os << kCsvSchemaComment << "\n";
  os << "index,num_seeds,episode_return_mean,episode_return_std,"
        "average_reward_mean,average_reward_std,cumulative_reward_mean,"
        "cumulative_reward_std,occupancy_entropy_mean,occupancy_entropy_std\n";
  for (const auto& a : rows) {
    os << a.index << ',' << a.num_seeds << ',' << format_double(a.episode_return_mean)
       << ',' << format_double(a.episode_return_std) << ','
       << format_double(a.average_reward_mean) << ','
       << format_double(a.average_reward_std) << ','
       << format_double(a.cumulative_reward_mean) << ','
       << format_double(a.cumulative_reward_std) << ',';
    if (a.occupancy_entropy_mean) os << format_double(*a.occupancy_entropy_mean);
    os << ',';
    if (a.occupancy_entropy_std) os << format_double(*a.occupancy_entropy_std);
    os << '\n';
  }
}

}  // namespace cca

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cca/actor_critic.hpp"
#include "cca/config.hpp"
#include "cca/metrics.hpp"
#include "cca/mountain_car.hpp"
#include "cca/tabular.hpp"
#include "cca/two_rooms.hpp"

namespace cca {

namespace detail {

inline std::vector<MetricsRow> run_one_seed(const ExperimentConfig& cfg,
                                            std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<MetricsRow> rows;
  if (cfg.env == "tworooms") {
    TwoRoomsEnv env;
    const DiscreteMethod method =
        cfg.method == "cca" ? DiscreteMethod::kCca : DiscreteMethod::kQlearning;
    const auto records = run_discrete_experiment(env, method, cfg.hp, cfg.trials, rng);
    rows.reserve(records.size());
    for (const auto& r : records) {
      MetricsRow row;
      row.seed = seed;
      row.index = r.trial;
      row.env_steps = r.env_steps;
      row.episode_return = r.episode_return;
      row.average_reward = r.average_reward;
      row.cumulative_reward = r.cumulative_reward;
      row.final_state = r.final_state;
      row.occupancy_entropy = r.occupancy_entropy;
      rows.push_back(row);
    }
  } else {
    MountainCarEnv env;
    BoxBounds box{Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)};
    AcBuffer buffer(cfg.hp.buffer_capacity);
    RngStream init_rng = rng.split(100);
    std::vector<EpisodeRecord> records;
    if (cfg.method == "cca") {
      CcaAgent agent(MountainCarEnv::kObsDim, box, cfg.hp, init_rng);
      records = train_agent(agent, env, buffer, cfg.hp, cfg.total_steps, rng);
    } else {
      SacLiteAgent agent(MountainCarEnv::kObsDim, box, cfg.hp, init_rng);
      records = train_agent(agent, env, buffer, cfg.hp, cfg.total_steps, rng);
    }
    rows.reserve(records.size());
    for (const auto& r : records) {
      MetricsRow row;
      row.seed = seed;
      row.index = r.episode;
      row.env_steps = r.env_steps;
      row.episode_return = r.episode_return;
      row.average_reward = r.average_reward;
      row.cumulative_reward = r.cumulative_reward;
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* cap = std::getenv("CCA_THREADS")) {
    const long v = std::atol(cap);
    if (v > 0) n = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

}  // namespace detail

// Runs every seed of the config (seeds in parallel worker threads, each with
// its own environment/agent/buffer), writes one metrics CSV per seed plus a
// cross-seed aggregate. Output is deterministic for a fixed config.
inline std::vector<std::string> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);

  std::vector<std::vector<MetricsRow>> per_seed(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  const std::size_t workers = detail::worker_count(cfg.seeds.size());
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < cfg.seeds.size();
           i = next.fetch_add(1)) {
        per_seed[i] = detail::run_one_seed(cfg, cfg.seeds[i]);
      }
    });
  }
  for (auto& t : pool) t.join();

  std::vector<std::string> written;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    const std::string path =
        (fs::path(cfg.out_dir) / ("seed_" + std::to_string(cfg.seeds[i]) + ".csv"))
            .string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("run: cannot write '" + path + "'");
    write_metrics_csv(os, per_seed[i]);
    written.push_back(path);
  }
  const std::string agg_path = (fs::path(cfg.out_dir) / "aggregate.csv").string();
  std::ofstream os(agg_path, std::ios::binary);
  if (!os) throw std::runtime_error("run: cannot write '" + agg_path + "'");
  write_aggregate_csv(os, aggregate_metrics(per_seed));
  written.push_back(agg_path);
  return written;
}

// ---- reporting ----

struct RunSummary {
  std::size_t num_seeds = 0;
  double last_fraction_return_mean = 0.0;  // mean over seeds of last-10% returns
  double last_fraction_return_std = 0.0;
  double final_cumulative_mean = 0.0;
  double final_cumulative_std = 0.0;
};

inline RunSummary summarize_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("report: '" + dir + "' is not a directory");
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("seed_", 0) == 0 && entry.path().extension() == ".csv") {
      files.push_back(entry.path().string());
    }
  }
  if (files.empty()) {
    throw std::runtime_error("report: no seed_*.csv files in '" + dir + "'");
  }
  std::sort(files.begin(), files.end());
  std::vector<double> tail_means, finals;
  for (const auto& f : files) {
    const auto rows = read_metrics_csv(f);
    if (rows.empty()) continue;
    const std::size_t tail = std::max<std::size_t>(1, rows.size() / 10);
    double acc = 0.0;
    for (std::size_t i = rows.size() - tail; i < rows.size(); ++i) {
      acc += rows[i].episode_return;
    }
    tail_means.push_back(acc / static_cast<double>(tail));
    finals.push_back(rows.back().cumulative_reward);
  }
  if (tail_means.empty()) throw std::runtime_error("report: all seed files empty");
  RunSummary s;
  s.num_seeds = tail_means.size();
  detail::mean_std(tail_means, s.last_fraction_return_mean, s.last_fraction_return_std);
  detail::mean_std(finals, s.final_cumulative_mean, s.final_cumulative_std);
  return s;
}

// Minimal line chart, one polyline per series, axis box plus min/max labels.
inline void write_svg_chart(std::ostream& os, const std::string& title,
                            const std::vector<double>& ys) {
  const int width = 720, height = 420, margin = 50;
  double ymin = 0.0, ymax = 1.0;
  if (!ys.empty()) {
    ymin = *std::min_element(ys.begin(), ys.end());
    ymax = *std::max_element(ys.begin(), ys.end());
    if (ymin == ymax) {
      ymin -= 1.0;
      ymax += 1.0;
    }
  }
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\""
     << width - 2 * margin << "\" height=\"" << height - 2 * margin
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << margin - 6 << "\" y=\"" << margin + 12
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
     << format_double(ymax) << "</text>\n";
  os << "<text x=\"" << margin - 6 << "\" y=\"" << height - margin
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
     << format_double(ymin) << "</text>\n";
  os << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 28
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
     << ys.size() << "</text>\n";
  if (ys.size() > 1) {
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const double x = margin + (width - 2.0 * margin) * static_cast<double>(i) /
                                    static_cast<double>(ys.size() - 1);
      const double y = height - margin -
                       (height - 2.0 * margin) * (ys[i] - ymin) / (ymax - ymin);
      os << x << ',' << y << ' ';
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

// Emits aggregate-curve charts next to the CSVs; returns the files written.
inline std::vector<std::string> write_report_svgs(const std::string& dir) {
  namespace fs = std::filesystem;
  const std::string agg_path = (fs::path(dir) / "aggregate.csv").string();
  std::ifstream in(agg_path);
  if (!in) throw std::runtime_error("report: missing '" + agg_path + "'");
  std::vector<double> ret_mean, cum_mean, ent_mean;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("index,", 0) == 0) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 8) continue;
    ret_mean.push_back(std::stod(cells[2]));
    cum_mean.push_back(std::stod(cells[6]));
    if (cells.size() > 8 && !cells[8].empty()) ent_mean.push_back(std::stod(cells[8]));
  }
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& title,
                  const std::vector<double>& ys) {
    if (ys.empty()) return;
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("report: cannot write '" + path + "'");
    write_svg_chart(os, title, ys);
    written.push_back(path);
  };
  emit("episode_return.svg", "episode return (mean over seeds)", ret_mean);
  emit("cumulative_reward.svg", "cumulative reward (mean over seeds)", cum_mean);
  emit("occupancy_entropy.svg", "occupancy entropy (mean over seeds)", ent_mean);
  return written;
}

}  // namespace cca

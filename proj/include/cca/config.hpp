#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cca/types.hpp"

namespace cca {

// Experiment description parsed from a flat key=value file (one key per
// line, '#' starts a comment). Unknown keys are rejected.
struct ExperimentConfig {
  std::string env;     // "tworooms" | "mountaincar"
  std::string method;  // "cca" | "qlearning" | "saclite"
  std::vector<std::uint64_t> seeds;
  int trials = 0;         // tabular runs
  long total_steps = 0;   // actor-critic runs
  std::string out_dir = "out";
  Hyperparams hp;

  void validate() const {
    auto fail = [](const std::string& msg) {
      throw std::invalid_argument("config: " + msg);
    };
    if (env != "tworooms" && env != "mountaincar") {
      fail("env must be 'tworooms' or 'mountaincar' (got '" + env + "')");
    }
    if (method != "cca" && method != "qlearning" && method != "saclite") {
      fail("method must be 'cca', 'qlearning' or 'saclite' (got '" + method + "')");
    }
    if (env == "tworooms" && method == "saclite") {
      fail("method 'saclite' requires env 'mountaincar'");
    }
    if (env == "mountaincar" && method == "qlearning") {
      fail("method 'qlearning' requires env 'tworooms'");
    }
    if (seeds.empty()) fail("at least one seed is required");
    if (env == "tworooms" && trials <= 0) fail("trials must be > 0 for tworooms");
    if (env == "mountaincar" && total_steps <= 0) {
      fail("total_steps must be > 0 for mountaincar");
    }
    if (out_dir.empty()) fail("out_dir must not be empty");
    try {
      hp.validate();
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, const std::string& key, int line) {
  std::size_t pos = 0;
  double out;
  try {
    out = std::stod(v, &pos);
  } catch (...) {
    throw std::invalid_argument("config line " + std::to_string(line) + ": key '" +
                                key + "' expects a number, got '" + v + "'");
  }
  if (pos != v.size()) {
    throw std::invalid_argument("config line " + std::to_string(line) + ": key '" +
                                key + "' expects a number, got '" + v + "'");
  }
  return out;
}

inline long parse_long(const std::string& v, const std::string& key, int line) {
  const double d = parse_double(v, key, line);
  const long l = static_cast<long>(d);
  if (static_cast<double>(l) != d) {
    throw std::invalid_argument("config line " + std::to_string(line) + ": key '" +
                                key + "' expects an integer, got '" + v + "'");
  }
  return l;
}

}  // namespace detail

inline ExperimentConfig parse_config_text(std::istream& in) {
  ExperimentConfig cfg;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value, got '" + line + "'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key == "env") {
      cfg.env = value;
    } else if (key == "method") {
      cfg.method = value;
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else if (key == "seeds") {
      cfg.seeds.clear();
      std::istringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (item.empty()) continue;
        try {
          cfg.seeds.push_back(std::stoull(item));
        } catch (...) {
          throw std::invalid_argument("config line " + std::to_string(line_no) +
                                      ": bad seed '" + item + "'");
        }
      }
    } else if (key == "trials") {
      cfg.trials = static_cast<int>(detail::parse_long(value, key, line_no));
    } else if (key == "total_steps") {
      cfg.total_steps = detail::parse_long(value, key, line_no);
    } else if (key == "alpha") {
      cfg.hp.alpha = detail::parse_double(value, key, line_no);
    } else if (key == "beta") {
      cfg.hp.beta = detail::parse_double(value, key, line_no);
    } else if (key == "gamma") {
      cfg.hp.gamma = detail::parse_double(value, key, line_no);
    } else if (key == "lambda") {
      cfg.hp.lambda = detail::parse_double(value, key, line_no);
    } else if (key == "eta") {
      cfg.hp.eta = detail::parse_double(value, key, line_no);
    } else if (key == "epsilon") {
      cfg.hp.epsilon = detail::parse_double(value, key, line_no);
    } else if (key == "lr") {
      cfg.hp.lr = detail::parse_double(value, key, line_no);
    } else if (key == "batch_size") {
      cfg.hp.batch_size = static_cast<int>(detail::parse_long(value, key, line_no));
    } else if (key == "buffer_capacity") {
      cfg.hp.buffer_capacity =
          static_cast<std::size_t>(detail::parse_long(value, key, line_no));
    } else if (key == "polyak") {
      cfg.hp.polyak = detail::parse_double(value, key, line_no);
    } else if (key == "hidden_layers") {
      cfg.hp.hidden_layers = static_cast<int>(detail::parse_long(value, key, line_no));
    } else if (key == "hidden_width") {
      cfg.hp.hidden_width = static_cast<int>(detail::parse_long(value, key, line_no));
    } else if (key == "kde_bandwidth") {
      cfg.hp.kde_bandwidth =
          value == "scott" ? 0.0 : detail::parse_double(value, key, line_no);
    } else if (key == "kde_samples") {
      cfg.hp.kde_samples = static_cast<int>(detail::parse_long(value, key, line_no));
    } else if (key == "updates_per_epoch") {
      cfg.hp.updates_per_epoch =
          static_cast<int>(detail::parse_long(value, key, line_no));
    } else if (key == "warmup_steps") {
      cfg.hp.warmup_steps = detail::parse_long(value, key, line_no);
    } else if (key == "elbo_target_sign") {
      if (value == "paper") {
        cfg.hp.elbo_sign_paper = true;
      } else if (value == "corrected") {
        cfg.hp.elbo_sign_paper = false;
      } else {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": elbo_target_sign must be 'corrected' or 'paper'");
      }
    } else {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  return parse_config_text(in);
}

}  // namespace cca

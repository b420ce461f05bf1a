#include "cts/bench.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace cts {

namespace {

std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

[[noreturn]] void fail_at(const std::string& source, int lineno,
                          const std::string& what) {
  throw ContractError(source + ":" + std::to_string(lineno) + ": " + what);
}

long long parse_int(const std::string& v, const std::string& source, int lineno) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    fail_at(source, lineno, "expected an integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& v, const std::string& source, int lineno) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    fail_at(source, lineno, "expected a number, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& v, const std::string& source, int lineno) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail_at(source, lineno, "expected true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) parts.push_back(trim(cur));
  return parts;
}

Vec parse_double_list(const std::string& v, const std::string& source, int lineno) {
  Vec out;
  for (const auto& part : split_list(v)) out.push_back(parse_double(part, source, lineno));
  return out;
}

std::vector<int> parse_int_list(const std::string& v, const std::string& source,
                                int lineno) {
  std::vector<int> out;
  for (const auto& part : split_list(v)) {
    out.push_back(static_cast<int>(parse_int(part, source, lineno)));
  }
  return out;
}

}  // namespace

std::size_t ExperimentConfig::snapshot_period() const {
  if (eval_every > 0) return eval_every;
  return std::max<std::size_t>(budget / 100, 1);
}

void ExperimentConfig::validate() const {
  if (budget < 1) throw ContractError("ExperimentConfig: budget must be >= 1");
  if (repeats < 1) throw ContractError("ExperimentConfig: repeats must be >= 1");
  if (eval_every > budget) {
    throw ContractError("ExperimentConfig: eval_every must not exceed budget");
  }
  env.validate();
  params.gmm.validate();
  params.riac.validate();
  params.oracle.validate(static_cast<std::size_t>(env.dims()));
  if (space_lower.size() != space_upper.size()) {
    throw ContractError("ExperimentConfig: space_lower/space_upper size mismatch");
  }
  if (!space_lower.empty()) {
    ParameterSpace check(space_lower, space_upper);  // validates the box
  }
}

std::vector<MetricRow> run_single(const ExperimentConfig& cfg, std::uint64_t seed,
                                  int run_id) {
  cfg.validate();
  RunConfig{cfg.budget, 1, 1.0, seed}.validate();
  ToySpace env(cfg.env);
  const auto teacher = make_teacher(cfg.teacher, env.space(), cfg.params, seed);
  const std::size_t period = cfg.snapshot_period();

  std::vector<MetricRow> rows;
  rows.reserve(cfg.budget / period + 2);
  if (cfg.eval_at_zero) {
    rows.push_back({run_id, 0, env.unlocked_fraction(), 0.0});
  }
  double cumulative = 0.0;
  for (std::size_t ep = 1; ep <= cfg.budget; ++ep) {
    const Vec p = teacher->propose();
    const double r = env.episode(p);
    teacher->observe(p, r);
    cumulative += r;
    if (ep % period == 0 || ep == cfg.budget) {
      rows.push_back({run_id, ep, env.unlocked_fraction(), cumulative});
    }
  }
  return rows;
}

double median(std::vector<double> values) {
  if (values.empty()) throw ContractError("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

CampaignResult run_campaign(const ExperimentConfig& cfg) {
  cfg.validate();
  CampaignResult result;
  result.runs.reserve(static_cast<std::size_t>(cfg.repeats));
  for (int i = 0; i < cfg.repeats; ++i) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(i);
    try {
      result.runs.push_back(run_single(cfg, seed, i));
    } catch (const std::exception& e) {
      throw ContractError("run " + std::to_string(i) + " (seed " +
                          std::to_string(seed) + ") failed: " + e.what());
    }
  }
  const std::size_t n_rows = result.runs.front().size();
  std::vector<double> column(static_cast<std::size_t>(cfg.repeats));
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (int i = 0; i < cfg.repeats; ++i) {
      column[static_cast<std::size_t>(i)] = result.runs[static_cast<std::size_t>(i)][r].unlocked;
    }
    result.median_curve.emplace_back(result.runs.front()[r].episode, median(column));
  }
  result.final_median = result.median_curve.back().second;
  return result;
}

std::string format_double(double x) {
  // Shortest plain-decimal form that parses back to the same double;
  // scientific notation stays out of the CSV.
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed);
  if (ec != std::errc()) throw ContractError("format_double: value does not fit");
  return std::string(buf, ptr);
}

namespace {

std::string format_u64(std::uint64_t x) {
  char buf[24];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

constexpr const char* kCsvHeader = "run_id,episode,unlocked_pct,cumulative_reward";

}  // namespace

void write_csv(std::ostream& out, const std::vector<std::vector<MetricRow>>& runs) {
  std::string line;
  out << kCsvHeader << '\n';
  for (const auto& run : runs) {
    for (const MetricRow& row : run) {
      line.clear();
      line += format_u64(static_cast<std::uint64_t>(row.run_id));
      line += ',';
      line += format_u64(row.episode);
      line += ',';
      line += format_double(row.unlocked);
      line += ',';
      line += format_double(row.cumulative_reward);
      line += '\n';
      out << line;
    }
  }
}

void write_csv_file(const std::string& path,
                    const std::vector<std::vector<MetricRow>>& runs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractError("cannot open '" + path + "' for writing");
  write_csv(out, runs);
  out.flush();
  if (!out) throw ContractError("failed while writing '" + path + "'");
}

std::vector<MetricRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCsvHeader) {
    throw ContractError("read_csv: missing or unexpected header");
  }
  std::vector<MetricRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto parts = split_list(t);
    if (parts.size() != 4) fail_at("csv", lineno, "expected 4 fields");
    MetricRow row;
    row.run_id = static_cast<int>(parse_int(parts[0], "csv", lineno));
    row.episode = static_cast<std::size_t>(parse_int(parts[1], "csv", lineno));
    row.unlocked = parse_double(parts[2], "csv", lineno);
    row.cumulative_reward = parse_double(parts[3], "csv", lineno);
    rows.push_back(row);
  }
  return rows;
}

namespace {

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value,
               const std::string& source, int lineno, bool& have_teacher,
               bool& have_budget) {
  auto as_int = [&] { return parse_int(value, source, lineno); };
  auto as_double = [&] { return parse_double(value, source, lineno); };

  if (key == "teacher") {
    try {
      cfg.teacher = teacher_kind_from_string(value);
    } catch (const ContractError& e) {
      fail_at(source, lineno, e.what());
    }
    have_teacher = true;
  } else if (key == "relevant_dims") {
    cfg.env.relevant_dims = static_cast<int>(as_int());
  } else if (key == "irrelevant_dims") {
    cfg.env.irrelevant_dims = static_cast<int>(as_int());
  } else if (key == "cubes_per_dim") {
    cfg.env.cubes_per_dim = static_cast<int>(as_int());
  } else if (key == "unlock_count") {
    cfg.env.unlock_count = static_cast<int>(as_int());
  } else if (key == "reward_cap") {
    cfg.env.reward_cap = static_cast<int>(as_int());
  } else if (key == "budget") {
    const long long b = as_int();
    if (b < 1) fail_at(source, lineno, "budget must be >= 1");
    cfg.budget = static_cast<std::size_t>(b);
    have_budget = true;
  } else if (key == "repeats") {
    cfg.repeats = static_cast<int>(as_int());
  } else if (key == "eval_every") {
    const long long e = as_int();
    if (e < 0) fail_at(source, lineno, "eval_every must be >= 0");
    cfg.eval_every = static_cast<std::size_t>(e);
  } else if (key == "base_seed") {
    cfg.base_seed = static_cast<std::uint64_t>(as_int());
  } else if (key == "eval_at_zero") {
    cfg.eval_at_zero = parse_bool(value, source, lineno);
  } else if (key == "fit_rate") {
    cfg.params.gmm.fit_rate = static_cast<int>(as_int());
  } else if (key == "k_max") {
    cfg.params.gmm.k_max = static_cast<int>(as_int());
  } else if (key == "p_rnd") {
    cfg.params.gmm.p_rnd = as_double();
  } else if (key == "em_max_iters") {
    cfg.params.gmm.em.max_iters = static_cast<int>(as_int());
  } else if (key == "em_rel_tol") {
    cfg.params.gmm.em.rel_tol = as_double();
  } else if (key == "em_cov_floor") {
    cfg.params.gmm.em.cov_floor = as_double();
  } else if (key == "em_n_init") {
    cfg.params.gmm.em.n_init = static_cast<int>(as_int());
  } else if (key == "max_region_size") {
    cfg.params.riac.max_region_size = static_cast<int>(as_int());
  } else if (key == "n_candidates") {
    cfg.params.riac.n_candidates = static_cast<int>(as_int());
  } else if (key == "min_region_size") {
    cfg.params.riac.min_region_size = static_cast<int>(as_int());
  } else if (key == "min_extent_ratio") {
    cfg.params.riac.min_extent_ratio = as_double();
  } else if (key == "mutation_sigma") {
    cfg.params.riac.mutation_sigma = as_double();
  } else if (key == "mix_random") {
    cfg.params.riac.mix_random = as_double();
  } else if (key == "mix_alp") {
    cfg.params.riac.mix_alp = as_double();
  } else if (key == "mix_mutate") {
    cfg.params.riac.mix_mutate = as_double();
  } else if (key == "window_ratio") {
    cfg.params.oracle.window_ratio = as_double();
  } else if (key == "step_ratio") {
    cfg.params.oracle.step_ratio = as_double();
  } else if (key == "reward_threshold") {
    cfg.params.oracle.reward_threshold = as_double();
  } else if (key == "memory_size") {
    cfg.params.oracle.memory_size = static_cast<int>(as_int());
  } else if (key == "direction") {
    cfg.params.oracle.direction = parse_int_list(value, source, lineno);
  } else if (key == "window_start") {
    cfg.params.oracle.start = parse_double_list(value, source, lineno);
  } else if (key == "space_lower") {
    cfg.space_lower = parse_double_list(value, source, lineno);
  } else if (key == "space_upper") {
    cfg.space_upper = parse_double_list(value, source, lineno);
  } else {
    fail_at(source, lineno, "unknown key '" + key + "'");
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& source_name) {
  ExperimentConfig cfg;
  bool have_teacher = false;
  bool have_budget = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail_at(source_name, lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail_at(source_name, lineno, "missing key");
    if (value.empty()) fail_at(source_name, lineno, "missing value for '" + key + "'");
    apply_key(cfg, key, value, source_name, lineno, have_teacher, have_budget);
  }
  if (!have_teacher) {
    throw ContractError(source_name + ": missing required key 'teacher'");
  }
  if (!have_budget) {
    throw ContractError(source_name + ": missing required key 'budget'");
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

namespace {

// Built-in experiment grid. Budgets for the larger spaces follow the
// dimensionality sweep (3D/4D/6D); resolution-sweep budgets scale with the
// cell count so uniform sampling remains a meaningful baseline.
const std::vector<Preset> kPresets = {
    {"toy2d", "reference space: 2 relevant dims, 10 cells per dim, 100k episodes",
     "teacher = alp-gmm\n"
     "relevant_dims = 2\n"
     "irrelevant_dims = 0\n"
     "cubes_per_dim = 10\n"
     "budget = 100000\n"
     "repeats = 20\n"
     "base_seed = 1\n"
     "reward_threshold = 95  # oracle: slide once the window pays almost full reward\n"},
    {"toy3d", "3 relevant dims, 10 cells per dim, 70k episodes",
     "teacher = alp-gmm\n"
     "relevant_dims = 3\n"
     "cubes_per_dim = 10\n"
     "budget = 70000\n"
     "repeats = 20\n"
     "base_seed = 1\n"
     "reward_threshold = 95\n"},
    {"toy4d", "4 relevant dims, 10 cells per dim, 290k episodes",
     "teacher = alp-gmm\n"
     "relevant_dims = 4\n"
     "cubes_per_dim = 10\n"
     "budget = 290000\n"
     "repeats = 20\n"
     "base_seed = 1\n"
     "reward_threshold = 95\n"},
    {"toy6d", "6 relevant dims, 10 cells per dim, 1M episodes",
     "teacher = alp-gmm\n"
     "relevant_dims = 6\n"
     "cubes_per_dim = 10\n"
     "budget = 1000000\n"
     "repeats = 20\n"
     "base_seed = 1\n"
     "reward_threshold = 95\n"},
    {"toy2d-irr10", "reference space plus 10 irrelevant dims",
     "teacher = alp-gmm\n"
     "relevant_dims = 2\n"
     "irrelevant_dims = 10\n"
     "cubes_per_dim = 10\n"
     "budget = 100000\n"
     "repeats = 20\n"
     "base_seed = 1\n"
     "reward_threshold = 95\n"},
    {"toy2d-irr20", "reference space plus 20 irrelevant dims",
     "teacher = alp-gmm\n"
     "relevant_dims = 2\n"
     "irrelevant_dims = 20\n"
     "cubes_per_dim = 10\n"
     "budget = 100000\n"
     "repeats = 20\n"
     "base_seed = 1\n"
     "reward_threshold = 95\n"},
    {"toy2d-irr50", "reference space plus 50 irrelevant dims",
     "teacher = alp-gmm\n"
     "relevant_dims = 2\n"
     "irrelevant_dims = 50\n"
     "cubes_per_dim = 10\n"
     "budget = 100000\n"
     "repeats = 20\n"
     "base_seed = 1\n"
     "reward_threshold = 95\n"},
    {"toy2d-res20", "2 relevant dims at 20 cells per dim",
     "teacher = alp-gmm\n"
     "relevant_dims = 2\n"
     "cubes_per_dim = 20\n"
     "budget = 100000\n"
     "repeats = 20\n"
     "base_seed = 1\n"
     "reward_threshold = 95\n"},
    {"toy2d-res50", "2 relevant dims at 50 cells per dim",
     "teacher = alp-gmm\n"
     "relevant_dims = 2\n"
     "cubes_per_dim = 50\n"
     "budget = 300000\n"
     "repeats = 20\n"
     "base_seed = 1\n"
     "reward_threshold = 95\n"},
    {"toy2d-res100", "2 relevant dims at 100 cells per dim",
     "teacher = alp-gmm\n"
     "relevant_dims = 2\n"
     "cubes_per_dim = 100\n"
     "budget = 1000000\n"
     "repeats = 20\n"
     "base_seed = 1\n"
     "reward_threshold = 95\n"},
};

}  // namespace

const std::vector<Preset>& presets() { return kPresets; }

const Preset* find_preset(const std::string& name) {
  for (const Preset& p : kPresets) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

}  // namespace cts

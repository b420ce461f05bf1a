#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cts/teachers.hpp"
#include "cts/toyenv.hpp"

namespace cts {

// Everything needed to reproduce a benchmark campaign. Run i of a campaign
// uses seed base_seed + i, so identical configs give identical results.
struct ExperimentConfig {
  TeacherKind teacher = TeacherKind::Random;
  ToySpaceConfig env;
  std::size_t budget = 0;      // episodes per run; required
  int repeats = 20;
  std::size_t eval_every = 0;  // snapshot period; 0 = budget / 100, at least 1
  std::uint64_t base_seed = 1;
  bool eval_at_zero = false;   // also snapshot the untouched state
  TeacherParams params;
  Vec space_lower;  // optional serving-space override; empty = unit cube
  Vec space_upper;

  std::size_t snapshot_period() const;
  void validate() const;
};

struct MetricRow {
  int run_id = 0;
  std::size_t episode = 0;
  double unlocked = 0.0;  // fraction of cells open
  double cumulative_reward = 0.0;
};

std::vector<MetricRow> run_single(const ExperimentConfig& cfg, std::uint64_t seed,
                                  int run_id);

struct CampaignResult {
  std::vector<std::vector<MetricRow>> runs;  // one trajectory per repeat
  std::vector<std::pair<std::size_t, double>> median_curve;  // episode, unlocked
  double final_median = 0.0;
};

CampaignResult run_campaign(const ExperimentConfig& cfg);

// Middle value; even-sized input averages the two middle values.
double median(std::vector<double> values);

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double x);

// CSV with header run_id,episode,unlocked_pct,cumulative_reward; fractions
// are written as-is. Output is byte-stable for a given input.
void write_csv(std::ostream& out, const std::vector<std::vector<MetricRow>>& runs);
void write_csv_file(const std::string& path,
                    const std::vector<std::vector<MetricRow>>& runs);
std::vector<MetricRow> read_csv(std::istream& in);

// Flat `key = value` config text; '#' starts a comment. Unknown keys and
// malformed values are reported with their line number.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& source_name);
ExperimentConfig load_config_file(const std::string& path);

struct Preset {
  std::string name;
  std::string summary;
  std::string text;  // config file contents
};

const std::vector<Preset>& presets();
const Preset* find_preset(const std::string& name);

}  // namespace cts

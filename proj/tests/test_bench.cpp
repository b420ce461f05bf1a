#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>
#include <cmath>
#include <sstream>
#include <vector>

#include "cts/bench.hpp"

using namespace cts;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.teacher = TeacherKind::Random;
  cfg.env.relevant_dims = 2;
  cfg.env.cubes_per_dim = 10;
  cfg.budget = 1000;
  cfg.eval_every = 100;
  cfg.repeats = 4;
  cfg.base_seed = 7;
  return cfg;
}

// Visit cubes outward from the corner, saturating each; unlocks everything
// in 75 * cubes episodes (the simulator sanity oracle).
double flood_order_final(const ToySpaceConfig& env, std::size_t budget) {
  ToySpace space(env);
  std::size_t used = 0;
  const int side = env.cubes_per_dim;
  std::vector<std::vector<int>> order;
  for (int a = 0; a < side; ++a)
    for (int b = 0; b < side; ++b) order.push_back({a, b});
  std::sort(order.begin(), order.end(),
            [](const auto& x, const auto& y) {
              return x[0] + x[1] != y[0] + y[1] ? x[0] + x[1] < y[0] + y[1]
                                                : x < y;
            });
  for (const auto& cell : order) {
    Vec p{(cell[0] + 0.5) / side, (cell[1] + 0.5) / side};
    for (int k = 0; k < env.unlock_count && used < budget; ++k, ++used)
      (void)space.episode(p);
  }
  return space.unlocked_fraction();
}

}  // namespace

TEST_CASE("config validation catches broken setups") {
  auto cfg = small_config();
  CHECK_NOTHROW(cfg.validate());

  SUBCASE("budget is required") {
    cfg.budget = 0;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
  }
  SUBCASE("repeats must be at least 1") {
    cfg.repeats = 0;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
  }
  SUBCASE("eval_every must not exceed budget") {
    cfg.eval_every = 1001;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
  }
  SUBCASE("environment rules apply") {
    cfg.env.cubes_per_dim = 1;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
  }
  SUBCASE("eval_every 0 defaults to budget/100") {
    cfg.eval_every = 0;
    CHECK(cfg.snapshot_period() == 10);
    cfg.budget = 50;  // small budgets still snapshot
    CHECK(cfg.snapshot_period() == 1);
  }
}

TEST_CASE("run_single emits the scheduled snapshot rows") {
  auto cfg = small_config();

  SUBCASE("budget 1000 at eval_every 100 gives 10 rows") {
    auto rows = run_single(cfg, 7, 0);
    REQUIRE(rows.size() == 10);
    for (int i = 0; i < 10; ++i) {
      CHECK(rows[i].episode == std::size_t(100 * (i + 1)));
      CHECK(rows[i].run_id == 0);
    }
  }

  SUBCASE("eval_at_zero adds the untouched-state row") {
    cfg.eval_at_zero = true;
    auto rows = run_single(cfg, 7, 0);
    REQUIRE(rows.size() == 11);
    CHECK(rows[0].episode == 0);
    CHECK(rows[0].unlocked == doctest::Approx(0.01));  // corner cube only
    CHECK(rows[0].cumulative_reward == 0.0);
  }

  SUBCASE("a final row appears even off the snapshot grid") {
    cfg.budget = 1050;
    auto rows = run_single(cfg, 7, 0);
    REQUIRE(rows.size() == 11);
    CHECK(rows.back().episode == 1050);
  }

  SUBCASE("rows are episode-sorted with monotone metrics") {
    auto rows = run_single(cfg, 3, 2);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i].episode > rows[i - 1].episode);
      CHECK(rows[i].unlocked >= rows[i - 1].unlocked);
      CHECK(rows[i].cumulative_reward >= rows[i - 1].cumulative_reward);
    }
  }

  SUBCASE("same seed gives identical rows") {
    auto a = run_single(cfg, 11, 0);
    auto b = run_single(cfg, 11, 0);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].episode == b[i].episode);
      CHECK(a[i].unlocked == b[i].unlocked);
      CHECK(a[i].cumulative_reward == b[i].cumulative_reward);
    }
  }

  SUBCASE("random exploration trails the flood-order oracle") {
    cfg.budget = 100000;
    cfg.eval_every = 100000;
    auto rows = run_single(cfg, 1, 0);
    const double oracle = flood_order_final(cfg.env, cfg.budget);
    CHECK(oracle == 1.0);  // budget far beyond 75 * 100
    CHECK(rows.back().unlocked < oracle);
  }
}

TEST_CASE("median averages the middle pair on even counts") {
  CHECK(median({3.0}) == 3.0);
  CHECK(median({1.0, 2.0}) == 1.5);
  CHECK(median({5.0, 1.0, 3.0}) == 3.0);
  std::vector<double> v;
  for (int i = 19; i >= 0; --i) v.push_back(i / 10.0);  // 0.0 .. 1.9 shuffled
  CHECK(median(v) == doctest::Approx(0.95));  // mean of 0.9 and 1.0
  CHECK_THROWS_AS((void)median({}), ContractError);
}

TEST_CASE("run_campaign aggregates seeded runs") {
  auto cfg = small_config();

  SUBCASE("seeds are base_seed + run index") {
    auto result = run_campaign(cfg);
    REQUIRE(result.runs.size() == 4);
    for (int i = 0; i < 4; ++i) {
      auto solo = run_single(cfg, cfg.base_seed + i, i);
      REQUIRE(solo.size() == result.runs[i].size());
      for (std::size_t j = 0; j < solo.size(); ++j) {
        CHECK(solo[j].unlocked == result.runs[i][j].unlocked);
        CHECK(solo[j].run_id == i);
      }
    }
  }

  SUBCASE("repeats=1 median curve equals the run curve") {
    cfg.repeats = 1;
    auto result = run_campaign(cfg);
    REQUIRE(result.median_curve.size() == result.runs[0].size());
    for (std::size_t j = 0; j < result.median_curve.size(); ++j) {
      CHECK(result.median_curve[j].first == result.runs[0][j].episode);
      CHECK(result.median_curve[j].second == result.runs[0][j].unlocked);
    }
    CHECK(result.final_median == result.runs[0].back().unlocked);
  }

  SUBCASE("median stays within the per-run envelope") {
    auto result = run_campaign(cfg);
    for (std::size_t j = 0; j < result.median_curve.size(); ++j) {
      double lo = 1e300, hi = -1e300;
      for (const auto& run : result.runs) {
        lo = std::min(lo, run[j].unlocked);
        hi = std::max(hi, run[j].unlocked);
      }
      CHECK(result.median_curve[j].second >= lo);
      CHECK(result.median_curve[j].second <= hi);
    }
  }

  SUBCASE("a failing run reports its seed") {
    // Validation cannot rule out resource failures; an impossibly large
    // snapshot reservation makes run 0 throw before any episode runs.
    cfg.base_seed = 100;
    cfg.budget = std::numeric_limits<std::size_t>::max();
    cfg.eval_every = 2;
    try {
      (void)run_campaign(cfg);
      FAIL("expected a run failure");
    } catch (const ContractError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("run 0") != std::string::npos);
      CHECK(msg.find("seed 100") != std::string::npos);
    }
  }
}

TEST_CASE("doubles render in shortest round-trip form") {
  CHECK(format_double(0.03) == "0.03");
  CHECK(format_double(1234.5) == "1234.5");
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_double(100000.0) == "100000");
}

TEST_CASE("csv output matches the pinned format") {
  SUBCASE("no rows means header only") {
    std::ostringstream out;
    write_csv(out, {});
    CHECK(out.str() == "run_id,episode,unlocked_pct,cumulative_reward\n");
  }

  SUBCASE("example row renders exactly") {
    std::ostringstream out;
    write_csv(out, {{MetricRow{0, 100, 0.03, 1234.5}}});
    CHECK(out.str() ==
          "run_id,episode,unlocked_pct,cumulative_reward\n"
          "0,100,0.03,1234.5\n");
  }

  SUBCASE("round-trip preserves every row") {
    auto cfg = small_config();
    auto result = run_campaign(cfg);
    std::ostringstream out;
    write_csv(out, result.runs);
    std::istringstream in(out.str());
    auto rows = read_csv(in);
    std::size_t want = 0;
    for (const auto& run : result.runs) want += run.size();
    REQUIRE(rows.size() == want);
    std::size_t at = 0;
    for (const auto& run : result.runs) {
      for (const auto& row : run) {
        CHECK(rows[at].run_id == row.run_id);
        CHECK(rows[at].episode == row.episode);
        CHECK(rows[at].unlocked == row.unlocked);
        CHECK(rows[at].cumulative_reward == row.cumulative_reward);
        ++at;
      }
    }
  }

  SUBCASE("identical config gives byte-identical output") {
    auto cfg = small_config();
    cfg.teacher = TeacherKind::AlpGmm;
    cfg.budget = 600;
    std::ostringstream a, b;
    write_csv(a, run_campaign(cfg).runs);
    write_csv(b, run_campaign(cfg).runs);
    CHECK(a.str() == b.str());
    CHECK(a.str().size() > 100);
  }

  SUBCASE("read_csv rejects malformed input") {
    std::istringstream bad_header("nope\n0,1,0.5,3\n");
    CHECK_THROWS_AS((void)read_csv(bad_header), ContractError);
    std::istringstream bad_fields(
        "run_id,episode,unlocked_pct,cumulative_reward\n0,1,0.5\n");
    CHECK_THROWS_AS((void)read_csv(bad_fields), ContractError);
    std::istringstream bad_number(
        "run_id,episode,unlocked_pct,cumulative_reward\n0,x,0.5,3\n");
    CHECK_THROWS_AS((void)read_csv(bad_number), ContractError);
  }
}

TEST_CASE("config text parses keys, comments, and errors with line numbers") {
  SUBCASE("a full config round-trips") {
    const std::string text =
        "# reference 2D run\n"
        "teacher = covar-gmm\n"
        "relevant_dims = 2\n"
        "cubes_per_dim = 20\n"
        "unlock_count = 75\n"
        "reward_cap = 100\n"
        "budget = 5000\n"
        "repeats = 3\n"
        "eval_every = 500\n"
        "base_seed = 42\n"
        "eval_at_zero = true\n"
        "\n"
        "fit_rate = 200\n"
        "k_max = 8\n"
        "p_rnd = 0.15\n"
        "max_region_size = 150\n"
        "mutation_sigma = 0.2\n"
        "window_ratio = 0.25\n"
        "reward_threshold = 90\n"
        "direction = 1, -1\n"
        "window_start = 0.5, 0.25\n";
    auto cfg = parse_config_text(text, "inline");
    CHECK(cfg.teacher == TeacherKind::CovarGmm);
    CHECK(cfg.env.relevant_dims == 2);
    CHECK(cfg.env.cubes_per_dim == 20);
    CHECK(cfg.budget == 5000);
    CHECK(cfg.repeats == 3);
    CHECK(cfg.eval_every == 500);
    CHECK(cfg.base_seed == 42);
    CHECK(cfg.eval_at_zero);
    CHECK(cfg.params.gmm.fit_rate == 200);
    CHECK(cfg.params.gmm.k_max == 8);
    CHECK(cfg.params.gmm.p_rnd == 0.15);
    CHECK(cfg.params.riac.max_region_size == 150);
    CHECK(cfg.params.riac.mutation_sigma == 0.2);
    CHECK(cfg.params.oracle.window_ratio == 0.25);
    CHECK(cfg.params.oracle.reward_threshold == 90);
    CHECK(cfg.params.oracle.direction == std::vector<int>{1, -1});
    CHECK(cfg.params.oracle.start == Vec{0.5, 0.25});
    CHECK_NOTHROW(cfg.validate());
  }

  SUBCASE("irrelevant dimensions widen the sampled space") {
    auto cfg = parse_config_text(
        "teacher = random\nbudget = 50\nrelevant_dims = 3\n"
        "irrelevant_dims = 7\n",
        "inline");
    CHECK(cfg.env.relevant_dims == 3);
    CHECK(cfg.env.irrelevant_dims == 7);
    CHECK(cfg.env.dims() == 10);
    CHECK_NOTHROW(cfg.validate());
  }

  SUBCASE("teacher and budget are required") {
    CHECK_THROWS_AS((void)parse_config_text("budget = 10\n", "x"),
                    ContractError);
    CHECK_THROWS_AS((void)parse_config_text("teacher = random\n", "x"),
                    ContractError);
  }

  SUBCASE("unknown keys name their line") {
    try {
      (void)parse_config_text("teacher = random\nbudget = 10\nwat = 1\n",
                              "conf.txt");
      FAIL("expected parse error");
    } catch (const ContractError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("conf.txt:3") != std::string::npos);
      CHECK(msg.find("wat") != std::string::npos);
    }
  }

  SUBCASE("bad values name their line") {
    try {
      (void)parse_config_text("teacher = random\nbudget = soon\n", "c");
      FAIL("expected parse error");
    } catch (const ContractError& e) {
      CHECK(std::string(e.what()).find("c:2") != std::string::npos);
    }
  }

  SUBCASE("missing '=' is rejected") {
    CHECK_THROWS_AS(
        (void)parse_config_text("teacher = random\nbudget 10\n", "c"),
        ContractError);
  }
}

TEST_CASE("shipped presets parse and validate") {
  REQUIRE(!presets().empty());
  for (const auto& preset : presets()) {
    CAPTURE(preset.name);
    auto cfg = parse_config_text(preset.text, preset.name);
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.repeats == 20);
    CHECK(cfg.budget >= 10000);
  }
  CHECK(find_preset("toy2d") != nullptr);
  CHECK(find_preset("toy6d") != nullptr);
  CHECK(find_preset("nope") == nullptr);
}

#include <doctest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "gwf/config.hpp"
#include "gwf/errors.hpp"
#include "gwf/eval.hpp"
#include "gwf/forecast.hpp"
#include "gwf/pipeline.hpp"

namespace fs = std::filesystem;
using namespace gwf;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("gwf_pipeline_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// 70 days: 56 to train, 14 to test.
json small_run(const std::string& out) {
    return json{
        {"seed", 11},
        {"output", out},
        {"jobs", 2},
        {"data", {{"synth", {{"seed", 3}, {"n_stations", 8}, {"start", "2009-03-01T00:00Z"}, {"days", 70},
                             {"utc_offset_hours", -6}, {"height_noise_m", 0.5}}}}},
        {"network", {{"targets", {"ST01", "ST02"}}, {"utc_offset_hours", -6}}},
        {"geostrophy", {{"mean_removal", "none"}}},
        {"periods", {{"train_start", "2009-03-01T00:00Z"}, {"train_end", "2009-04-26T00:00Z"},
                     {"test_start", "2009-04-26T00:00Z"}, {"test_end", "2009-05-10T00:00Z"}}},
        {"model", {{"variants", {"PSS", "TDD", "TDDGW-MD"}}, {"horizons", {1, 2}}, {"window_days", 30},
                   {"diurnal_window_days", 30}, {"max_lag", 3}}},
        {"optimizer", {{"restarts", 1}}},
    };
}

std::vector<std::string> violations_of(const std::string& text) {
    try {
        config::RunConfig::from_json(text).validate();
    } catch (const ConfigError& e) {
        return e.violations();
    }
    return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("config round trips through json") {
    const auto c = config::RunConfig::from_json(small_run("x").dump());
    c.validate();
    CHECK(c.targets == std::vector<std::string>{"ST01", "ST02"});
    CHECK(c.mean_removal == geostrophy::MeanRemovalPolicy::None);
    CHECK(c.synth->n_stations == 8);
    const auto again = config::RunConfig::from_json(c.to_json());
    CHECK(again.to_json() == c.to_json());
}

TEST_CASE("config defaults") {
    auto j = small_run("x");
    j.erase("model");
    j.erase("optimizer");
    j["geostrophy"].erase("mean_removal");
    const auto c = config::RunConfig::from_json(j.dump());
    CHECK(c.horizons == std::vector<int>{1, 2, 3, 4, 5, 6});
    CHECK(c.window_days == 45);
    CHECK(c.mean_removal == geostrophy::MeanRemovalPolicy::PerStationMonthlyMean);
    CHECK(c.baseline == "PSS");
}

TEST_CASE("config validation lists every violation") {
    auto j = small_run("x");
    j["jobs"] = -1;
    j["network"]["targets"] = {"ST01", "ST99"};
    j["model"]["variants"] = {"TDD", "NOPE"};
    j["model"]["horizons"] = {0};
    j["periods"]["test_end"] = "2012-01-01T00:00Z";
    const auto v = violations_of(j.dump());
    CHECK(mentions(v, "jobs"));
    CHECK(mentions(v, "ST99"));
    CHECK(mentions(v, "NOPE"));
    CHECK(mentions(v, "horizons"));
    CHECK(mentions(v, "test_end"));
    CHECK(v.size() >= 5);
}

TEST_CASE("config rejects unknown keys, wrong types and missing periods") {
    auto j = small_run("x");
    j["model"]["windw_days"] = 3;
    j["optimizer"]["restarts"] = "three";
    j["periods"].erase("test_start");
    std::vector<std::string> v;
    try {
        config::RunConfig::from_json(j.dump());
    } catch (const ConfigError& e) {
        v = e.violations();
    }
    CHECK(mentions(v, "windw_days"));
    CHECK(mentions(v, "optimizer.restarts"));
    CHECK(mentions(v, "periods.test_start"));

    CHECK_THROWS_AS(config::RunConfig::from_json("{not json"), ConfigError);
}

TEST_CASE("stages require their inputs") {
    TempDir d;
    const auto c = config::RunConfig::from_json(small_run((d.path / "run").string()).dump());
    CHECK_THROWS_AS(pipeline::run_train(c), Error);
    CHECK_THROWS_AS(pipeline::run_evaluate(c), Error);
}

TEST_CASE("end to end run is complete and reproducible") {
    TempDir d;
    const auto a = config::RunConfig::from_json(small_run((d.path / "a").string()).dump());
    auto bj = small_run((d.path / "b").string());
    bj["jobs"] = 1;  // the thread count must not change any output
    const auto b = config::RunConfig::from_json(bj.dump());
    pipeline::run_all(a);
    pipeline::run_all(b);

    const pipeline::Layout la(a.output), lb(b.output);
    for (const auto& v : a.variants) {
        const auto text = slurp(la.forecasts(v));
        CHECK(text == slurp(lb.forecasts(v)));
        const auto recs = forecast::read_csv(la.forecasts(v));
        // 14 test days, two targets, two horizons
        CHECK(recs.size() == 14u * 24u * 2u * 2u);
    }
    for (const auto& f : {la.scores(), la.scores_without_fallbacks(), la.pit(), la.reductions(), la.models(),
                          la.geowind(), la.table()})
        CHECK(slurp(f) == slurp(fs::path(lb.root) / fs::relative(f, la.root)));
    CHECK(fs::exists(la.config()));
    CHECK(fs::exists(la.correlations()));
    CHECK(fs::exists(la.truth()));

    // The saved config reproduces the run's settings.
    const auto saved = config::load(la.config());
    CHECK(saved.targets == a.targets);
    CHECK(saved.seed == a.seed);

    // Verification identities on every cell.
    const auto scores = slurp(la.scores());
    std::istringstream in(scores);
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::istringstream ls(line);
        for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
        REQUIRE(f.size() == 11);
        CHECK(std::stod(f[7]) >= std::stod(f[6]) - 1e-12);
        if (f[9] != "NA") CHECK(std::stod(f[9]) > 0);
        ++rows;
    }
    CHECK(rows > 0);
}

TEST_CASE("a different seed changes the synthetic data") {
    TempDir d;
    auto j = small_run((d.path / "a").string());
    const auto a = config::RunConfig::from_json(j.dump());
    j["output"] = (d.path / "b").string();
    j["data"]["synth"]["seed"] = 4;
    const auto b = config::RunConfig::from_json(j.dump());
    pipeline::run_synth(a);
    pipeline::run_synth(b);
    CHECK(slurp(pipeline::Layout(a.output).hourly()) != slurp(pipeline::Layout(b.output).hourly()));
}

TEST_CASE("scoring forecasts without observations is an empty report") {
    std::vector<forecast::ForecastRecord> recs(3);
    for (auto& r : recs) {
        r.station = "ST01";
        r.point = 3.0;
    }
    CHECK_THROWS_AS(eval::score(recs, "TDD"), EmptyReport);
}

#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "gwf/config.hpp"
#include "gwf/geostrophy.hpp"
#include "gwf/station.hpp"

namespace gwf::pipeline {

using Log = std::function<void(std::string_view)>;

/// File names under the output directory.
struct Layout {
    explicit Layout(std::string root);
    std::string root;
    std::string config() const;
    std::string hourly() const;      // data/hourly.csv (synthetic runs)
    std::string stations() const;    // data/stations.csv
    std::string truth() const;       // data/truth_geowind.csv
    std::string geowind() const;
    std::string models() const;
    std::string bic() const;
    std::string forecasts(const std::string& variant) const;
    std::string scores() const;
    std::string scores_without_fallbacks() const;
    std::string pit() const;
    std::string pit_tests() const;
    std::string reductions() const;
    std::string table() const;
    std::string table_without_fallbacks() const;
    std::string horizons() const;
    std::string correlations() const;
};

/// Each stage reads the artifacts of the earlier ones from the output
/// directory and writes its own atomically.
void run_synth(const config::RunConfig& c, const Log& log = {});
void run_geowind(const config::RunConfig& c, const Log& log = {});
void run_train(const config::RunConfig& c, const Log& log = {});
void run_forecast(const config::RunConfig& c, const Log& log = {});
void run_evaluate(const config::RunConfig& c, const Log& log = {});
void run_report(const config::RunConfig& c, const Log& log = {});
void run_all(const config::RunConfig& c, const Log& log = {});

/// The hourly network of a run: the synthetic output or the configured
/// station files, restricted to the configured stations.
Network load_network(const config::RunConfig& c);

}  // namespace gwf::pipeline

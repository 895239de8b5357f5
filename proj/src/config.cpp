#include "gwf/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <json.hpp>

#include "gwf/errors.hpp"
#include "gwf/model.hpp"

namespace gwf::config {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads typed members of one JSON object, collecting every problem.
class Reader {
public:
    Reader(const json& j, std::string where, std::vector<std::string>& bad) : j_(j), where_(std::move(where)), bad_(bad) {
        if (!j_.is_object()) bad_.push_back(where_ + ": expected an object");
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_.is_object() && j_.contains(key);
    }

    template <class T>
    void get(const char* key, T& out) {
        if (!has(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            bad_.push_back(where_ + "." + key + ": wrong type");
        }
    }

    void hour(const char* key, UtcHour& out) {
        std::string s;
        if (!has(key)) return;
        get(key, s);
        if (const auto h = parse_iso8601_hour(s))
            out = *h;
        else
            bad_.push_back(where_ + "." + key + ": expected an ISO-8601 hour, got '" + s + "'");
    }

    const json& sub(const char* key) {
        static const json empty = json::object();
        return has(key) ? j_.at(key) : empty;
    }

    ~Reader() {
        if (!j_.is_object()) return;
        for (const auto& [k, _] : j_.items())
            if (!seen_.count(k)) bad_.push_back(where_ + ": unknown key '" + k + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::vector<std::string>& bad_;
    std::set<std::string> seen_;
};

void read_synth(const json& j, synth::SynthConfig& s, std::vector<std::string>& bad) {
    Reader r(j, "data.synth", bad);
    r.get("seed", s.seed);
    r.get("n_stations", s.n_stations);
    r.get("domain_km", s.domain_km);
    r.get("center_latitude", s.center_latitude);
    r.get("center_longitude", s.center_longitude);
    r.get("elevation_min", s.elevation_min);
    r.get("elevation_max", s.elevation_max);
    r.hour("start", s.start);
    r.get("days", s.days);
    r.get("utc_offset_hours", s.tz.utc_offset_hours);
    r.get("a0_mean", s.a0_mean);
    r.get("a0_phi", s.a0_phi);
    r.get("a0_innovation", s.a0_innovation);
    r.get("gradient_phi", s.gradient_phi);
    r.get("gradient_innovation", s.gradient_innovation);
    r.get("gradient_mean_x", s.gradient_mean_x);
    r.get("gradient_mean_y", s.gradient_mean_y);
    r.get("friction", s.friction);
    r.get("friction_angle_deg", s.friction_angle_deg);
    r.get("driving_lag_hours", s.driving_lag_hours);
    r.get("diurnal", s.diurnal);
    r.get("diurnal_seasonal_swing", s.diurnal_seasonal_swing);
    r.get("noise_phi", s.noise_phi);
    r.get("noise_scale", s.noise_scale);
    r.get("noise_common", s.noise_common);
    r.get("direction_noise_deg", s.direction_noise_deg);
    r.get("temp_mean_c", s.temp_mean_c);
    r.get("temp_seasonal_amp", s.temp_seasonal_amp);
    r.get("temp_diurnal_amp", s.temp_diurnal_amp);
    r.get("temp_noise", s.temp_noise);
    r.get("temp_station_spread", s.temp_station_spread);
    r.get("height_noise_m", s.height_noise_m);
    r.get("missing_fraction", s.missing_fraction);
}

json synth_json(const synth::SynthConfig& s) {
    return {{"seed", s.seed},
            {"n_stations", s.n_stations},
            {"domain_km", s.domain_km},
            {"center_latitude", s.center_latitude},
            {"center_longitude", s.center_longitude},
            {"elevation_min", s.elevation_min},
            {"elevation_max", s.elevation_max},
            {"start", to_iso8601(s.start)},
            {"days", s.days},
            {"utc_offset_hours", s.tz.utc_offset_hours},
            {"a0_mean", s.a0_mean},
            {"a0_phi", s.a0_phi},
            {"a0_innovation", s.a0_innovation},
            {"gradient_phi", s.gradient_phi},
            {"gradient_innovation", s.gradient_innovation},
            {"gradient_mean_x", s.gradient_mean_x},
            {"gradient_mean_y", s.gradient_mean_y},
            {"friction", s.friction},
            {"friction_angle_deg", s.friction_angle_deg},
            {"driving_lag_hours", s.driving_lag_hours},
            {"diurnal", s.diurnal},
            {"diurnal_seasonal_swing", s.diurnal_seasonal_swing},
            {"noise_phi", s.noise_phi},
            {"noise_scale", s.noise_scale},
            {"noise_common", s.noise_common},
            {"direction_noise_deg", s.direction_noise_deg},
            {"temp_mean_c", s.temp_mean_c},
            {"temp_seasonal_amp", s.temp_seasonal_amp},
            {"temp_diurnal_amp", s.temp_diurnal_amp},
            {"temp_noise", s.temp_noise},
            {"temp_station_spread", s.temp_station_spread},
            {"height_noise_m", s.height_noise_m},
            {"missing_fraction", s.missing_fraction}};
}

std::string resolve(const std::string& base, const std::string& p) {
    if (p.empty() || base.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base) / p).lexically_normal().string();
}

}  // namespace

void RunConfig::validate() const {
    std::vector<std::string> bad;
    if (output.empty()) bad.push_back("output: must name a directory");
    if (jobs < 0) bad.push_back("jobs: must be >= 0");

    const bool files = !hourly_csv.empty() || !stations_csv.empty();
    if (synth && files) bad.push_back("data: give either a synthetic benchmark or station files, not both");
    if (!synth && (hourly_csv.empty() || stations_csv.empty()))
        bad.push_back("data: station files need both hourly_csv and stations_csv");
    if (synth) try {
            synth->validate();
        } catch (const ConfigError& e) {
            bad.insert(bad.end(), e.violations().begin(), e.violations().end());
        }
    try {
        schema.validate();
    } catch (const ConfigError& e) {
        bad.insert(bad.end(), e.violations().begin(), e.violations().end());
    }

    if (targets.empty()) bad.push_back("network.targets: at least one target station is required");
    const std::set<std::string> tset(targets.begin(), targets.end());
    if (tset.size() != targets.size()) bad.push_back("network.targets: duplicate station");
    if (!stations.empty())
        for (const auto& t : targets)
            if (std::find(stations.begin(), stations.end(), t) == stations.end())
                bad.push_back("network.targets: '" + t + "' is not in network.stations");
    if (synth) {
        std::set<std::string> ids;
        for (std::size_t i = 0; i < synth->n_stations; ++i)
            ids.insert("ST" + std::string(i < 9 ? "0" : "") + std::to_string(i + 1));
        for (const auto& t : targets)
            if (!ids.count(t)) bad.push_back("network.targets: no synthetic station '" + t + "'");
        for (const auto& t : stations)
            if (!ids.count(t)) bad.push_back("network.stations: no synthetic station '" + t + "'");
    }
    if (!stations.empty() && stations.size() < min_stations)
        bad.push_back("network.stations: fewer stations than geostrophy.min_stations");

    try {
        constants.validate();
    } catch (const InvalidInput& e) {
        bad.push_back(std::string("geostrophy.constants: ") + e.what());
    }
    if (min_stations < 3) bad.push_back("geostrophy.min_stations: must be >= 3");

    if (!(train_start < train_end)) bad.push_back("periods: train_start must precede train_end");
    if (!(train_end <= test_start)) bad.push_back("periods: the training period must end before the test period");
    if (!(test_start < test_end)) bad.push_back("periods: test_start must precede test_end");
    if (std::int64_t(window_days) * 24 > train_end - train_start)
        bad.push_back("model.window_days: the window is longer than the training period");
    if (synth) {
        const UtcHour data_end = synth->start + std::int64_t(synth->days) * 24;
        if (train_start < synth->start) bad.push_back("periods: train_start precedes the synthetic record");
        if (test_end > data_end) bad.push_back("periods: test_end runs past the synthetic record");
    }

    if (variants.empty()) bad.push_back("model.variants: at least one variant is required");
    std::set<std::string> vset;
    for (const auto& v : variants) {
        try {
            if (!vset.insert(model::to_string(model::parse_variant(v))).second)
                bad.push_back("model.variants: duplicate '" + v + "'");
        } catch (const Error& e) {
            bad.push_back(std::string("model.variants: ") + e.what());
        }
    }
    if (std::find(variants.begin(), variants.end(), baseline) == variants.end())
        bad.push_back("evaluation.baseline: '" + baseline + "' is not among model.variants");
    if (horizons.empty()) bad.push_back("model.horizons: at least one horizon is required");
    std::set<int> hset;
    for (int k : horizons) {
        if (k < 1 || k > model::kMaxHorizon) bad.push_back("model.horizons: " + std::to_string(k) + " is outside 1..6");
        if (!hset.insert(k).second) bad.push_back("model.horizons: duplicate " + std::to_string(k));
    }
    if (window_days < 1) bad.push_back("model.window_days: must be >= 1");
    if (diurnal_window_days < 1) bad.push_back("model.diurnal_window_days: must be >= 1");
    if (refit_hours < 1) bad.push_back("model.refit_hours: must be >= 1");
    if (max_lag < 0 || max_lag > model::kMaxLag) bad.push_back("model.max_lag: must lie in 0..10");
    if (restarts < 0) bad.push_back("optimizer.restarts: must be >= 0");
    if (!(ftol > 0)) bad.push_back("optimizer.ftol: must be positive");
    if (pit_bins < 2) bad.push_back("evaluation.pit_bins: must be >= 2");
    if (!bad.empty()) throw ConfigError(bad);
}

RunConfig RunConfig::from_json(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("config: ") + e.what()});
    }
    RunConfig c;
    std::vector<std::string> bad;
    {
        Reader r(j, "config", bad);
        r.get("seed", c.seed);
        r.get("output", c.output);
        r.get("jobs", c.jobs);
        {
            Reader d(r.sub("data"), "data", bad);
            if (d.has("synth")) {
                c.synth = synth::SynthConfig{};
                read_synth(d.sub("synth"), *c.synth, bad);
            }
            d.get("hourly_csv", c.hourly_csv);
            d.get("stations_csv", c.stations_csv);
            if (d.has("schema")) {
                try {
                    c.schema = ingest::Schema::from_json(d.sub("schema").dump());
                } catch (const ConfigError& e) {
                    bad.insert(bad.end(), e.violations().begin(), e.violations().end());
                }
            }
            std::string schema_file;
            d.get("schema_file", schema_file);
            if (!schema_file.empty()) {
                try {
                    c.schema = ingest::load_schema(resolve(base_dir, schema_file));
                } catch (const Error& e) {
                    bad.push_back(std::string("data.schema_file: ") + e.what());
                }
            }
        }
        {
            Reader n(r.sub("network"), "network", bad);
            n.get("stations", c.stations);
            n.get("targets", c.targets);
            n.get("utc_offset_hours", c.tz.utc_offset_hours);
        }
        {
            Reader g(r.sub("geostrophy"), "geostrophy", bad);
            std::string policy;
            g.get("mean_removal", policy);
            if (!policy.empty()) try {
                    c.mean_removal = geostrophy::parse_mean_removal(policy);
                } catch (const InvalidInput& e) {
                    bad.push_back(std::string("geostrophy.mean_removal: ") + e.what());
                }
            g.get("min_stations", c.min_stations);
            Reader k(g.sub("constants"), "geostrophy.constants", bad);
            k.get("g0", c.constants.g0);
            k.get("gas_constant", c.constants.gas_constant);
            k.get("omega", c.constants.omega);
            k.get("p_ref", c.constants.p_ref);
        }
        {
            Reader p(r.sub("periods"), "periods", bad);
            for (const char* key : {"train_start", "train_end", "test_start", "test_end"})
                if (!p.has(key)) bad.push_back(std::string("periods.") + key + ": required");
            p.hour("train_start", c.train_start);
            p.hour("train_end", c.train_end);
            p.hour("test_start", c.test_start);
            p.hour("test_end", c.test_end);
        }
        {
            Reader m(r.sub("model"), "model", bad);
            m.get("variants", c.variants);
            m.get("horizons", c.horizons);
            m.get("window_days", c.window_days);
            m.get("diurnal_window_days", c.diurnal_window_days);
            m.get("refit_hours", c.refit_hours);
            m.get("max_lag", c.max_lag);
            m.get("select_lags", c.select_lags);
        }
        {
            Reader o(r.sub("optimizer"), "optimizer", bad);
            o.get("restarts", c.restarts);
            o.get("ftol", c.ftol);
            o.get("max_evals", c.max_evals);
        }
        {
            Reader e(r.sub("evaluation"), "evaluation", bad);
            e.get("pit_bins", c.pit_bins);
            e.get("baseline", c.baseline);
        }
    }
    if (!bad.empty()) throw ConfigError(bad);
    c.hourly_csv = resolve(base_dir, c.hourly_csv);
    c.stations_csv = resolve(base_dir, c.stations_csv);
    c.validate();
    return c;
}

std::string RunConfig::to_json() const {
    json data = json::object();
    if (synth) data["synth"] = synth_json(*synth);
    if (!hourly_csv.empty()) data["hourly_csv"] = hourly_csv;
    if (!stations_csv.empty()) data["stations_csv"] = stations_csv;
    data["schema"] = json::parse(schema.to_json());
    json j{{"seed", seed},
           {"output", output},
           {"jobs", jobs},
           {"data", data},
           {"network", {{"stations", stations}, {"targets", targets}, {"utc_offset_hours", tz.utc_offset_hours}}},
           {"geostrophy",
            {{"mean_removal", geostrophy::to_string(mean_removal)},
             {"min_stations", min_stations},
             {"constants",
              {{"g0", constants.g0},
               {"gas_constant", constants.gas_constant},
               {"omega", constants.omega},
               {"p_ref", constants.p_ref}}}}},
           {"periods",
            {{"train_start", to_iso8601(train_start)},
             {"train_end", to_iso8601(train_end)},
             {"test_start", to_iso8601(test_start)},
             {"test_end", to_iso8601(test_end)}}},
           {"model",
            {{"variants", variants},
             {"horizons", horizons},
             {"window_days", window_days},
             {"diurnal_window_days", diurnal_window_days},
             {"refit_hours", refit_hours},
             {"max_lag", max_lag},
             {"select_lags", select_lags}}},
           {"optimizer", {{"restarts", restarts}, {"ftol", ftol}, {"max_evals", max_evals}}},
           {"evaluation", {{"pit_bins", pit_bins}, {"baseline", baseline}}}};
    return j.dump(2) + "\n";
}

RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return RunConfig::from_json(ss.str(), fs::path(path).parent_path().string());
}

}  // namespace gwf::config

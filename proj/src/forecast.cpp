#include "gwf/forecast.hpp"

#include <algorithm>
#include <tuple>

#include "gwf/csv.hpp"
#include "gwf/errors.hpp"
#include "gwf/parallel.hpp"

namespace gwf::forecast {

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fit_seed(std::uint64_t seed, std::size_t target, int horizon, std::int64_t refit) {
    return mix(mix(mix(seed) ^ target) ^ std::uint64_t(horizon)) ^ std::uint64_t(refit);
}

}  // namespace

std::optional<Persistence> persistence(const std::vector<double>& series, UtcHour start, UtcHour t,
                                       std::int64_t max_lookback) {
    for (std::int64_t back = 0; back <= max_lookback; ++back) {
        const std::int64_t i = (t - start) - back;
        if (i < 0) break;
        if (i >= std::int64_t(series.size())) continue;
        if (!is_missing(series[std::size_t(i)])) return Persistence{series[std::size_t(i)], back > 0};
    }
    return std::nullopt;
}

void RollingConfig::validate(const model::ModelData& data) const {
    std::vector<std::string> bad;
    if (window_hours < 1) bad.push_back("forecast: window_hours must be positive");
    if (refit_hours < 1) bad.push_back("forecast: refit_hours must be positive");
    if (restarts < 0) bad.push_back("forecast: restarts must be >= 0");
    if (!(test_end > test_start)) bad.push_back("forecast: test period is empty");
    if (test_start - data.start < window_hours)
        bad.push_back("forecast: the test period must be preceded by at least one window of data");
    if (test_end > data.start + std::int64_t(data.hours)) bad.push_back("forecast: test period runs past the data");
    if (!bad.empty()) throw ConfigError(bad);
}

std::vector<ForecastRecord> run_task(const model::ModelData& data, const model::VariantName& variant,
                                     const Task& task, const RollingConfig& cfg) {
    cfg.validate(data);
    const auto& spec = task.spec;
    const int k = spec.horizon;
    if (k < 1 || k > model::kMaxHorizon) throw ConfigError({"forecast: horizon must lie in 1..6"});
    const bool pss = variant.variant == model::Variant::PSS;
    const auto& y = data.speed.at(spec.target);

    std::optional<model::Design> design;
    if (!pss) design = model::build_design(data, spec);
    model::TrainedModel current;
    current.variant = variant;
    current.spec = spec;
    bool have_model = false;
    std::optional<model::Coefficients> warm = task.warm;

    std::vector<ForecastRecord> out;
    out.reserve(std::size_t(cfg.test_end - cfg.test_start));
    for (UtcHour t = cfg.test_start; t < cfg.test_end; ++t) {
        const std::int64_t step = t - cfg.test_start;
        if (!pss && step % cfg.refit_hours == 0) {
            const auto rows = model::training_rows(*design, t, cfg.window_hours);
            model::FitOptions fo;
            fo.restarts = cfg.restarts;
            fo.ftol = cfg.ftol;
            fo.max_evals = cfg.max_evals;
            fo.seed = fit_seed(cfg.seed, spec.target, k, step / cfg.refit_hours);
            try {
                const auto fit = model::fit_crps(*design, rows, fo, warm ? &*warm : nullptr);
                current.coefficients = fit.coefficients;
                current.window_end = t;
                current.window_start = t - (cfg.window_hours - 1);
                current.train_crps = fit.crps;
                warm = fit.coefficients;
                have_model = true;
            } catch (const TrainingDataError&) {
                // keep the previous model, if any
            }
        }

        ForecastRecord r;
        r.station = data.station_ids[spec.target];
        r.issue_time = t;
        r.horizon = k;
        r.observed = data.at(y, t + k);
        if (!pss && have_model) {
            if (auto d = model::predict_params(current, *design, t)) {
                r.point = d->median();
                r.distribution = *d;
            }
        }
        if (!r.available()) {
            if (const auto p = persistence(y, data.start, t, cfg.window_hours)) {
                r.point = p->value;
                r.fallback = !pss || p->flagged;
            } else {
                r.fallback = true;
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ForecastRecord> run_rolling(const model::ModelData& data, const model::VariantName& variant,
                                        const std::vector<Task>& tasks, const RollingConfig& cfg) {
    cfg.validate(data);
    std::vector<std::vector<ForecastRecord>> parts(tasks.size());
    parallel_for(tasks.size(), cfg.jobs, [&](std::size_t i) { parts[i] = run_task(data, variant, tasks[i], cfg); });

    std::vector<ForecastRecord> out;
    for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(out));
    auto key = [&](const ForecastRecord& r) {
        return std::tuple(data.station_index(r.station), r.issue_time, r.horizon);
    };
    std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    return out;
}

std::vector<Task> full_tasks(const model::ModelData& data, const model::VariantName& variant,
                             const std::vector<std::size_t>& targets, const std::vector<int>& horizons, int max_lag) {
    std::vector<Task> out;
    for (auto target : targets)
        for (int k : horizons)
            out.push_back({model::FeatureSpec::full(variant, data.station_ids.size(), target, k, max_lag), {}});
    return out;
}

std::string to_csv(const std::vector<ForecastRecord>& records) {
    std::string s = "station,issue_time,horizon,mu,sigma,point,fallback,observed\n";
    for (const auto& r : records) {
        const double mu = r.distribution ? r.distribution->mu() : kMissing;
        const double sigma = r.distribution ? r.distribution->sigma() : kMissing;
        s += csv::join({r.station, to_iso8601(r.issue_time), std::to_string(r.horizon), csv::format_double(mu),
                        csv::format_double(sigma), csv::format_double(r.point), r.fallback ? "1" : "0",
                        csv::format_double(r.observed)}) +
             "\n";
    }
    return s;
}

void write_csv(const std::vector<ForecastRecord>& records, const std::string& path) {
    csv::write_atomic(path, to_csv(records));
}

std::vector<ForecastRecord> read_csv(const std::string& path) {
    const auto table = csv::read_table(path);
    const auto cs = table.column("station"), ci = table.column("issue_time"), ch = table.column("horizon"),
               cm = table.column("mu"), cg = table.column("sigma"), cp = table.column("point"),
               cf = table.column("fallback"), co = table.column("observed");
    std::vector<ForecastRecord> out;
    for (const auto& row : table.rows) {
        if (row.fields.size() != table.header.size()) throw LoadError("wrong number of fields", row.line);
        ForecastRecord r;
        r.station = row.fields[cs];
        const auto t = parse_iso8601_hour(row.fields[ci]);
        const auto h = csv::parse_double(row.fields[ch]);
        const auto mu = csv::parse_double(row.fields[cm]), sigma = csv::parse_double(row.fields[cg]),
                   point = csv::parse_double(row.fields[cp]), obs = csv::parse_double(row.fields[co]);
        if (!t || !h || !mu || !sigma || !point || !obs || (row.fields[cf] != "0" && row.fields[cf] != "1"))
            throw LoadError("malformed forecast record", row.line);
        r.issue_time = *t;
        r.horizon = int(*h);
        r.point = *point;
        r.fallback = row.fields[cf] == "1";
        r.observed = *obs;
        if (!is_missing(*mu) && !is_missing(*sigma)) {
            try {
                r.distribution = predictive::TruncatedNormal(*mu, *sigma);
            } catch (const InvalidDistribution& e) {
                throw LoadError(e.what(), row.line);
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace gwf::forecast

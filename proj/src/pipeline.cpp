#include "gwf/pipeline.hpp"

#include <filesystem>
#include <map>
#include <mutex>

#include "gwf/csv.hpp"
#include "gwf/errors.hpp"
#include "gwf/eval.hpp"
#include "gwf/forecast.hpp"
#include "gwf/ingest.hpp"
#include "gwf/model.hpp"
#include "gwf/parallel.hpp"
#include "gwf/synth.hpp"

namespace gwf::pipeline {

namespace fs = std::filesystem;
using config::RunConfig;

Layout::Layout(std::string r) : root(std::move(r)) {}

namespace {

std::string join(const std::string& root, const std::string& rel) { return (fs::path(root) / rel).string(); }

void say(const Log& log, const std::string& s) {
    if (log) log(s);
}

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void require_file(const std::string& path, const char* stage) {
    if (!fs::exists(path)) throw LoadError("'" + path + "' not found; run `" + stage + "` first");
}

void save_config(const RunConfig& c) { csv::write_atomic(Layout(c.output).config(), c.to_json()); }

geostrophy::EstimationOptions estimation_options(const RunConfig& c) {
    geostrophy::EstimationOptions o;
    o.constants = c.constants;
    o.policy = c.mean_removal;
    o.tz = c.tz;
    o.min_stations = c.min_stations;
    return o;
}

model::DataOptions data_options(const RunConfig& c, diurnal::Method m) {
    model::DataOptions o;
    o.method = m;
    o.window_days = c.diurnal_window_days;
    o.training_end = c.train_end;
    o.tz = c.tz;
    return o;
}

std::vector<model::VariantName> parsed_variants(const RunConfig& c) {
    std::vector<model::VariantName> out;
    for (const auto& v : c.variants) out.push_back(model::parse_variant(v));
    return out;
}

std::vector<std::string> forecast_variant_names(const RunConfig& c) {
    std::vector<std::string> out;
    for (const auto& v : parsed_variants(c)) out.push_back(model::to_string(v));
    return out;
}

std::vector<forecast::ForecastRecord> read_forecasts(const RunConfig& c, const std::string& variant) {
    const auto path = Layout(c.output).forecasts(variant);
    require_file(path, "forecast");
    return forecast::read_csv(path);
}

eval::ScoreReport score_all(const RunConfig& c, bool include_fallbacks) {
    eval::ScoreOptions o;
    o.include_fallbacks = include_fallbacks;
    o.pit_bins = c.pit_bins;
    o.tz = c.tz;
    eval::ScoreReport rep;
    rep.include_fallbacks = include_fallbacks;
    for (const auto& v : forecast_variant_names(c)) rep.merge(eval::score(read_forecasts(c, v), v, o));
    return rep;
}

}  // namespace

std::string Layout::config() const { return join(root, "config.json"); }
std::string Layout::hourly() const { return join(root, "data/hourly.csv"); }
std::string Layout::stations() const { return join(root, "data/stations.csv"); }
std::string Layout::truth() const { return join(root, "data/truth_geowind.csv"); }
std::string Layout::geowind() const { return join(root, "geowind.csv"); }
std::string Layout::models() const { return join(root, "models.json"); }
std::string Layout::bic() const { return join(root, "bic.csv"); }
std::string Layout::forecasts(const std::string& v) const { return join(root, "forecasts/" + v + ".csv"); }
std::string Layout::scores() const { return join(root, "scores/scores.csv"); }
std::string Layout::scores_without_fallbacks() const { return join(root, "scores/scores_without_fallbacks.csv"); }
std::string Layout::pit() const { return join(root, "scores/pit.csv"); }
std::string Layout::pit_tests() const { return join(root, "scores/pit_tests.csv"); }
std::string Layout::reductions() const { return join(root, "scores/reductions.csv"); }
std::string Layout::table() const { return join(root, "report/table.txt"); }
std::string Layout::table_without_fallbacks() const { return join(root, "report/table_without_fallbacks.txt"); }
std::string Layout::horizons() const { return join(root, "report/horizons.csv"); }
std::string Layout::correlations() const { return join(root, "report/lag_correlations.csv"); }

Network load_network(const RunConfig& c) {
    const Layout l(c.output);
    Network net;
    if (c.synth) {
        require_file(l.hourly(), "synth");
        net = ingest::load_network(l.hourly(), l.stations(), ingest::Schema{});
    } else {
        net = ingest::load_network(c.hourly_csv, c.stations_csv, c.schema);
    }
    if (c.stations.empty()) return net;
    std::vector<StationSeries> keep;
    for (const auto& id : c.stations) {
        if (!net.find(id)) throw InvalidInput("station '" + id + "' is not in the data");
        keep.push_back(net.station(id));
    }
    return make_network(std::move(keep));
}

void run_synth(const RunConfig& c, const Log& log) {
    if (!c.synth) throw InvalidInput("this run reads station files; there is nothing to synthesize");
    save_config(c);
    const Layout l(c.output);
    const auto out = synth::generate(*c.synth);
    std::vector<StationMeta> metas;
    for (const auto& s : out.network.stations) metas.push_back(s.meta);
    ingest::write_hourly_csv(out.network, l.hourly());
    ingest::write_station_meta(metas, l.stations());
    geostrophy::write_csv(out.truth, l.truth());
    say(log, "synth: " + std::to_string(metas.size()) + " stations, " + std::to_string(out.network.hours) +
                 " hours -> " + l.hourly());
}

void run_geowind(const RunConfig& c, const Log& log) {
    save_config(c);
    const Layout l(c.output);
    const auto net = load_network(c);
    const auto geo = geostrophy::estimate_series(net, estimation_options(c));
    geostrophy::write_csv(geo, l.geowind());
    std::size_t valid = 0;
    for (const auto& s : geo.samples) valid += s.valid();
    say(log, "geowind: " + std::to_string(valid) + " of " + std::to_string(geo.size()) + " hours estimated -> " +
                 l.geowind());
}

void run_train(const RunConfig& c, const Log& log) {
    save_config(c);
    const Layout l(c.output);
    require_file(l.geowind(), "geowind");
    const auto net = load_network(c);
    const auto geo = geostrophy::read_csv(l.geowind());
    const auto variants = parsed_variants(c);

    std::map<diurnal::Method, model::ModelData> data;
    for (const auto& v : variants)
        if (v.variant != model::Variant::PSS && !data.count(v.method))
            data.emplace(v.method, model::prepare(net, geo, c.targets, data_options(c, v.method)));

    struct Job {
        std::size_t variant;
        std::size_t target;
        int horizon;
    };
    std::vector<Job> jobs;
    for (std::size_t vi = 0; vi < variants.size(); ++vi)
        if (variants[vi].variant != model::Variant::PSS)
            for (std::size_t t = 0; t < c.targets.size(); ++t)
                for (int k : c.horizons) jobs.push_back({vi, t, k});

    std::vector<model::TrainedModel> models(jobs.size());
    std::vector<std::string> bic_rows(jobs.size());
    const std::int64_t window = std::int64_t(c.window_days) * 24;
    std::mutex log_mutex;
    parallel_for(jobs.size(), resolve_jobs(c.jobs), [&](std::size_t j) {
        const auto& job = jobs[j];
        const auto& v = variants[job.variant];
        const auto& d = data.at(v.method);
        auto spec = model::FeatureSpec::full(v, c.targets.size(), job.target, job.horizon, c.max_lag);
        const std::string name = model::to_string(v);
        if (c.select_lags) {
            const auto bic = model::select_lags_bic(d, spec, c.train_start, c.train_end - 1, c.max_lag);
            spec = bic.spec;
            std::size_t step = 0;
            for (const auto& s : bic.path)
                bic_rows[j] += csv::join({name, c.targets[job.target], std::to_string(job.horizon),
                                          std::to_string(step++), s.added, csv::format_double(s.bic),
                                          std::to_string(bic.rows)}) +
                               "\n";
        }
        const auto design = model::build_design(d, spec);
        const auto rows = model::training_rows(design, c.train_end - 1, window);
        model::FitOptions fo;
        fo.restarts = c.restarts;
        fo.ftol = c.ftol;
        fo.max_evals = c.max_evals;
        fo.seed = mix(c.seed ^ mix(j));
        const auto fit = model::fit_crps(design, rows, fo);

        auto& m = models[j];
        m.variant = v;
        m.spec = spec;
        m.coefficients = fit.coefficients;
        m.window_end = c.train_end - 1;
        m.window_start = c.train_end - window;
        m.station_ids = d.station_ids;
        for (const auto& sched : d.speed_diurnal) {
            const auto* p = sched.profile_on(c.train_end - 1);
            std::array<double, 24> prof;
            prof.fill(kMissing);
            m.diurnal.push_back(p ? *p : prof);
        }
        m.seed = fo.seed;
        m.train_crps = fit.crps;
        const std::lock_guard lock(log_mutex);
        say(log, "train: " + name + " " + c.targets[job.target] + " k=" + std::to_string(job.horizon) + " p=" +
                     std::to_string(model::row_length(spec)) + " crps=" + csv::format_double(fit.crps));
    });

    model::save_bundle(models, l.models());
    std::string bic = "variant,station,horizon,step,added,bic,rows\n";
    for (const auto& r : bic_rows) bic += r;
    csv::write_atomic(l.bic(), bic);
    say(log, "train: " + std::to_string(models.size()) + " models -> " + l.models());
}

void run_forecast(const RunConfig& c, const Log& log) {
    save_config(c);
    const Layout l(c.output);
    require_file(l.geowind(), "geowind");
    const auto net = load_network(c);
    const auto geo = geostrophy::read_csv(l.geowind());
    const auto variants = parsed_variants(c);
    std::vector<model::TrainedModel> bundle;
    if (std::any_of(variants.begin(), variants.end(), [](const auto& v) { return v.variant != model::Variant::PSS; })) {
        require_file(l.models(), "train");
        bundle = model::load_bundle(l.models());
    }

    forecast::RollingConfig rc;
    rc.test_start = c.test_start;
    rc.test_end = c.test_end;
    rc.window_hours = std::int64_t(c.window_days) * 24;
    rc.refit_hours = c.refit_hours;
    rc.restarts = c.restarts;
    rc.ftol = c.ftol;
    rc.max_evals = c.max_evals;
    rc.seed = c.seed;
    rc.jobs = resolve_jobs(c.jobs);

    std::map<diurnal::Method, model::ModelData> data;
    for (const auto& v : variants) {
        const auto method = v.variant == model::Variant::PSS ? diurnal::Method::TRIG : v.method;
        if (!data.count(method)) data.emplace(method, model::prepare(net, geo, c.targets, data_options(c, method)));
        const auto& d = data.at(method);
        const std::string name = model::to_string(v);

        std::vector<forecast::Task> tasks;
        if (v.variant == model::Variant::PSS) {
            std::vector<std::size_t> all(c.targets.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            tasks = forecast::full_tasks(d, v, all, c.horizons, 0);
        } else {
            for (std::size_t t = 0; t < c.targets.size(); ++t)
                for (int k : c.horizons) {
                    const auto it = std::find_if(bundle.begin(), bundle.end(), [&](const model::TrainedModel& m) {
                        return model::to_string(m.variant) == name && m.spec.target == t && m.spec.horizon == k &&
                               m.station_ids == d.station_ids;
                    });
                    if (it == bundle.end())
                        throw LoadError("no trained " + name + " model for " + c.targets[t] + " at horizon " +
                                        std::to_string(k) + " in " + l.models());
                    tasks.push_back({it->spec, it->coefficients});
                }
        }
        const auto recs = forecast::run_rolling(d, v, tasks, rc);
        forecast::write_csv(recs, l.forecasts(name));
        std::size_t fb = 0;
        for (const auto& r : recs) fb += r.fallback;
        say(log, "forecast: " + name + " " + std::to_string(recs.size()) + " records (" + std::to_string(fb) +
                     " fallbacks) -> " + l.forecasts(name));
    }
}

void run_evaluate(const RunConfig& c, const Log& log) {
    save_config(c);
    const Layout l(c.output);
    const auto with = score_all(c, true);
    const auto without = score_all(c, false);
    csv::write_atomic(l.scores(), eval::scores_csv(with));
    csv::write_atomic(l.scores_without_fallbacks(), eval::scores_csv(without));
    csv::write_atomic(l.pit(), eval::pit_csv(with));

    std::string tests = "station,variant,horizon,n,statistic,p_value\n";
    for (const auto& cell : with.cells) {
        if (cell.pit.empty()) continue;
        const auto t = eval::pit_chi_square(cell.pit);
        tests += csv::join({cell.station, cell.variant, std::to_string(cell.horizon), std::to_string(t.n),
                            csv::format_double(t.statistic), csv::format_double(t.p_value)}) +
                 "\n";
    }
    csv::write_atomic(l.pit_tests(), tests);

    std::vector<eval::Reduction> red;
    const auto baseline = model::to_string(model::parse_variant(c.baseline));
    for (auto m : {eval::Metric::MAE, eval::Metric::RMSE, eval::Metric::CRPS}) {
        const auto r = eval::relative_reductions(with, baseline, m);
        red.insert(red.end(), r.begin(), r.end());
    }
    csv::write_atomic(l.reductions(), eval::reductions_csv(red));
    say(log, "evaluate: " + std::to_string(with.cells.size()) + " score cells -> " + l.scores());
}

void run_report(const RunConfig& c, const Log& log) {
    save_config(c);
    const Layout l(c.output);
    const auto with = score_all(c, true);
    const auto without = score_all(c, false);
    csv::write_atomic(l.table(), eval::text_table(with));
    csv::write_atomic(l.table_without_fallbacks(), eval::text_table(without));

    std::string h = "variant,station,horizon,n,mae,rmse,crps,width90\n";
    for (const auto& cell : with.cells)
        h += csv::join({cell.variant, cell.station, std::to_string(cell.horizon), std::to_string(cell.overall.n),
                        csv::format_double(cell.overall.mae()), csv::format_double(cell.overall.rmse()),
                        csv::format_double(cell.overall.crps()), csv::format_double(cell.overall.width90())}) +
             "\n";
    csv::write_atomic(l.horizons(), h);

    require_file(l.geowind(), "geowind");
    const auto net = load_network(c);
    const auto geo = geostrophy::read_csv(l.geowind());
    std::string corr = "target,variable,horizon,lag,r,pairs\n";
    for (const auto& t : c.targets)
        for (const auto& r : eval::lag_correlations(net, geo, t, c.horizons, 5))
            corr += csv::join({t, r.variable, std::to_string(r.horizon), std::to_string(r.lag),
                               csv::format_double(r.r), std::to_string(r.pairs)}) +
                    "\n";
    csv::write_atomic(l.correlations(), corr);
    say(log, "report: " + l.table());
}

void run_all(const RunConfig& c, const Log& log) {
    if (c.synth) run_synth(c, log);
    run_geowind(c, log);
    run_train(c, log);
    run_forecast(c, log);
    run_evaluate(c, log);
    run_report(c, log);
}

}  // namespace gwf::pipeline

#include "gwf/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <sstream>

#include "gwf/csv.hpp"
#include "gwf/errors.hpp"
#include "gwf/simplex.hpp"
#include "gwf/version.hpp"

namespace gwf::model {

using diurnal::Method;

namespace {

const char* variant_names[] = {"PSS", "TDD", "TDDGW", "TDDGWT", "TDDGWD", "TDDGWDT"};

bool has_gw(Variant v) { return v != Variant::PSS && v != Variant::TDD; }
bool has_gw_direction(Variant v) { return v == Variant::TDDGWD || v == Variant::TDDGWDT; }
bool has_temp(Variant v) { return v == Variant::TDDGWT || v == Variant::TDDGWDT; }

std::vector<double> residual_series(const std::vector<double>& v, UtcHour start, const diurnal::DiurnalSchedule& s,
                                    TimeZone tz) {
    std::vector<double> out(v.size(), kMissing);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const UtcHour t = start + std::int64_t(i);
        const auto* p = s.profile_on(t);
        if (p && !is_missing(v[i])) out[i] = v[i] - (*p)[std::size_t(hour_of_day(t, tz))];
    }
    return out;
}

diurnal::DiurnalSchedule schedule_for(const std::vector<double>& v, UtcHour start, Method m, const DataOptions& o) {
    diurnal::DiurnalSchedule::Options so;
    so.method = m;
    so.window_days = o.window_days;
    so.fixed_cutoff = o.training_end;
    so.tz = o.tz;
    return diurnal::DiurnalSchedule::build({start, v}, so);
}

}  // namespace

VariantName parse_variant(const std::string& s) {
    const auto dash = s.find('-');
    const std::string head = s.substr(0, dash);
    VariantName out;
    bool found = false;
    for (int i = 0; i < 6; ++i)
        if (head == variant_names[i]) {
            out.variant = Variant(i);
            found = true;
        }
    if (!found) throw InvalidInput("unknown model variant '" + s + "'");
    if (dash != std::string::npos) out.method = diurnal::parse_method(s.substr(dash + 1));
    if (out.variant == Variant::PSS && out.method != Method::TRIG)
        throw InvalidInput("persistence takes no diurnal method: '" + s + "'");
    return out;
}

std::string to_string(Variant v) { return variant_names[int(v)]; }

std::string to_string(const VariantName& v) {
    std::string s = to_string(v.variant);
    if (v.method != Method::TRIG) s += "-" + diurnal::to_string(v.method);
    return s;
}

FeatureSpec FeatureSpec::full(const VariantName& v, std::size_t n_stations, std::size_t target, int horizon,
                              int max_lag) {
    FeatureSpec s;
    s.target = target;
    s.horizon = horizon;
    s.speed_lags.assign(n_stations, max_lag);
    s.direction_lags.assign(n_stations, max_lag);
    s.include_gw = has_gw(v.variant);
    s.gw_lags = s.include_gw ? max_lag : -1;
    s.include_gw_direction = has_gw_direction(v.variant);
    s.include_temp_diff = has_temp(v.variant);
    s.diurnal_method = v.method;
    return s;
}

void FeatureSpec::validate() const {
    std::vector<std::string> bad;
    if (speed_lags.empty()) bad.push_back("feature spec has no stations");
    if (direction_lags.size() != speed_lags.size())
        bad.push_back("direction lags given for " + std::to_string(direction_lags.size()) + " stations, speed lags for " +
                      std::to_string(speed_lags.size()));
    if (target >= speed_lags.size()) bad.push_back("target station index " + std::to_string(target) + " out of range");
    if (horizon < 1 || horizon > kMaxHorizon) bad.push_back("horizon " + std::to_string(horizon) + " outside 1..6");
    auto check = [&](int lag, const std::string& what) {
        if (lag < -1 || lag > kMaxLag) bad.push_back(what + " lag " + std::to_string(lag) + " outside 0..10");
    };
    for (std::size_t s = 0; s < speed_lags.size(); ++s) check(speed_lags[s], "speed");
    for (std::size_t s = 0; s < direction_lags.size(); ++s) check(direction_lags[s], "direction");
    check(gw_lags, "geostrophic wind");
    if (!bad.empty()) throw ConfigError(bad);
}

std::vector<Feature> layout(const FeatureSpec& spec) {
    std::vector<Feature> out{{Term::Intercept, 0, 0}};
    const std::size_t n = spec.n_stations();
    for (std::size_t s = 0; s < n; ++s)
        for (int j = 0; j <= spec.speed_lags[s]; ++j) out.push_back({Term::Speed, s, j});
    for (std::size_t s = 0; s < n; ++s)
        for (int j = 0; j <= spec.direction_lags[s]; ++j) {
            out.push_back({Term::DirCos, s, j});
            out.push_back({Term::DirSin, s, j});
        }
    if (spec.include_gw)
        for (int j = 0; j <= spec.gw_lags; ++j) out.push_back({Term::Gw, 0, j});
    if (spec.include_gw_direction) {
        out.push_back({Term::GwCos, 0, 0});
        out.push_back({Term::GwSin, 0, 0});
    }
    if (spec.include_temp_diff) out.push_back({Term::TempDiff, spec.target, 0});
    return out;
}

std::size_t row_length(const FeatureSpec& spec) { return layout(spec).size(); }

std::vector<std::string> feature_names(const FeatureSpec& spec, const std::vector<std::string>& ids) {
    std::vector<std::string> out;
    for (const auto& f : layout(spec)) {
        const std::string st = f.station < ids.size() ? ids[f.station] : std::to_string(f.station);
        const std::string lag = "[" + std::to_string(f.lag) + "]";
        switch (f.term) {
            case Term::Intercept: out.push_back("alpha0"); break;
            case Term::Speed: out.push_back("alpha[" + st + "]" + lag); break;
            case Term::DirCos: out.push_back("beta[" + st + "]" + lag); break;
            case Term::DirSin: out.push_back("gamma[" + st + "]" + lag); break;
            case Term::Gw: out.push_back("c" + lag); break;
            case Term::GwCos: out.push_back("delta_d_cos"); break;
            case Term::GwSin: out.push_back("delta_d_sin"); break;
            case Term::TempDiff: out.push_back("tau"); break;
        }
    }
    return out;
}

double ModelData::at(const std::vector<double>& v, UtcHour t) const {
    if (!contains(t) || v.empty()) return kMissing;
    return v[index(t)];
}

double ModelData::diurnal_value(std::size_t station, UtcHour issue, UtcHour when) const {
    return speed_diurnal[station].value(issue, when);
}

std::size_t ModelData::station_index(const std::string& id) const {
    for (std::size_t i = 0; i < station_ids.size(); ++i)
        if (station_ids[i] == id) return i;
    throw InvalidInput("station '" + id + "' is not among the model stations");
}

double volatility(std::span<const std::array<double, 3>> r) {
    if (r.empty()) return kMissing;
    double sum = 0.0;
    for (const auto& s : r) {
        const double d1 = s[2] - s[1], d0 = s[1] - s[0];
        sum += d1 * d1 + d0 * d0;
    }
    return std::sqrt(sum / (2.0 * double(r.size())));
}

ModelData prepare(const Network& net, const geostrophy::GeoWindSeries& geo, const std::vector<std::string>& stations,
                  const DataOptions& o) {
    if ((o.method == Method::SMD || o.method == Method::YMD) && o.training_end <= net.start)
        throw InvalidInput(diurnal::to_string(o.method) + " profiles need a training period inside the data");
    ModelData d;
    d.start = net.start;
    d.hours = net.hours;
    d.tz = o.tz;
    d.method = o.method;
    d.station_ids = stations;
    for (const auto& id : stations) {
        const auto& s = net.station(id);
        d.speed.push_back(s.speed);
        d.speed_diurnal.push_back(schedule_for(s.speed, net.start, o.method, o));
        d.speed_resid.push_back(residual_series(s.speed, net.start, d.speed_diurnal.back(), o.tz));
        std::vector<double> c(s.size(), kMissing), sn(s.size(), kMissing);
        for (std::size_t i = 0; i < s.size(); ++i)
            if (!is_missing(s.direction[i])) {
                c[i] = std::cos(s.direction[i]);
                sn[i] = std::sin(s.direction[i]);
            }
        d.cos_resid.push_back(residual_series(c, net.start, schedule_for(c, net.start, Method::TRIG, o), o.tz));
        d.sin_resid.push_back(residual_series(sn, net.start, schedule_for(sn, net.start, Method::TRIG, o), o.tz));
        d.temperature.push_back(s.temperature);
    }
    if (!geo.samples.empty()) {
        std::vector<double> w(net.hours, kMissing);
        d.gw_cos.assign(net.hours, kMissing);
        d.gw_sin.assign(net.hours, kMissing);
        for (std::size_t i = 0; i < net.hours; ++i) {
            const auto* g = geo.at(net.start + std::int64_t(i));
            if (!g || !g->valid()) continue;
            w[i] = g->w_g;
            d.gw_cos[i] = std::cos(g->theta_g);
            d.gw_sin[i] = std::sin(g->theta_g);
        }
        d.gw_resid = residual_series(w, net.start, schedule_for(w, net.start, o.method, o), o.tz);
    }
    d.volatility.assign(net.hours, kMissing);
    std::vector<std::array<double, 3>> r(stations.size());
    for (std::size_t i = 2; i < net.hours; ++i) {
        bool ok = true;
        for (std::size_t s = 0; s < stations.size() && ok; ++s) {
            r[s] = {d.speed_resid[s][i - 2], d.speed_resid[s][i - 1], d.speed_resid[s][i]};
            ok = !std::isnan(r[s][0] + r[s][1] + r[s][2]);
        }
        if (ok) d.volatility[i] = volatility(r);
    }
    return d;
}

namespace {

double feature_value(const ModelData& d, const FeatureSpec& spec, const Feature& f, UtcHour t) {
    switch (f.term) {
        case Term::Intercept: return 1.0;
        case Term::Speed: return d.at(d.speed_resid[f.station], t - f.lag);
        case Term::DirCos: return d.at(d.cos_resid[f.station], t - f.lag);
        case Term::DirSin: return d.at(d.sin_resid[f.station], t - f.lag);
        case Term::Gw: return d.at(d.gw_resid, t - f.lag);
        case Term::GwCos: return d.at(d.gw_cos, t);
        case Term::GwSin: return d.at(d.gw_sin, t);
        case Term::TempDiff:
            return d.at(d.temperature[spec.target], t) - d.at(d.temperature[spec.target], t - 24);
    }
    return kMissing;
}

}  // namespace

bool build_row(const ModelData& d, const FeatureSpec& spec, UtcHour t, std::span<double> out) {
    const auto lay = layout(spec);
    if (out.size() != lay.size()) throw InvalidInput("feature row buffer has the wrong length");
    bool ok = true;
    for (std::size_t j = 0; j < lay.size(); ++j) {
        out[j] = feature_value(d, spec, lay[j], t);
        ok = ok && !is_missing(out[j]);
    }
    return ok;
}

std::optional<std::vector<double>> build_row(const ModelData& d, const FeatureSpec& spec, UtcHour t) {
    std::vector<double> row(row_length(spec));
    if (!build_row(d, spec, t, row)) return std::nullopt;
    return row;
}

bool Design::trainable(std::size_t i) const {
    return features_ok[i] && !is_missing(observed[i]) && !is_missing(diurnal[i]);
}

Design build_design(const ModelData& d, const FeatureSpec& spec) {
    spec.validate();
    if (spec.n_stations() != d.station_ids.size())
        throw InvalidInput("feature spec and model data disagree on the number of stations");
    if (spec.include_gw && d.gw_resid.empty()) throw InvalidInput("geostrophic features requested without a geostrophic series");
    const auto lay = layout(spec);
    Design out;
    out.spec = spec;
    out.start = d.start;
    const auto n = d.hours;
    out.x.resize(Eigen::Index(n), Eigen::Index(lay.size()));
    out.features_ok.assign(n, 0);
    out.observed.assign(n, kMissing);
    out.diurnal.assign(n, kMissing);
    out.vol.assign(n, kMissing);
    for (std::size_t i = 0; i < n; ++i) {
        const UtcHour t = d.start + std::int64_t(i);
        bool ok = true;
        for (std::size_t j = 0; j < lay.size(); ++j) {
            const double v = feature_value(d, spec, lay[j], t);
            out.x(Eigen::Index(i), Eigen::Index(j)) = v;
            ok = ok && !is_missing(v);
        }
        out.vol[i] = d.volatility[i];
        out.features_ok[i] = ok && !is_missing(out.vol[i]);
        out.observed[i] = d.at(d.speed[spec.target], t + spec.horizon);
        out.diurnal[i] = d.diurnal_value(spec.target, t, t + spec.horizon);
    }
    return out;
}

std::vector<std::size_t> training_rows(const Design& d, UtcHour end, std::int64_t window_hours) {
    std::vector<std::size_t> rows;
    const std::int64_t k = d.spec.horizon;
    const std::int64_t hi = (end - d.start) - k;  // last issue index
    const std::int64_t lo = hi - window_hours + 1;
    for (std::int64_t i = std::max<std::int64_t>(lo, 0); i <= hi && i < std::int64_t(d.rows()); ++i)
        if (d.trainable(std::size_t(i))) rows.push_back(std::size_t(i));
    return rows;
}

// ---------------------------------------------------------------- BIC

namespace {

struct Family {
    std::string name;
    int max_lag;
    std::vector<std::vector<Eigen::Index>> cols;  // per lag
};

double subset_sse(const Eigen::MatrixXd& gram, const std::vector<Eigen::Index>& cols, Eigen::Index yi) {
    const auto p = Eigen::Index(cols.size());
    Eigen::MatrixXd g(p, p);
    Eigen::VectorXd c(p);
    for (Eigen::Index a = 0; a < p; ++a) {
        c(a) = gram(cols[std::size_t(a)], yi);
        for (Eigen::Index b = 0; b < p; ++b) g(a, b) = gram(cols[std::size_t(a)], cols[std::size_t(b)]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(g);
    qr.setThreshold(1e-10);
    const Eigen::VectorXd beta = qr.solve(c);
    return std::max(gram(yi, yi) - beta.dot(c), 0.0);
}

}  // namespace

BicResult select_lags_bic(const ModelData& data, const FeatureSpec& base, UtcHour from, UtcHour to, int max_lag) {
    FeatureSpec pool = base;
    pool.speed_lags.assign(data.station_ids.size(), max_lag);
    pool.direction_lags.assign(data.station_ids.size(), max_lag);
    if (pool.include_gw) pool.gw_lags = max_lag;
    const Design d = build_design(data, pool);
    const auto rows = training_rows(d, to, to - from);
    const auto p = d.x.cols();
    const auto n = Eigen::Index(rows.size());
    if (n < 10 * (p + 1))
        throw TrainingDataError("lag selection needs at least " + std::to_string(10 * (p + 1)) + " complete rows, found " +
                                std::to_string(n));

    // Standardized columns keep the Gram matrix well conditioned.
    Eigen::MatrixXd a(n, p + 1);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto i = rows[std::size_t(r)];
        a.row(r).head(p) = d.x.row(Eigen::Index(i));
        a(r, p) = d.observed[i] - d.diurnal[i];
    }
    for (Eigen::Index j = 1; j <= p; ++j) {
        const double m = a.col(j).mean();
        a.col(j).array() -= m;
        const double sd = std::sqrt(a.col(j).squaredNorm() / double(n));
        if (sd > 0) a.col(j) /= sd;
    }
    const Eigen::MatrixXd gram = a.transpose() * a;

    std::vector<Family> fams;
    const auto lay = layout(pool);
    auto cols_of = [&](Term t, std::size_t station, int lag) {
        for (std::size_t j = 0; j < lay.size(); ++j)
            if (lay[j].term == t && lay[j].station == station && lay[j].lag == lag) return Eigen::Index(j);
        throw std::logic_error("feature missing from the selection pool");
    };
    const auto& ids = data.station_ids;
    for (std::size_t s = 0; s < ids.size(); ++s) {
        Family f{"speed[" + ids[s] + "]", max_lag, {}};
        for (int j = 0; j <= max_lag; ++j) f.cols.push_back({cols_of(Term::Speed, s, j)});
        fams.push_back(std::move(f));
    }
    for (std::size_t s = 0; s < ids.size(); ++s) {
        Family f{"direction[" + ids[s] + "]", max_lag, {}};
        for (int j = 0; j <= max_lag; ++j) f.cols.push_back({cols_of(Term::DirCos, s, j), cols_of(Term::DirSin, s, j)});
        fams.push_back(std::move(f));
    }
    if (pool.include_gw) {
        Family f{"gw", max_lag, {}};
        for (int j = 0; j <= max_lag; ++j) f.cols.push_back({cols_of(Term::Gw, 0, j)});
        fams.push_back(std::move(f));
    }
    if (pool.include_gw_direction)
        fams.push_back({"gw_direction", 0, {{cols_of(Term::GwCos, 0, 0), cols_of(Term::GwSin, 0, 0)}}});
    if (pool.include_temp_diff) fams.push_back({"temp_diff", 0, {{cols_of(Term::TempDiff, pool.target, 0)}}});

    const double dn = double(n), logn = std::log(dn);
    auto bic = [&](const std::vector<Eigen::Index>& cols) {
        const double sse = std::max(subset_sse(gram, cols, p), 1e-300);
        return dn * std::log(sse / dn) + double(cols.size()) * logn;
    };

    std::vector<Eigen::Index> chosen{0};
    std::vector<int> cur(fams.size(), -1);
    BicResult out;
    out.rows = std::size_t(n);
    out.bic = bic(chosen);
    out.path.push_back({"alpha0", out.bic});
    for (;;) {
        double best = out.bic;
        std::size_t best_f = fams.size();
        for (std::size_t f = 0; f < fams.size(); ++f) {
            if (cur[f] >= fams[f].max_lag) continue;
            auto trial = chosen;
            for (auto c : fams[f].cols[std::size_t(cur[f] + 1)]) trial.push_back(c);
            const double b = bic(trial);
            if (b < best) {
                best = b;
                best_f = f;
            }
        }
        if (best_f == fams.size()) break;
        ++cur[best_f];
        for (auto c : fams[best_f].cols[std::size_t(cur[best_f])]) chosen.push_back(c);
        out.bic = best;
        out.path.push_back({fams[best_f].name + " lag " + std::to_string(cur[best_f]), best});
    }

    FeatureSpec sel = base;
    const std::size_t ns = ids.size();
    for (std::size_t s = 0; s < ns; ++s) {
        sel.speed_lags[s] = cur[s];
        sel.direction_lags[s] = cur[ns + s];
    }
    std::size_t f = 2 * ns;
    if (pool.include_gw) {
        sel.gw_lags = cur[f];
        sel.include_gw = cur[f] >= 0;
        ++f;
    } else {
        sel.gw_lags = -1;
    }
    if (pool.include_gw_direction) sel.include_gw_direction = cur[f++] >= 0;
    if (pool.include_temp_diff) sel.include_temp_diff = cur[f++] >= 0;
    out.spec = sel;
    return out;
}

// ---------------------------------------------------------------- CRPS fit

Coefficients least_squares_init(const Design& d, std::span<const std::size_t> rows) {
    const auto p = d.x.cols();
    const auto n = Eigen::Index(rows.size());
    if (n < p + 2) throw TrainingDataError("window has " + std::to_string(n) + " rows for " + std::to_string(p + 2) + " coefficients");
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n), v(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto i = rows[std::size_t(r)];
        x.row(r) = d.x.row(Eigen::Index(i));
        y(r) = d.observed[i] - d.diurnal[i];
        v(r) = d.vol[i];
    }
    if (!x.allFinite() || !y.allFinite() || !v.allFinite()) throw TrainingDataError("non-finite value in the training window");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd e = (y - x * beta).cwiseAbs();

    Eigen::MatrixXd z(n, 2);
    z.col(0).setOnes();
    z.col(1) = v;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qz(z);
    qz.setThreshold(1e-10);
    const Eigen::Vector2d c = qz.solve(e);
    // E|e| = sigma sqrt(2/pi) for a normal error.
    const double k = std::sqrt(std::numbers::pi / 2.0);
    const double mean_abs = e.mean();
    Coefficients out;
    out.center.assign(beta.data(), beta.data() + p);
    out.b0 = k * std::max(c(0), std::max(0.05 * mean_abs, 1e-6));
    out.b1 = k * std::max(c(1), 1e-3);
    return out;
}

double mean_crps(const Design& d, std::span<const std::size_t> rows, const Coefficients& c) {
    if (rows.empty()) return kMissing;
    const Eigen::Map<const Eigen::VectorXd> beta(c.center.data(), Eigen::Index(c.center.size()));
    double sum = 0.0;
    for (auto i : rows) {
        const double mu = d.diurnal[i] + d.x.row(Eigen::Index(i)).dot(beta);
        const double sigma = std::max(c.b0 + c.b1 * d.vol[i], kSigmaFloor);
        sum += predictive::crps_fast(mu, sigma, d.observed[i]);
    }
    return sum / double(rows.size());
}

FitResult fit_crps(const Design& d, std::span<const std::size_t> rows, const FitOptions& opt, const Coefficients* warm) {
    const auto p = d.x.cols();
    const auto n = Eigen::Index(rows.size());
    FitResult out;
    out.rows = rows.size();
    out.initial = least_squares_init(d, rows);

    // Centered, scaled columns; gamma_j = beta_j * sd_j and the intercept absorbs the means.
    Eigen::MatrixXd z(n, p);
    Eigen::VectorXd off(n), obs(n), vol(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto i = rows[std::size_t(r)];
        z.row(r) = d.x.row(Eigen::Index(i));
        off(r) = d.diurnal[i];
        obs(r) = d.observed[i];
        vol(r) = d.vol[i];
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p), sd = Eigen::VectorXd::Ones(p);
    for (Eigen::Index j = 1; j < p; ++j) {
        mean(j) = z.col(j).mean();
        z.col(j).array() -= mean(j);
        const double s = std::sqrt(z.col(j).squaredNorm() / double(n));
        if (s > 1e-12) {
            sd(j) = s;
            z.col(j) /= s;
        }
    }
    auto to_theta = [&](const Coefficients& c) {
        std::vector<double> th(std::size_t(p) + 2);
        double g0 = c.center[0];
        for (Eigen::Index j = 1; j < p; ++j) {
            th[std::size_t(j)] = c.center[std::size_t(j)] * sd(j);
            g0 += c.center[std::size_t(j)] * mean(j);
        }
        th[0] = g0;
        th[std::size_t(p)] = std::log(c.b0);
        th[std::size_t(p) + 1] = std::log(c.b1);
        return th;
    };
    auto from_theta = [&](const std::vector<double>& th) {
        Coefficients c;
        c.center.resize(std::size_t(p));
        double b0 = th[0];
        for (Eigen::Index j = 1; j < p; ++j) {
            c.center[std::size_t(j)] = th[std::size_t(j)] / sd(j);
            b0 -= th[std::size_t(j)] * mean(j) / sd(j);
        }
        c.center[0] = b0;
        c.b0 = std::exp(th[std::size_t(p)]);
        c.b1 = std::exp(th[std::size_t(p) + 1]);
        return c;
    };
    Eigen::VectorXd mu(n);
    auto objective = [&](const std::vector<double>& th) {
        const Eigen::Map<const Eigen::VectorXd> g(th.data(), p);
        mu.noalias() = z * g;
        const double b0 = std::exp(th[std::size_t(p)]), b1 = std::exp(th[std::size_t(p) + 1]);
        double sum = 0.0;
        for (Eigen::Index r = 0; r < n; ++r)
            sum += predictive::crps_fast(off(r) + mu(r), std::max(b0 + b1 * vol(r), kSigmaFloor), obs(r));
        return sum / double(n);
    };

    auto start = to_theta(out.initial);
    out.crps_initial = objective(start);
    if (warm && warm->center.size() == std::size_t(p) && warm->b0 > 0 && warm->b1 > 0) {
        const auto w = to_theta(*warm);
        if (objective(w) < out.crps_initial) start = w;
    }
    double sy = 0.0, my = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) my += obs(r) - off(r);
    my /= double(n);
    for (Eigen::Index r = 0; r < n; ++r) sy += (obs(r) - off(r) - my) * (obs(r) - off(r) - my);
    sy = std::max(std::sqrt(sy / double(n)), 1e-3);
    std::vector<double> step(start.size());
    for (std::size_t j = 0; j < std::size_t(p); ++j) step[j] = std::max(0.1 * std::abs(start[j]), 0.05 * sy);
    step[std::size_t(p)] = step[std::size_t(p) + 1] = 0.2;

    simplex::Options so;
    so.max_evals = opt.max_evals;
    so.ftol = opt.ftol;
    so.restarts = opt.restarts;
    so.seed = opt.seed;
    const auto res = simplex::minimize(objective, start, step, so);
    out.coefficients = from_theta(res.x);
    out.crps = res.f;
    out.evals = res.evals;
    out.converged = res.converged;
    out.trace = res.trace;
    return out;
}

std::optional<predictive::TruncatedNormal> predict_params(const TrainedModel& m, const Design& d, UtcHour t) {
    if (t < d.start || t - d.start >= std::int64_t(d.rows())) return std::nullopt;
    const auto i = std::size_t(t - d.start);
    if (!d.features_ok[i] || is_missing(d.diurnal[i])) return std::nullopt;
    const Eigen::Map<const Eigen::VectorXd> beta(m.coefficients.center.data(), Eigen::Index(m.coefficients.center.size()));
    const double mu = d.diurnal[i] + d.x.row(Eigen::Index(i)).dot(beta);
    const double sigma = std::max(m.coefficients.b0 + m.coefficients.b1 * d.vol[i], kSigmaFloor);
    return predictive::TruncatedNormal(mu, sigma);
}

std::optional<predictive::TruncatedNormal> predict_params(const TrainedModel& m, const ModelData& data, UtcHour t) {
    const auto row = build_row(data, m.spec, t);
    const double v = data.at(data.volatility, t);
    const double dv = data.diurnal_value(m.spec.target, t, t + m.spec.horizon);
    if (!row || is_missing(v) || is_missing(dv)) return std::nullopt;
    double mu = dv;
    for (std::size_t j = 0; j < row->size(); ++j) mu += (*row)[j] * m.coefficients.center[j];
    return predictive::TruncatedNormal(mu, std::max(m.coefficients.b0 + m.coefficients.b1 * v, kSigmaFloor));
}

// ---------------------------------------------------------------- bundle

namespace {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number(const json& j) { return j.is_null() ? kMissing : j.get<double>(); }

json to_json_value(const TrainedModel& m) {
    json spec{{"target", m.spec.target},
              {"horizon", m.spec.horizon},
              {"speed_lags", m.spec.speed_lags},
              {"direction_lags", m.spec.direction_lags},
              {"gw_lags", m.spec.gw_lags},
              {"include_gw", m.spec.include_gw},
              {"include_gw_direction", m.spec.include_gw_direction},
              {"include_temp_diff", m.spec.include_temp_diff},
              {"diurnal_method", diurnal::to_string(m.spec.diurnal_method)}};
    const auto names = feature_names(m.spec, m.station_ids);
    json values = json::array();
    for (double v : m.coefficients.center) values.push_back(number(v));
    json prof = json::object();
    for (std::size_t s = 0; s < m.station_ids.size() && s < m.diurnal.size(); ++s) {
        json a = json::array();
        for (double v : m.diurnal[s]) a.push_back(number(v));
        prof[m.station_ids[s]] = a;
    }
    return json{{"variant", to_string(m.variant)},
                {"stations", m.station_ids},
                {"spec", spec},
                {"feature_names", names},
                {"coefficients", {{"center", values}, {"b0", m.coefficients.b0}, {"b1", m.coefficients.b1}}},
                {"window", {{"start", to_iso8601(m.window_start)}, {"end", to_iso8601(m.window_end)}}},
                {"diurnal", prof},
                {"seed", m.seed},
                {"train_crps", number(m.train_crps)}};
}

UtcHour parse_time(const json& j) {
    const auto t = parse_iso8601_hour(j.get<std::string>());
    if (!t) throw LoadError("bad timestamp in model bundle: " + j.get<std::string>());
    return *t;
}

TrainedModel from_json_value(const json& j) {
    TrainedModel m;
    m.variant = parse_variant(j.at("variant").get<std::string>());
    m.station_ids = j.at("stations").get<std::vector<std::string>>();
    const auto& s = j.at("spec");
    m.spec.target = s.at("target").get<std::size_t>();
    m.spec.horizon = s.at("horizon").get<int>();
    m.spec.speed_lags = s.at("speed_lags").get<std::vector<int>>();
    m.spec.direction_lags = s.at("direction_lags").get<std::vector<int>>();
    m.spec.gw_lags = s.at("gw_lags").get<int>();
    m.spec.include_gw = s.at("include_gw").get<bool>();
    m.spec.include_gw_direction = s.at("include_gw_direction").get<bool>();
    m.spec.include_temp_diff = s.at("include_temp_diff").get<bool>();
    m.spec.diurnal_method = diurnal::parse_method(s.at("diurnal_method").get<std::string>());
    m.spec.validate();
    const auto& c = j.at("coefficients");
    for (const auto& v : c.at("center")) m.coefficients.center.push_back(number(v));
    if (m.coefficients.center.size() != row_length(m.spec))
        throw LoadError("model bundle coefficient count does not match its feature spec");
    m.coefficients.b0 = c.at("b0").get<double>();
    m.coefficients.b1 = c.at("b1").get<double>();
    m.window_start = parse_time(j.at("window").at("start"));
    m.window_end = parse_time(j.at("window").at("end"));
    for (const auto& id : m.station_ids) {
        std::array<double, 24> a{};
        a.fill(kMissing);
        if (j.at("diurnal").contains(id)) {
            const auto& arr = j.at("diurnal").at(id);
            for (std::size_t h = 0; h < 24 && h < arr.size(); ++h) a[h] = number(arr[h]);
        }
        m.diurnal.push_back(a);
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.train_crps = number(j.at("train_crps"));
    return m;
}

}  // namespace

std::string to_json(const TrainedModel& m) { return to_json_value(m).dump(2); }

TrainedModel model_from_json(const std::string& text) {
    try {
        return from_json_value(json::parse(text));
    } catch (const json::exception& e) {
        throw LoadError(std::string("malformed model: ") + e.what());
    }
}

void save_bundle(const std::vector<TrainedModel>& models, const std::string& path) {
    json arr = json::array();
    for (const auto& m : models) arr.push_back(to_json_value(m));
    const json doc{{"format", "gwf-model-bundle"}, {"format_version", 1}, {"library_version", kVersion}, {"models", arr}};
    csv::write_atomic(path, doc.dump(2) + "\n");
}

std::vector<TrainedModel> load_bundle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open model bundle " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        const auto doc = json::parse(ss.str());
        if (doc.value("format", "") != "gwf-model-bundle") throw LoadError(path + " is not a model bundle");
        if (doc.value("format_version", 0) != 1) throw LoadError(path + ": unsupported bundle version");
        std::vector<TrainedModel> out;
        for (const auto& m : doc.at("models")) out.push_back(from_json_value(m));
        return out;
    } catch (const json::exception& e) {
        throw LoadError(path + ": malformed model bundle: " + e.what());
    }
}

}  // namespace gwf::model

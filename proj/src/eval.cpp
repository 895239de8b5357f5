#include "gwf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>

#include "gwf/csv.hpp"
#include "gwf/errors.hpp"

namespace gwf::eval {

namespace {

double nan() { return kMissing; }

std::string month_key(UtcHour t, TimeZone tz) {
    const auto c = civil_from_seconds((t.index + tz.utc_offset_hours) * 3600);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", c.year, c.month);
    return buf;
}

std::string fmt(double v) { return csv::format_double(v); }

std::string fixed(double v, int width) {
    char buf[32];
    if (is_missing(v))
        std::snprintf(buf, sizeof buf, "%*s", width, "NA");
    else
        std::snprintf(buf, sizeof buf, "%*.2f", width, v);
    return buf;
}

}  // namespace

void Scores::add(double error, double c, std::optional<double> width) {
    ++n;
    sum_abs += std::abs(error);
    sum_sq += error * error;
    sum_crps += c;
    if (width) {
        ++n_prob;
        sum_width += *width;
    }
}

Scores& Scores::operator+=(const Scores& o) {
    n += o.n;
    n_prob += o.n_prob;
    sum_abs += o.sum_abs;
    sum_sq += o.sum_sq;
    sum_crps += o.sum_crps;
    sum_width += o.sum_width;
    return *this;
}

double Scores::mae() const { return n ? sum_abs / double(n) : nan(); }
double Scores::rmse() const { return n ? std::sqrt(sum_sq / double(n)) : nan(); }
double Scores::crps() const { return n ? sum_crps / double(n) : nan(); }
double Scores::width90() const { return n_prob ? sum_width / double(n_prob) : nan(); }

const Cell* ScoreReport::find(const std::string& station, const std::string& variant, int horizon) const {
    for (const auto& c : cells)
        if (c.station == station && c.variant == variant && c.horizon == horizon) return &c;
    return nullptr;
}

void ScoreReport::merge(const ScoreReport& other) {
    for (const auto& c : other.cells) {
        if (find(c.station, c.variant, c.horizon))
            throw InvalidInput("duplicate score cell " + c.station + "/" + c.variant + "/" + std::to_string(c.horizon));
        cells.push_back(c);
    }
}

std::size_t pit_bin(double u, int bins) {
    const auto b = std::size_t(std::clamp(u, 0.0, 1.0) * bins);
    return std::min(b, std::size_t(bins - 1));
}

ScoreReport score(const std::vector<forecast::ForecastRecord>& records, const std::string& variant,
                  const ScoreOptions& o) {
    if (o.pit_bins < 1) throw InvalidInput("pit_bins must be positive");
    ScoreReport rep;
    rep.include_fallbacks = o.include_fallbacks;
    std::size_t scored = 0;
    for (const auto& r : records) {
        if (!r.available() || is_missing(r.observed)) continue;
        if (r.fallback && !o.include_fallbacks) continue;
        auto it = std::find_if(rep.cells.begin(), rep.cells.end(),
                               [&](const Cell& c) { return c.station == r.station && c.horizon == r.horizon; });
        if (it == rep.cells.end()) it = rep.cells.insert(it, Cell{r.station, variant, r.horizon, {}, {}, {}});
        Cell* cell = &*it;
        const double err = r.observed - r.point;
        double c = std::abs(err);
        std::optional<double> width;
        if (r.distribution) {
            const auto& d = *r.distribution;
            c = predictive::crps_fast(d.mu(), d.sigma(), r.observed);
            const auto [lo, hi] = d.central_interval(0.9);
            width = hi - lo;
            if (cell->pit.empty()) cell->pit.assign(std::size_t(o.pit_bins), 0);
            ++cell->pit[pit_bin(d.cdf(r.observed), o.pit_bins)];
        }
        cell->monthly[month_key(r.issue_time + r.horizon, o.tz)].add(err, c, width);
        ++scored;
    }
    if (scored == 0) throw EmptyReport("no forecast record of " + variant + " has both a forecast and an observation");
    for (auto& c : rep.cells)
        for (const auto& [_, s] : c.monthly) c.overall += s;
    return rep;
}

std::optional<double> relative_reduction(double baseline, double model) {
    if (is_missing(baseline) || is_missing(model) || baseline == 0.0) return std::nullopt;
    return 100.0 * (baseline - model) / baseline;
}

std::string to_string(Metric m) {
    switch (m) {
        case Metric::MAE: return "MAE";
        case Metric::RMSE: return "RMSE";
        case Metric::CRPS: return "CRPS";
        case Metric::Width90: return "width90";
    }
    return "?";
}

double value(const Scores& s, Metric m) {
    switch (m) {
        case Metric::MAE: return s.mae();
        case Metric::RMSE: return s.rmse();
        case Metric::CRPS: return s.crps();
        case Metric::Width90: return s.width90();
    }
    return nan();
}

std::vector<Reduction> relative_reductions(const ScoreReport& report, const std::string& baseline, Metric metric) {
    std::vector<Reduction> out;
    for (const auto& c : report.cells) {
        if (c.variant == baseline) continue;
        const auto* b = report.find(c.station, baseline, c.horizon);
        if (!b) throw InvalidInput("no " + baseline + " cell for " + c.station + " at horizon " + std::to_string(c.horizon));
        for (const auto& [month, s] : c.monthly) {
            const auto it = b->monthly.find(month);
            out.push_back({c.station, c.horizon, c.variant, baseline, metric, month,
                           it == b->monthly.end() ? std::nullopt
                                                   : relative_reduction(value(it->second, metric), value(s, metric))});
        }
        out.push_back({c.station, c.horizon, c.variant, baseline, metric, "overall",
                       relative_reduction(value(b->overall, metric), value(c.overall, metric))});
    }
    return out;
}

PitTest pit_chi_square(const std::vector<std::size_t>& counts) {
    if (counts.size() < 2) throw InvalidInput("a PIT histogram needs at least two bins");
    PitTest t;
    for (auto c : counts) t.n += c;
    if (t.n == 0) throw EmptyReport("empty PIT histogram");
    const double expected = double(t.n) / double(counts.size());
    for (auto c : counts) t.statistic += (double(c) - expected) * (double(c) - expected) / expected;
    const boost::math::chi_squared dist(double(counts.size() - 1));
    t.p_value = boost::math::cdf(boost::math::complement(dist, t.statistic));
    return t;
}

std::vector<Correlation> lag_correlations(const Network& net, const geostrophy::GeoWindSeries& geo,
                                          const std::string& target, const std::vector<int>& horizons, int max_lag) {
    if (max_lag < 0) throw InvalidInput("max_lag must be >= 0");
    const auto& y = net.station(target).speed;
    std::vector<std::pair<std::string, std::vector<double>>> vars;
    for (const auto& s : net.stations) {
        std::vector<double> c(s.size(), kMissing), sn(s.size(), kMissing);
        for (std::size_t i = 0; i < s.size(); ++i)
            if (!is_missing(s.direction[i])) {
                c[i] = std::cos(s.direction[i]);
                sn[i] = std::sin(s.direction[i]);
            }
        vars.push_back({"speed[" + s.meta.id + "]", s.speed});
        vars.push_back({"cos_dir[" + s.meta.id + "]", std::move(c)});
        vars.push_back({"sin_dir[" + s.meta.id + "]", std::move(sn)});
    }
    if (!geo.samples.empty()) {
        std::vector<double> w(net.hours, kMissing), c(net.hours, kMissing), sn(net.hours, kMissing);
        for (std::size_t i = 0; i < net.hours; ++i)
            if (const auto* g = geo.at(net.start + std::int64_t(i)); g && g->valid()) {
                w[i] = g->w_g;
                c[i] = std::cos(g->theta_g);
                sn[i] = std::sin(g->theta_g);
            }
        vars.push_back({"w_g", std::move(w)});
        vars.push_back({"cos_theta_g", std::move(c)});
        vars.push_back({"sin_theta_g", std::move(sn)});
    }

    std::vector<Correlation> out;
    const auto n = std::int64_t(net.hours);
    for (const auto& [name, x] : vars)
        for (int k : horizons)
            for (int lag = 0; lag <= max_lag; ++lag) {
                double sx = 0, sy = 0;
                std::size_t m = 0;
                auto each = [&](auto&& f) {
                    for (std::int64_t t = lag; t + k < n; ++t) {
                        if (t + k < 0) continue;
                        const double a = x[std::size_t(t - lag)], b = y[std::size_t(t + k)];
                        if (!is_missing(a) && !is_missing(b)) f(a, b);
                    }
                };
                each([&](double a, double b) {
                    sx += a;
                    sy += b;
                    ++m;
                });
                Correlation c{name, k, lag, kMissing, m};
                if (m >= 30) {
                    const double mx = sx / double(m), my = sy / double(m);
                    double sxy = 0, sxx = 0, syy = 0;
                    each([&](double a, double b) {
                        sxy += (a - mx) * (b - my);
                        sxx += (a - mx) * (a - mx);
                        syy += (b - my) * (b - my);
                    });
                    if (sxx > 0 && syy > 0) c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
                }
                out.push_back(std::move(c));
            }
    return out;
}

std::string scores_csv(const ScoreReport& rep) {
    std::string s = "station,variant,horizon,period,n,n_prob,mae,rmse,crps,width90,fallbacks\n";
    const std::string fb = rep.include_fallbacks ? "included" : "excluded";
    auto row = [&](const Cell& c, const std::string& period, const Scores& sc) {
        s += csv::join({c.station, c.variant, std::to_string(c.horizon), period, std::to_string(sc.n),
                        std::to_string(sc.n_prob), fmt(sc.mae()), fmt(sc.rmse()), fmt(sc.crps()), fmt(sc.width90()),
                        fb}) +
             "\n";
    };
    for (const auto& c : rep.cells) {
        for (const auto& [m, sc] : c.monthly) row(c, m, sc);
        row(c, "overall", c.overall);
    }
    return s;
}

std::string pit_csv(const ScoreReport& rep) {
    std::string s = "station,variant,horizon,bin_lo,bin_hi,count\n";
    for (const auto& c : rep.cells) {
        const auto b = c.pit.size();
        for (std::size_t i = 0; i < b; ++i)
            s += csv::join({c.station, c.variant, std::to_string(c.horizon), fmt(double(i) / double(b)),
                            fmt(double(i + 1) / double(b)), std::to_string(c.pit[i])}) +
                 "\n";
    }
    return s;
}

std::string reductions_csv(const std::vector<Reduction>& rows) {
    std::string s = "station,horizon,variant,baseline,metric,period,percent\n";
    for (const auto& r : rows)
        s += csv::join({r.station, std::to_string(r.horizon), r.variant, r.baseline, to_string(r.metric), r.period,
                        fmt(r.percent.value_or(kMissing))}) +
             "\n";
    return s;
}

std::string correlations_csv(const std::vector<Correlation>& rows) {
    std::string s = "variable,horizon,lag,r,pairs\n";
    for (const auto& c : rows)
        s += csv::join({c.variable, std::to_string(c.horizon), std::to_string(c.lag), fmt(c.r),
                        std::to_string(c.pairs)}) +
             "\n";
    return s;
}

std::string text_table(const ScoreReport& rep) {
    std::string out;
    std::vector<std::pair<std::string, int>> blocks;
    for (const auto& c : rep.cells)
        if (std::find(blocks.begin(), blocks.end(), std::pair{c.station, c.horizon}) == blocks.end())
            blocks.push_back({c.station, c.horizon});
    for (const auto& [station, k] : blocks) {
        std::set<std::string> months;
        std::size_t name_w = 8;
        for (const auto& c : rep.cells)
            if (c.station == station && c.horizon == k) {
                for (const auto& [m, _] : c.monthly) months.insert(m);
                name_w = std::max(name_w, c.variant.size() + 2);
            }
        out += station + ", " + std::to_string(k) + "-hour-ahead forecasts (m/s)\n";
        std::string head = std::string(6 + name_w, ' ');
        for (const auto& m : months) head += std::string(9 - m.size(), ' ') + m;
        head += "  Overall\n";
        out += head;
        for (auto metric : {Metric::MAE, Metric::RMSE, Metric::CRPS}) {
            bool first = true;
            for (const auto& c : rep.cells) {
                if (c.station != station || c.horizon != k) continue;
                std::string line = first ? to_string(metric) : "";
                first = false;
                line.resize(6, ' ');
                line += c.variant;
                line.resize(6 + name_w, ' ');
                for (const auto& m : months) {
                    const auto it = c.monthly.find(m);
                    line += fixed(it == c.monthly.end() ? kMissing : value(it->second, metric), 9);
                }
                line += fixed(value(c.overall, metric), 9) + "\n";
                out += line;
            }
        }
        out += "\n";
    }
    return out;
}

}  // namespace gwf::eval

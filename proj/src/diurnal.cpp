#include "gwf/diurnal.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "gwf/csv.hpp"
#include "gwf/errors.hpp"
#include "gwf/station.hpp"

namespace gwf::diurnal {
namespace {

std::array<double, 5> trig_basis(int hour) {
    const double w = 2.0 * std::numbers::pi * double(hour) / 24.0;
    return {1.0, std::sin(w), std::cos(w), std::sin(2 * w), std::cos(2 * w)};
}

EmpiricalDiurnal from_buckets(const HourBuckets& b, Method m, std::string descriptor) {
    EmpiricalDiurnal out;
    out.method = m;
    out.window_descriptor = std::move(descriptor);
    for (int h = 0; h < 24; ++h) {
        if (b.count[std::size_t(h)] == 0)
            throw InsufficientData("no observations at hour " + std::to_string(h) + " in the " +
                                       out.window_descriptor + " window",
                                   h);
        out.hourly_mean[std::size_t(h)] = b.sum[std::size_t(h)] / double(b.count[std::size_t(h)]);
    }
    return out;
}

}  // namespace

Method parse_method(const std::string& s) {
    if (s == "TRIG") return Method::TRIG;
    if (s == "MD") return Method::MD;
    if (s == "SMD") return Method::SMD;
    if (s == "YMD") return Method::YMD;
    throw InvalidInput("unknown diurnal method '" + s + "' (TRIG|MD|SMD|YMD)");
}

std::string to_string(Method m) {
    switch (m) {
        case Method::TRIG: return "TRIG";
        case Method::MD: return "MD";
        case Method::SMD: return "SMD";
        case Method::YMD: return "YMD";
    }
    return "?";
}

double TrigDiurnal::evaluate(int hour_of_day) const {
    const auto b = trig_basis(hour_of_day);
    double v = 0;
    for (std::size_t i = 0; i < 5; ++i) v += d[i] * b[i];
    return v;
}

double evaluate(const DiurnalProfile& p, int hour_of_day) {
    return std::visit([&](const auto& x) { return x.evaluate(hour_of_day); }, p);
}

double evaluate(const DiurnalProfile& p, UtcHour t, TimeZone tz) { return evaluate(p, hour_of_day(t, tz)); }

std::array<double, 24> tabulate(const DiurnalProfile& p) {
    std::array<double, 24> out{};
    for (int h = 0; h < 24; ++h) out[std::size_t(h)] = evaluate(p, h);
    return out;
}

void write_profile_csv(const DiurnalProfile& p, const std::string& path) {
    std::string out = "hour,value\n";
    const auto v = tabulate(p);
    for (int h = 0; h < 24; ++h) out += std::to_string(h) + "," + csv::format_double(v[std::size_t(h)]) + "\n";
    csv::write_atomic(path, out);
}

HourBuckets& HourBuckets::operator+=(const HourBuckets& o) {
    for (std::size_t h = 0; h < 24; ++h) {
        sum[h] += o.sum[h];
        count[h] += o.count[h];
    }
    return *this;
}

HourBuckets& HourBuckets::operator-=(const HourBuckets& o) {
    for (std::size_t h = 0; h < 24; ++h) {
        sum[h] -= o.sum[h];
        count[h] -= o.count[h];
    }
    return *this;
}

std::size_t HourBuckets::distinct_hours() const {
    std::size_t n = 0;
    for (auto c : count) n += c > 0;
    return n;
}

TrigDiurnal fit_trig(const HourBuckets& buckets) {
    if (buckets.distinct_hours() < 5)
        throw RankDeficient("trigonometric diurnal fit needs at least 5 distinct hours of day");
    // Regressors depend only on the hour, so least squares over the raw
    // samples equals count-weighted least squares over the hourly means.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(24, 5);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(24);
    for (int h = 0; h < 24; ++h) {
        const auto n = buckets.count[std::size_t(h)];
        if (n == 0) continue;
        const double w = std::sqrt(double(n));
        const auto b = trig_basis(h);
        for (int j = 0; j < 5; ++j) a(h, j) = w * b[std::size_t(j)];
        m(h) = w * buckets.sum[std::size_t(h)] / double(n);
    }
    const Eigen::VectorXd d = a.colPivHouseholderQr().solve(m);
    TrigDiurnal out;
    for (int j = 0; j < 5; ++j) out.d[std::size_t(j)] = d(j);
    return out;
}

TrigDiurnal fit_trig(HourlyValues series, TimeZone tz) {
    HourBuckets b;
    for (std::size_t i = 0; i < series.values.size(); ++i)
        if (!is_missing(series.values[i])) b.add(hour_of_day(series.time_at(i), tz), series.values[i]);
    return fit_trig(b);
}

EmpiricalDiurnal fit_empirical(HourlyValues series, Method method, UtcHour issue_time, TimeZone tz,
                               EmpiricalOptions options) {
    if (method == Method::SMD) return fit_seasonal(series, local_season(issue_time, tz), issue_time, tz);
    if (method != Method::MD && method != Method::YMD)
        throw InvalidInput("fit_empirical takes MD, SMD or YMD");
    const UtcHour lo = method == Method::MD ? issue_time - std::int64_t(options.window_days) * 24
                                            : UtcHour{INT64_MIN / 2};
    HourBuckets b;
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const UtcHour t = series.time_at(i);
        if (t < lo || t >= issue_time || is_missing(series.values[i])) continue;
        b.add(hour_of_day(t, tz), series.values[i]);
    }
    const std::string desc = method == Method::MD
                                 ? std::to_string(options.window_days) + "-day trailing before " + to_iso8601(issue_time)
                                 : "all data before " + to_iso8601(issue_time);
    return from_buckets(b, method, desc);
}

EmpiricalDiurnal fit_seasonal(HourlyValues series, Season season, UtcHour issue_time, TimeZone tz) {
    HourBuckets b;
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const UtcHour t = series.time_at(i);
        if (t >= issue_time || is_missing(series.values[i]) || local_season(t, tz) != season) continue;
        b.add(hour_of_day(t, tz), series.values[i]);
    }
    return from_buckets(b, Method::SMD,
                        std::string(season_name(season)) + " data before " + to_iso8601(issue_time));
}

ResidualSeries residualize(HourlyValues series, const DiurnalProfile& profile, TimeZone tz) {
    ResidualSeries out{series.start, {}, profile, tz};
    out.values.resize(series.values.size());
    for (std::size_t i = 0; i < series.values.size(); ++i)
        out.values[i] = series.values[i] - evaluate(profile, series.time_at(i), tz);
    return out;
}

std::vector<double> restore(const ResidualSeries& r) {
    std::vector<double> out(r.values.size());
    for (std::size_t i = 0; i < r.values.size(); ++i)
        out[i] = r.values[i] + evaluate(r.diurnal_used, r.start + std::int64_t(i), r.tz);
    return out;
}

DiurnalSchedule DiurnalSchedule::build(HourlyValues series, const Options& opt) {
    DiurnalSchedule s;
    s.method_ = opt.method;
    s.tz_ = opt.tz;
    if (series.values.empty()) return s;
    const std::int64_t first = local_day(series.start, opt.tz);
    const std::int64_t last = local_day(series.time_at(series.values.size() - 1), opt.tz);
    s.first_day_ = first;
    const auto ndays = std::size_t(last - first + 1);
    s.days_.resize(ndays);

    if (opt.method == Method::TRIG || opt.method == Method::MD) {
        std::vector<HourBuckets> daily(ndays);
        for (std::size_t i = 0; i < series.values.size(); ++i) {
            if (is_missing(series.values[i])) continue;
            const UtcHour t = series.time_at(i);
            daily[std::size_t(local_day(t, opt.tz) - first)].add(hour_of_day(t, opt.tz), series.values[i]);
        }
        const auto w = std::size_t(opt.window_days);
        for (std::size_t d = w; d < ndays; ++d) {
            HourBuckets b;
            for (std::size_t k = d - w; k < d; ++k) b += daily[k];
            try {
                if (opt.method == Method::TRIG)
                    s.days_[d] = tabulate(fit_trig(b));
                else
                    s.days_[d] = from_buckets(b, Method::MD, "rolling").hourly_mean;
            } catch (const InsufficientData&) {
            } catch (const RankDeficient&) {
            }
        }
        return s;
    }

    std::array<std::optional<std::array<double, 24>>, 4> seasonal;
    std::optional<std::array<double, 24>> yearly;
    if (opt.method == Method::YMD) {
        try {
            yearly = fit_empirical(series, Method::YMD, opt.fixed_cutoff, opt.tz).hourly_mean;
        } catch (const InsufficientData&) {
        }
    } else {
        for (int k = 0; k < 4; ++k) {
            try {
                seasonal[std::size_t(k)] = fit_seasonal(series, Season(k), opt.fixed_cutoff, opt.tz).hourly_mean;
            } catch (const InsufficientData&) {
            }
        }
    }
    for (std::size_t d = 0; d < ndays; ++d) {
        const UtcHour start = local_day_start(first + std::int64_t(d), opt.tz);
        s.days_[d] = opt.method == Method::YMD ? yearly : seasonal[std::size_t(local_season(start, opt.tz))];
    }
    return s;
}

const std::array<double, 24>* DiurnalSchedule::profile_on(UtcHour t) const {
    const std::int64_t d = local_day(t, tz_) - first_day_;
    if (d < 0 || d >= std::int64_t(days_.size()) || !days_[std::size_t(d)]) return nullptr;
    return &*days_[std::size_t(d)];
}

double DiurnalSchedule::value(UtcHour issue, UtcHour when) const {
    const auto* p = profile_on(issue);
    if (!p) return kMissing;
    return (*p)[std::size_t(hour_of_day(when, tz_))];
}

}  // namespace gwf::diurnal

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gwf/time.hpp"

namespace gwf::diurnal {

enum class Method { TRIG, MD, SMD, YMD };

Method parse_method(const std::string& s);
std::string to_string(Method m);

/// Values on a contiguous hourly grid starting at `start`; NaN marks missing.
struct HourlyValues {
    UtcHour start{};
    std::span<const double> values;

    UtcHour time_at(std::size_t i) const { return start + std::int64_t(i); }
};

/// d0 + d1 sin(2 pi h/24) + d2 cos(2 pi h/24) + d3 sin(4 pi h/24) + d4 cos(4 pi h/24)
struct TrigDiurnal {
    std::array<double, 5> d{};

    double evaluate(int hour_of_day) const;
};

/// Per-hour-of-day means over a window.
struct EmpiricalDiurnal {
    std::array<double, 24> hourly_mean{};
    Method method = Method::MD;
    std::string window_descriptor;

    double evaluate(int hour_of_day) const { return hourly_mean[std::size_t(hour_of_day)]; }
};

using DiurnalProfile = std::variant<TrigDiurnal, EmpiricalDiurnal>;

double evaluate(const DiurnalProfile& p, int hour_of_day);
double evaluate(const DiurnalProfile& p, UtcHour t, TimeZone tz);
std::array<double, 24> tabulate(const DiurnalProfile& p);

/// Two columns, hour and value, one row per hour of day.
void write_profile_csv(const DiurnalProfile& p, const std::string& path);

/// Running per-hour sums; the sufficient statistics of both fits.
struct HourBuckets {
    std::array<double, 24> sum{};
    std::array<std::size_t, 24> count{};

    void add(int hour, double v) {
        sum[std::size_t(hour)] += v;
        ++count[std::size_t(hour)];
    }
    HourBuckets& operator+=(const HourBuckets& o);
    HourBuckets& operator-=(const HourBuckets& o);
    std::size_t distinct_hours() const;
};

/// Least-squares fit of the two-harmonic daily cycle. Needs at least five
/// distinct hours of day; throws RankDeficient otherwise.
TrigDiurnal fit_trig(HourlyValues series, TimeZone tz = {});
TrigDiurnal fit_trig(const HourBuckets& buckets);

struct EmpiricalOptions {
    int window_days = 45;  // MD trailing window
};

/// Hour-of-day means over the method's window, using only observations
/// strictly before `issue_time`:
///   MD  - the trailing `window_days` days,
///   SMD - every earlier observation in the issue time's season (DJF/MAM/JJA/SON),
///   YMD - every earlier observation.
/// Throws InsufficientData naming the first empty hour bucket.
EmpiricalDiurnal fit_empirical(HourlyValues series, Method method, UtcHour issue_time,
                               TimeZone tz = {}, EmpiricalOptions options = {});

/// SMD profile of one season from observations before `issue_time`.
EmpiricalDiurnal fit_seasonal(HourlyValues series, Season season, UtcHour issue_time, TimeZone tz = {});

struct ResidualSeries {
    UtcHour start{};
    std::vector<double> values;
    DiurnalProfile diurnal_used;
    TimeZone tz{};
};

ResidualSeries residualize(HourlyValues series, const DiurnalProfile& profile, TimeZone tz = {});
std::vector<double> restore(const ResidualSeries& residual);

/// The diurnal profile in force on each local calendar day. Profiles for a
/// day are built only from data before that day's local midnight (rolling
/// methods) or before `fixed_cutoff` (SMD, YMD).
class DiurnalSchedule {
public:
    struct Options {
        Method method = Method::MD;
        int window_days = 45;
        UtcHour fixed_cutoff{};  // end of the record used by SMD/YMD
        TimeZone tz{};
    };

    static DiurnalSchedule build(HourlyValues series, const Options& options);

    /// Profile used on the local day containing t, if one could be built.
    const std::array<double, 24>* profile_on(UtcHour t) const;

    /// Profile of `issue`'s day evaluated at the hour of day of `when`; NaN if absent.
    double value(UtcHour issue, UtcHour when) const;

    TimeZone tz() const { return tz_; }
    Method method() const { return method_; }

private:
    Method method_ = Method::MD;
    TimeZone tz_{};
    std::int64_t first_day_ = 0;
    std::vector<std::optional<std::array<double, 24>>> days_;
};

}  // namespace gwf::diurnal

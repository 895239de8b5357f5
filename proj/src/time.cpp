#include "gwf/time.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>

namespace gwf {
namespace {

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    return a / b - ((a % b != 0) && ((a < 0) != (b < 0)));
}

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

}  // namespace

CivilTime civil_from_seconds(std::int64_t seconds) {
    using namespace std::chrono;
    const std::int64_t days = floor_div(seconds, 86400);
    const std::int64_t rem = seconds - days * 86400;
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    return {int(ymd.year()), int(unsigned(ymd.month())), int(unsigned(ymd.day())),
            int(rem / 3600), int((rem % 3600) / 60), int(rem % 60)};
}

std::int64_t seconds_from_civil(const CivilTime& c) {
    using namespace std::chrono;
    const year_month_day ymd{year{c.year}, month{unsigned(c.month)}, day{unsigned(c.day)}};
    const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
    return days * 86400 + c.hour * 3600 + c.minute * 60 + c.second;
}

std::optional<std::int64_t> parse_iso8601_seconds(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.remove_suffix(1);

    CivilTime c{};
    if (!read_int(s, 0, 4, c.year) || s.size() < 16 || s[4] != '-' || !read_int(s, 5, 2, c.month) ||
        s[7] != '-' || !read_int(s, 8, 2, c.day) || (s[10] != 'T' && s[10] != ' ') ||
        !read_int(s, 11, 2, c.hour) || s[13] != ':' || !read_int(s, 14, 2, c.minute))
        return std::nullopt;
    if (s.size() == 16) {
        c.second = 0;
    } else if (s.size() == 19 && s[16] == ':' && read_int(s, 17, 2, c.second)) {
    } else {
        return std::nullopt;
    }
    if (c.month < 1 || c.month > 12 || c.hour > 23 || c.minute > 59 || c.second > 60) return std::nullopt;
    using namespace std::chrono;
    const year_month_day ymd{year{c.year}, month{unsigned(c.month)}, day{unsigned(c.day)}};
    if (!ymd.ok()) return std::nullopt;
    return seconds_from_civil(c);
}

std::optional<UtcHour> parse_iso8601_hour(std::string_view text) {
    const auto s = parse_iso8601_seconds(text);
    if (!s) return std::nullopt;
    return UtcHour{floor_div(*s, 3600)};
}

std::string to_iso8601(UtcHour h) {
    const CivilTime c = civil_from_seconds(h.index * 3600);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:00:00Z", c.year, c.month, c.day, c.hour);
    return buf;
}

UtcHour hour_from_civil(int year, int month, int day, int hour) {
    return UtcHour{seconds_from_civil({year, month, day, hour, 0, 0}) / 3600};
}

int hour_of_day(UtcHour t, TimeZone tz) {
    const std::int64_t local = t.index + tz.utc_offset_hours;
    return int(local - floor_div(local, 24) * 24);
}

std::int64_t local_day(UtcHour t, TimeZone tz) {
    return floor_div(t.index + tz.utc_offset_hours, 24);
}

UtcHour local_day_start(std::int64_t day, TimeZone tz) {
    return UtcHour{day * 24 - tz.utc_offset_hours};
}

int local_month(UtcHour t, TimeZone tz) {
    return civil_from_seconds((t.index + tz.utc_offset_hours) * 3600).month;
}

Season season_of_month(int month) {
    switch (month) {
        case 12: case 1: case 2: return Season::DJF;
        case 3: case 4: case 5: return Season::MAM;
        case 6: case 7: case 8: return Season::JJA;
        default: return Season::SON;
    }
}

Season local_season(UtcHour t, TimeZone tz) { return season_of_month(local_month(t, tz)); }

std::string_view season_name(Season s) {
    switch (s) {
        case Season::DJF: return "DJF";
        case Season::MAM: return "MAM";
        case Season::JJA: return "JJA";
        case Season::SON: return "SON";
    }
    return "?";
}

}  // namespace gwf

#include "gwf/station.hpp"

#include <algorithm>
#include <numbers>

#include "gwf/errors.hpp"

namespace gwf {

void StationMeta::validate() const {
    if (!(std::abs(latitude) <= 90.0))
        throw InvalidInput("station " + id + ": latitude out of range");
    if (!(std::abs(longitude) <= 180.0))
        throw InvalidInput("station " + id + ": longitude out of range");
    if (!std::isfinite(elevation))
        throw InvalidInput("station " + id + ": elevation is not finite");
}

std::optional<std::size_t> StationSeries::index_of(UtcHour t) const {
    const std::int64_t i = t - start;
    if (i < 0 || i >= std::int64_t(size())) return std::nullopt;
    return std::size_t(i);
}

void StationSeries::resize(std::size_t n) {
    speed.resize(n, kMissing);
    direction.resize(n, kMissing);
    temperature.resize(n, kMissing);
    pressure.resize(n, kMissing);
}

StationSeries StationSeries::aligned(UtcHour first, std::size_t n) const {
    StationSeries out;
    out.meta = meta;
    out.start = first;
    out.resize(n);
    for (std::size_t i = 0; i < size(); ++i) {
        const std::int64_t j = time_at(i) - first;
        if (j < 0 || j >= std::int64_t(n)) continue;
        out.speed[j] = speed[i];
        out.direction[j] = direction[i];
        out.temperature[j] = temperature[i];
        out.pressure[j] = pressure[i];
    }
    return out;
}

const StationSeries& Network::station(const std::string& id) const {
    const auto i = find(id);
    if (!i) throw InvalidInput("unknown station '" + id + "'");
    return stations[*i];
}

std::optional<std::size_t> Network::find(const std::string& id) const {
    for (std::size_t i = 0; i < stations.size(); ++i)
        if (stations[i].meta.id == id) return i;
    return std::nullopt;
}

Network make_network(std::vector<StationSeries> series) {
    Network net;
    if (series.empty()) return net;
    UtcHour first = series.front().start;
    UtcHour last = series.front().start + std::int64_t(series.front().size());
    for (const auto& s : series) {
        first = std::min(first, s.start);
        last = std::max(last, s.start + std::int64_t(s.size()));
    }
    net.start = first;
    net.hours = std::size_t(last - first);
    for (const auto& s : series) net.stations.push_back(s.aligned(first, net.hours));
    return net;
}

double wrap_two_pi(double rad) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(rad, two_pi);
    if (r < 0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

double met_deg_to_math_rad(double deg) {
    return wrap_two_pi((270.0 - deg) * std::numbers::pi / 180.0);
}

double math_rad_to_met_deg(double rad) {
    double d = std::fmod(270.0 - rad * 180.0 / std::numbers::pi, 360.0);
    if (d < 0) d += 360.0;
    if (d >= 360.0) d = 0.0;
    return d;
}

}  // namespace gwf

#include "gwf/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <json.hpp>

#include "gwf/csv.hpp"
#include "gwf/errors.hpp"

namespace gwf::ingest {

using nlohmann::json;

namespace {

struct Linear {
    double scale;
    double offset;  // canonical = raw * scale + offset
};

std::optional<Linear> speed_units(const std::string& u) {
    if (u == "m/s") return Linear{1.0, 0.0};
    if (u == "kt") return Linear{1852.0 / 3600.0, 0.0};
    if (u == "mph") return Linear{0.44704, 0.0};
    if (u == "km/h") return Linear{1.0 / 3.6, 0.0};
    return std::nullopt;
}

std::optional<Linear> temperature_units(const std::string& u) {
    if (u == "degC") return Linear{1.0, 0.0};
    if (u == "degF") return Linear{5.0 / 9.0, -32.0 * 5.0 / 9.0};
    if (u == "K") return Linear{1.0, -273.15};
    return std::nullopt;
}

std::optional<Linear> pressure_units(const std::string& u) {
    if (u == "hPa" || u == "mb") return Linear{1.0, 0.0};
    if (u == "Pa") return Linear{0.01, 0.0};
    if (u == "kPa") return Linear{10.0, 0.0};
    if (u == "inHg") return Linear{33.8638866667, 0.0};
    return std::nullopt;
}

std::optional<Linear> direction_units(const std::string& u) {
    if (u == "deg") return Linear{1.0, 0.0};
    if (u == "rad") return Linear{180.0 / std::numbers::pi, 0.0};
    return std::nullopt;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// "speed [kt]" -> ("speed", "kt")
std::pair<std::string, std::string> split_header(const std::string& h) {
    const auto open = h.find('[');
    if (open == std::string::npos || h.back() != ']') return {h, ""};
    std::string name = h.substr(0, open);
    while (!name.empty() && name.back() == ' ') name.pop_back();
    return {name, h.substr(open + 1, h.size() - open - 2)};
}

}  // namespace

void Schema::validate() const {
    std::vector<std::string> bad;
    if (!speed_units(speed_unit)) bad.push_back("schema: unknown speed unit '" + this->speed_unit + "'");
    if (!direction_units(direction_unit))
        bad.push_back("schema: unknown direction unit '" + this->direction_unit + "'");
    if (!temperature_units(temperature_unit))
        bad.push_back("schema: unknown temperature unit '" + this->temperature_unit + "'");
    if (!pressure_units(pressure_unit))
        bad.push_back("schema: unknown pressure unit '" + this->pressure_unit + "'");
    if (!(min_fraction > 0 && min_fraction <= 1)) bad.push_back("schema: min_fraction must lie in (0, 1]");
    if (interval_seconds < 0 || (interval_seconds > 0 && 3600 % interval_seconds != 0))
        bad.push_back("schema: interval_seconds must divide 3600");
    const std::vector<std::string> cols{time_column, station_column, speed_column, direction_column,
                                        temperature_column, pressure_column};
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i].empty()) bad.push_back("schema: a column role has an empty name");
        for (std::size_t j = i + 1; j < cols.size(); ++j)
            if (!cols[i].empty() && cols[i] == cols[j])
                bad.push_back("schema: column '" + cols[i] + "' mapped to two roles");
    }
    if (!bad.empty()) throw ConfigError(bad);
}

Schema Schema::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("schema: ") + e.what()});
    }
    if (!j.is_object()) throw ConfigError({"schema: expected a JSON object"});
    Schema s;
    std::vector<std::string> bad;
    auto str = [&](const json& obj, const char* key, std::string& out) {
        if (!obj.contains(key)) return;
        if (obj[key].is_string())
            out = obj[key].get<std::string>();
        else
            bad.push_back(std::string("schema: '") + key + "' must be a string");
    };
    for (const auto& [key, value] : j.items()) {
        if (key == "columns") {
            if (!value.is_object()) {
                bad.push_back("schema: 'columns' must be an object");
                continue;
            }
            for (const auto& [role, _] : value.items())
                if (role != "time" && role != "station" && role != "speed" && role != "direction" &&
                    role != "temperature" && role != "pressure")
                    bad.push_back("schema: unknown column role '" + role + "'");
            str(value, "time", s.time_column);
            str(value, "station", s.station_column);
            str(value, "speed", s.speed_column);
            str(value, "direction", s.direction_column);
            str(value, "temperature", s.temperature_column);
            str(value, "pressure", s.pressure_column);
        } else if (key == "units") {
            if (!value.is_object()) {
                bad.push_back("schema: 'units' must be an object");
                continue;
            }
            for (const auto& [role, _] : value.items())
                if (role != "speed" && role != "direction" && role != "temperature" && role != "pressure")
                    bad.push_back("schema: unknown unit role '" + role + "'");
            str(value, "speed", s.speed_unit);
            str(value, "direction", s.direction_unit);
            str(value, "temperature", s.temperature_unit);
            str(value, "pressure", s.pressure_unit);
        } else if (key == "direction_convention") {
            const auto v = value.is_string() ? value.get<std::string>() : "";
            if (v == "meteorological")
                s.direction_convention = DirectionConvention::Meteorological;
            else if (v == "mathematical")
                s.direction_convention = DirectionConvention::Mathematical;
            else
                bad.push_back("schema: direction_convention must be 'meteorological' or 'mathematical'");
        } else if (key == "ignore_columns" && value.is_array()) {
            s.ignore_columns = value.get<std::vector<std::string>>();
        } else if (key == "sentinels" && value.is_array()) {
            s.sentinels = value.get<std::vector<double>>();
        } else if (key == "min_fraction" && value.is_number()) {
            s.min_fraction = value.get<double>();
        } else if (key == "interval_seconds" && value.is_number_integer()) {
            s.interval_seconds = value.get<std::int64_t>();
        } else {
            bad.push_back("schema: unknown or mistyped key '" + key + "'");
        }
    }
    if (!bad.empty()) throw ConfigError(bad);
    s.validate();
    return s;
}

std::string Schema::to_json() const {
    json j;
    j["columns"] = {{"time", time_column},         {"station", station_column},
                    {"speed", speed_column},       {"direction", direction_column},
                    {"temperature", temperature_column}, {"pressure", pressure_column}};
    j["units"] = {{"speed", speed_unit},
                  {"direction", direction_unit},
                  {"temperature", temperature_unit},
                  {"pressure", pressure_unit}};
    j["direction_convention"] =
        direction_convention == DirectionConvention::Meteorological ? "meteorological" : "mathematical";
    j["ignore_columns"] = ignore_columns;
    j["sentinels"] = sentinels;
    j["min_fraction"] = min_fraction;
    j["interval_seconds"] = interval_seconds;
    return j.dump(2);
}

Schema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return Schema::from_json(ss.str());
}

LoadResult load_csv(const std::string& path, const Schema& schema) {
    schema.validate();
    const auto table = csv::read_table(path);
    if (table.rows.empty()) throw LoadError("'" + path + "' has no data rows");

    struct Role {
        const std::string* column;
        const std::string* unit;
        std::size_t index = 0;
    };
    Role roles[6] = {{&schema.time_column, nullptr},           {&schema.station_column, nullptr},
                     {&schema.speed_column, &schema.speed_unit}, {&schema.direction_column, &schema.direction_unit},
                     {&schema.temperature_column, &schema.temperature_unit},
                     {&schema.pressure_column, &schema.pressure_unit}};
    std::vector<bool> used(table.header.size(), false);
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const auto [name, unit] = split_header(table.header[c]);
        bool known = std::find(schema.ignore_columns.begin(), schema.ignore_columns.end(), name) !=
                     schema.ignore_columns.end();
        for (auto& r : roles) {
            if (*r.column != name) continue;
            if (used[c]) throw LoadError("column '" + name + "' appears twice", 1);
            if (!unit.empty() && (!r.unit || unit != *r.unit))
                throw LoadError("column '" + name + "' is in [" + unit + "] but the schema declares " +
                                    (r.unit ? "[" + *r.unit + "]" : "no unit"),
                                1);
            r.index = c;
            used[c] = known = true;
        }
        if (!known) throw LoadError("unknown column '" + table.header[c] + "'", 1);
    }
    for (const auto& r : roles)
        if (std::none_of(table.header.begin(), table.header.end(),
                         [&](const std::string& h) { return split_header(h).first == *r.column; }))
            throw LoadError("missing column '" + *r.column + "'", 1);

    const auto sp = *speed_units(schema.speed_unit);
    const auto dr = *direction_units(schema.direction_unit);
    const auto tp = *temperature_units(schema.temperature_unit);
    const auto pr = *pressure_units(schema.pressure_unit);
    auto is_sentinel = [&](double v) {
        return std::find(schema.sentinels.begin(), schema.sentinels.end(), v) != schema.sentinels.end();
    };

    LoadResult out;
    std::map<std::string, std::size_t> index;
    for (const auto& row : table.rows) {
        ++out.rows;
        if (row.fields.size() != table.header.size()) {
            out.malformed_lines.push_back(row.line);
            continue;
        }
        const auto secs = parse_iso8601_seconds(row.fields[roles[0].index]);
        if (!secs) throw LoadError("unparseable timestamp '" + row.fields[roles[0].index] + "'", row.line);
        const std::string& id = row.fields[roles[1].index];
        if (id.empty()) {
            out.malformed_lines.push_back(row.line);
            continue;
        }
        double v[4];
        bool ok = true;
        for (int k = 0; k < 4 && ok; ++k) {
            const auto p = csv::parse_double(row.fields[roles[2 + k].index]);
            if (!p || std::isinf(*p))
                ok = false;
            else
                v[k] = is_sentinel(*p) ? kMissing : *p;
        }
        if (!ok || v[0] < 0) {
            out.malformed_lines.push_back(row.line);
            continue;
        }
        Record r;
        r.seconds = *secs;
        r.speed = v[0] * sp.scale + sp.offset;
        const double deg = v[1] * dr.scale;
        if (!is_missing(deg))
            r.direction = schema.direction_convention == DirectionConvention::Meteorological
                              ? met_deg_to_math_rad(deg)
                              : wrap_two_pi(deg * std::numbers::pi / 180.0);
        r.temperature = v[2] * tp.scale + tp.offset;
        r.pressure = v[3] * pr.scale + pr.offset;

        auto [it, fresh] = index.try_emplace(id, out.stations.size());
        if (fresh) out.stations.push_back({id, {}});
        out.stations[it->second].records.push_back(r);
    }
    for (auto& s : out.stations)
        std::stable_sort(s.records.begin(), s.records.end(),
                         [](const Record& a, const Record& b) { return a.seconds < b.seconds; });
    return out;
}

std::int64_t infer_interval(const std::vector<Record>& records) {
    std::map<std::int64_t, std::size_t> counts;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto d = records[i].seconds - records[i - 1].seconds;
        if (d > 0) ++counts[d];
    }
    std::int64_t best = 3600;
    std::size_t n = 0;
    for (const auto& [d, c] : counts)
        if (c > n) {
            best = d;
            n = c;
        }
    return std::min<std::int64_t>(best, 3600);
}

StationSeries hourly_average(const StationRecords& records, const StationMeta& meta, double min_fraction,
                             std::int64_t interval_seconds) {
    StationSeries out;
    out.meta = meta;
    if (records.records.empty()) return out;
    const auto& rec = records.records;
    const std::int64_t interval = interval_seconds > 0 ? interval_seconds : infer_interval(rec);
    const double expected = 3600.0 / double(interval);
    const auto need = std::size_t(std::max(1.0, std::ceil(min_fraction * expected - 1e-9)));

    const std::int64_t first = floor_div(rec.front().seconds, 3600);
    const std::int64_t last = floor_div(rec.back().seconds, 3600);
    out.start = UtcHour{first};
    out.resize(std::size_t(last - first + 1));

    struct Acc {
        double sum = 0.0;
        std::size_t n = 0;
        double only = kMissing;
        void add(double v) {
            if (is_missing(v)) return;
            sum += v;
            only = v;
            ++n;
        }
    };
    std::size_t i = 0;
    while (i < rec.size()) {
        const std::int64_t h = floor_div(rec[i].seconds, 3600);
        Acc speed, temp, pres, c, s;
        for (; i < rec.size() && floor_div(rec[i].seconds, 3600) == h; ++i) {
            speed.add(rec[i].speed);
            temp.add(rec[i].temperature);
            pres.add(rec[i].pressure);
            if (!is_missing(rec[i].direction)) {
                c.add(std::cos(rec[i].direction));
                s.add(std::sin(rec[i].direction));
                c.only = rec[i].direction;
            }
        }
        const std::size_t k = std::size_t(h - first);
        // A single value passes through untouched so hourly input is a fixed point.
        auto mean = [&](const Acc& a) { return a.n < need ? kMissing : a.n == 1 ? a.only : a.sum / double(a.n); };
        out.speed[k] = mean(speed);
        out.temperature[k] = mean(temp);
        out.pressure[k] = mean(pres);
        if (c.n >= need) {
            if (c.n == 1)
                out.direction[k] = c.only;
            else if (std::hypot(c.sum, s.sum) > 1e-9 * double(c.n))
                out.direction[k] = wrap_two_pi(std::atan2(s.sum, c.sum));
        }
    }
    return out;
}

std::vector<StationMeta> load_station_meta(const std::string& path) {
    const auto table = csv::read_table(path);
    const auto ci = table.column("id"), la = table.column("latitude"), lo = table.column("longitude"),
               el = table.column("elevation");
    std::vector<StationMeta> out;
    for (const auto& row : table.rows) {
        if (row.fields.size() != table.header.size()) throw LoadError("wrong number of fields", row.line);
        StationMeta m;
        m.id = row.fields[ci];
        const auto a = csv::parse_double(row.fields[la]), b = csv::parse_double(row.fields[lo]),
                   c = csv::parse_double(row.fields[el]);
        if (!a || !b || !c || std::isnan(*a) || std::isnan(*b) || std::isnan(*c))
            throw LoadError("unparseable station coordinates", row.line);
        m.latitude = *a;
        m.longitude = *b;
        m.elevation = *c;
        try {
            m.validate();
        } catch (const InvalidInput& e) {
            throw LoadError(e.what(), row.line);
        }
        for (const auto& o : out)
            if (o.id == m.id) throw LoadError("duplicate station '" + m.id + "'", row.line);
        out.push_back(m);
    }
    if (out.empty()) throw LoadError("'" + path + "' lists no stations");
    return out;
}

void write_station_meta(const std::vector<StationMeta>& metas, const std::string& path) {
    std::string s = "id,latitude,longitude,elevation\n";
    for (const auto& m : metas)
        s += csv::join({m.id, csv::format_double(m.latitude), csv::format_double(m.longitude),
                        csv::format_double(m.elevation)}) +
             "\n";
    csv::write_atomic(path, s);
}

Network load_network(const std::string& data_path, const std::string& meta_path, const Schema& schema) {
    const auto metas = load_station_meta(meta_path);
    const auto loaded = load_csv(data_path, schema);
    std::vector<StationSeries> series;
    for (const auto& m : metas) {
        const auto it = std::find_if(loaded.stations.begin(), loaded.stations.end(),
                                     [&](const StationRecords& r) { return r.id == m.id; });
        if (it == loaded.stations.end()) throw LoadError("station '" + m.id + "' has no records in '" + data_path + "'");
        series.push_back(hourly_average(*it, m, schema.min_fraction, schema.interval_seconds));
    }
    return make_network(std::move(series));
}

void write_hourly_csv(const Network& network, const std::string& path) {
    std::string s = "time,station,speed,direction_deg,temp_c,pressure_hpa\n";
    for (std::size_t t = 0; t < network.hours; ++t) {
        const std::string when = to_iso8601(network.start + std::int64_t(t));
        for (const auto& st : network.stations) {
            const double d = st.direction[t];
            s += csv::join({when, st.meta.id, csv::format_double(st.speed[t]),
                            csv::format_double(is_missing(d) ? kMissing : math_rad_to_met_deg(d)),
                            csv::format_double(st.temperature[t]), csv::format_double(st.pressure[t])}) +
                 "\n";
        }
    }
    csv::write_atomic(path, s);
}

}  // namespace gwf::ingest

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "copkit/errors.hpp"
#include "copkit/scenario.hpp"
#include "text_util.hpp"

namespace copkit {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::parse_int;
using detail::trim;

constexpr const char* kMagic = "copkit-scenario v1";

std::vector<std::string> fields_of(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) fields.emplace_back(line.substr(start, i - start));
    }
    return fields;
}

struct KeyValueSection {
    std::map<std::string, std::string> values;
    std::map<std::string, int> lines;

    double number(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end()) throw ParseError("missing key '" + key + "'");
        return parse_double(it->second, lines.at(key));
    }

    std::int64_t integer(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end()) throw ParseError("missing key '" + key + "'");
        return parse_int(it->second, lines.at(key));
    }
};

}  // namespace

void write_scenario(const NetworkScenario& scenario, std::ostream& out) {
    out << kMagic << "\n\n";
    out << "[constants]\n";
    const RadioConstants& c = scenario.constants;
    out << "carrier_frequency_mhz = " << format_double(c.carrier_frequency_mhz) << "\n";
    out << "tx_power_dbm = " << format_double(c.tx_power_dbm) << "\n";
    out << "antenna_gain_dbi = " << format_double(c.antenna_gain_dbi) << "\n";
    out << "min_rsrp_dbm = " << format_double(c.min_rsrp_dbm) << "\n";
    out << "selection_threshold_db = " << format_double(c.selection_threshold_db) << "\n";
    out << "noise_power_dbm = " << format_double(c.noise_power_dbm) << "\n";
    out << "pathloss_exponent = " << format_double(c.pathloss_exponent) << "\n";
    out << "pathloss_ref_db = " << format_double(c.pathloss_ref_db) << "\n";
    out << "ref_distance_m = " << format_double(c.ref_distance_m) << "\n";
    out << "\n[scenario]\n";
    out << "rng_seed = " << scenario.rng_seed << "\n";
    out << "non_target_cio_db = " << format_double(scenario.non_target_cio_db) << "\n";
    out << "non_target_hom_db = " << format_double(scenario.non_target_hom_db) << "\n";
    out << "prb_count = " << scenario.prb_count << "\n";
    out << "\n[sectors]\n";
    out << "# sector_id site_x_m site_y_m azimuth_deg is_target load\n";
    for (const Sector& sec : scenario.sectors)
        out << sec.sector_id << ' ' << format_double(sec.site_position.x) << ' '
            << format_double(sec.site_position.y) << ' ' << format_double(sec.azimuth_deg) << ' '
            << (sec.is_target ? 1 : 0) << ' ' << format_double(sec.load) << "\n";
    out << "\n[users]\n";
    out << "# ue_id x_m y_m traffic_demand\n";
    for (const UserEquipment& ue : scenario.users)
        out << ue.ue_id << ' ' << format_double(ue.position.x) << ' '
            << format_double(ue.position.y) << ' ' << format_double(ue.traffic_demand) << "\n";
}

void write_scenario_file(const NetworkScenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    write_scenario(scenario, out);
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

NetworkScenario read_scenario(std::istream& in) {
    NetworkScenario scenario;
    KeyValueSection constants, header;
    std::string section;
    std::string line;
    int line_no = 0;
    bool saw_magic = false;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        if (!saw_magic) {
            if (text != kMagic) throw ParseError("expected '" + std::string(kMagic) + "'", line_no);
            saw_magic = true;
            continue;
        }
        if (text.front() == '[') {
            if (text.back() != ']') throw ParseError("unterminated section header", line_no);
            section = std::string(text.substr(1, text.size() - 2));
            if (section != "constants" && section != "scenario" && section != "sectors" &&
                section != "users")
                throw ParseError("unknown section '" + section + "'", line_no);
            continue;
        }
        if (section == "constants" || section == "scenario") {
            std::size_t eq = text.find('=');
            if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
            std::string key(trim(text.substr(0, eq)));
            std::string value(trim(text.substr(eq + 1)));
            KeyValueSection& kv = section == "constants" ? constants : header;
            kv.values[key] = value;
            kv.lines[key] = line_no;
        } else if (section == "sectors") {
            auto f = fields_of(text);
            if (f.size() != 6) throw ParseError("sector record needs 6 fields", line_no);
            Sector sec;
            sec.sector_id = static_cast<int>(parse_int(f[0], line_no));
            sec.site_position = {parse_double(f[1], line_no), parse_double(f[2], line_no)};
            sec.azimuth_deg = parse_double(f[3], line_no);
            sec.is_target = parse_int(f[4], line_no) != 0;
            sec.load = parse_double(f[5], line_no);
            scenario.sectors.push_back(sec);
        } else if (section == "users") {
            auto f = fields_of(text);
            if (f.size() != 4) throw ParseError("user record needs 4 fields", line_no);
            UserEquipment ue;
            ue.ue_id = static_cast<int>(parse_int(f[0], line_no));
            ue.position = {parse_double(f[1], line_no), parse_double(f[2], line_no)};
            ue.traffic_demand = parse_double(f[3], line_no);
            scenario.users.push_back(ue);
        } else {
            throw ParseError("content before the first section", line_no);
        }
    }
    if (!saw_magic) throw ParseError("empty scenario file");

    RadioConstants& c = scenario.constants;
    c.carrier_frequency_mhz = constants.number("carrier_frequency_mhz");
    c.tx_power_dbm = constants.number("tx_power_dbm");
    c.antenna_gain_dbi = constants.number("antenna_gain_dbi");
    c.min_rsrp_dbm = constants.number("min_rsrp_dbm");
    c.selection_threshold_db = constants.number("selection_threshold_db");
    c.noise_power_dbm = constants.number("noise_power_dbm");
    c.pathloss_exponent = constants.number("pathloss_exponent");
    c.pathloss_ref_db = constants.number("pathloss_ref_db");
    c.ref_distance_m = constants.number("ref_distance_m");
    scenario.rng_seed = static_cast<std::uint64_t>(header.integer("rng_seed"));
    scenario.non_target_cio_db = header.number("non_target_cio_db");
    scenario.non_target_hom_db = header.number("non_target_hom_db");
    scenario.prb_count = static_cast<int>(header.integer("prb_count"));

    validate(scenario);
    return scenario;
}

NetworkScenario read_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    try {
        return read_scenario(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace copkit

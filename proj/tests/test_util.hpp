#pragma once

// Shared test helpers: scratch directories and small scenario builders.

#include <filesystem>
#include <random>
#include <sstream>
#include <string>

#include "copkit/scenario.hpp"

namespace copkit::test {

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        std::mt19937_64 rng(std::random_device{}());
        path = std::filesystem::temp_directory_path() /
               ("copkit-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// Distance at which a boresight user sees the given RSRP under the default
// constants (tx 43 + gain 18.5 - 34.5 - 35 log10 d).
inline double distance_for_rsrp(double rsrp_dbm) {
    return std::pow(10.0, (43.0 + 18.5 - 34.5 - rsrp_dbm) / 35.0);
}

// Sites on the +x/-x axis with one sector each, boresight at the origin.
// Sector 0 is the target. A user at the origin sees both in-lobe.
inline NetworkScenario axis_scenario(const std::vector<double>& site_distances) {
    NetworkScenario s;
    for (std::size_t i = 0; i < site_distances.size(); ++i) {
        Sector sec;
        sec.sector_id = static_cast<int>(i);
        const double sign = i % 2 == 0 ? 1.0 : -1.0;
        sec.site_position = {sign * site_distances[i], 0.0};
        sec.azimuth_deg = sign > 0 ? 180.0 : 0.0;
        sec.is_target = i == 0;
        sec.load = 1.0;
        s.sectors.push_back(sec);
    }
    s.users.push_back({0, {0.0, 0.0}, 1.0});
    return s;
}

inline std::string serialize(const NetworkScenario& s) {
    std::ostringstream out;
    write_scenario(s, out);
    return out.str();
}

}  // namespace copkit::test

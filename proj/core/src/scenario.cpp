#include "copkit/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "copkit/errors.hpp"
#include "copkit/units.hpp"
#include "rng_util.hpp"

namespace copkit {

namespace {

constexpr double kOutOfLobePenaltyDb = 20.0;
constexpr double kMainLobeHalfWidthDeg = 60.0;

// Signed angular difference wrapped into [-180, 180).
double wrap_deg(double deg) {
    double w = std::fmod(deg + 180.0, 360.0);
    if (w < 0.0) w += 360.0;
    return w - 180.0;
}

double sector_gain_dbi(const RadioConstants& constants, const Sector& sector, const Point2D& p) {
    double bearing = std::atan2(p.y - sector.site_position.y, p.x - sector.site_position.x) *
                     180.0 / std::numbers::pi;
    double off = wrap_deg(bearing - sector.azimuth_deg);
    if (std::abs(off) <= kMainLobeHalfWidthDeg) return constants.antenna_gain_dbi;
    return constants.antenna_gain_dbi - kOutOfLobePenaltyDb;
}

const Sector& sector_by_id(const NetworkScenario& scenario, int sector_id) {
    for (const Sector& sec : scenario.sectors)
        if (sec.sector_id == sector_id) return sec;
    throw ConfigError("unknown sector_id " + std::to_string(sector_id));
}

// Position of sector_id among the target sectors in ascending id order,
// or -1. Allocation-free: associate() calls this for every candidate.
int target_rank(const NetworkScenario& scenario, int sector_id) {
    bool is_target = false;
    int rank = 0;
    for (const Sector& sec : scenario.sectors) {
        if (!sec.is_target) continue;
        if (sec.sector_id == sector_id) is_target = true;
        if (sec.sector_id < sector_id) ++rank;
    }
    return is_target ? rank : -1;
}

}  // namespace

double distance_m(const Point2D& a, const Point2D& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

void validate(const RadioConstants& c) {
    if (!(c.carrier_frequency_mhz > 0.0)) throw ConfigError("carrier_frequency_mhz must be positive");
    if (!(c.tx_power_dbm > c.min_rsrp_dbm)) throw ConfigError("tx_power_dbm must exceed min_rsrp_dbm");
    if (!(c.noise_power_dbm < c.tx_power_dbm)) throw ConfigError("noise_power_dbm must be below tx_power_dbm");
    if (!(c.selection_threshold_db >= 0.0)) throw ConfigError("selection_threshold_db must be non-negative");
    if (!(c.pathloss_exponent > 2.0)) throw ConfigError("pathloss_exponent must exceed 2");
    if (!(c.ref_distance_m > 0.0)) throw ConfigError("ref_distance_m must be positive");
}

bool in_cop_box(const MobilityConfig& config) {
    for (double v : config.cio_db)
        if (!(v >= kCioMinDb && v <= kCioMaxDb)) return false;
    for (double v : config.hom_db)
        if (!(v >= kHomMinDb && v <= kHomMaxDb)) return false;
    return true;
}

std::vector<int> NetworkScenario::target_sector_ids() const {
    std::vector<int> ids;
    for (const Sector& sec : sectors)
        if (sec.is_target) ids.push_back(sec.sector_id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

void validate(const NetworkScenario& scenario) {
    validate(scenario.constants);
    if (scenario.sectors.empty()) throw ConfigError("scenario has no sectors");
    if (scenario.users.empty()) throw ConfigError("scenario has no users");
    if (scenario.prb_count <= 0) throw ConfigError("prb_count must be positive");
    if (scenario.non_target_hom_db < 0.0) throw ConfigError("non_target_hom_db must be non-negative");
    if (scenario.target_sector_ids().size() > 3)
        throw ConfigError("the COP vector covers at most 3 target sectors");
    std::set<int> sector_ids;
    for (const Sector& sec : scenario.sectors) {
        if (!sector_ids.insert(sec.sector_id).second)
            throw ConfigError("duplicate sector_id " + std::to_string(sec.sector_id));
        if (sec.sector_id < 0) throw ConfigError("sector_id must be non-negative");
        if (!(sec.azimuth_deg >= 0.0 && sec.azimuth_deg < 360.0))
            throw ConfigError("azimuth_deg must lie in [0, 360)");
        if (!(sec.load >= 0.0 && sec.load <= 1.0)) throw ConfigError("sector load must lie in [0, 1]");
    }
    std::set<int> ue_ids;
    for (const UserEquipment& ue : scenario.users) {
        if (!ue_ids.insert(ue.ue_id).second)
            throw ConfigError("duplicate ue_id " + std::to_string(ue.ue_id));
        if (!(ue.traffic_demand > 0.0)) throw ConfigError("traffic_demand must be positive");
    }
}

NetworkScenario generate_scenario(std::uint64_t seed, const LayoutParams& params) {
    validate(params.constants);
    if (params.site_count < 1) throw ConfigError("site_count must be at least 1");
    if (params.sectors_per_site < 1) throw ConfigError("sectors_per_site must be at least 1");
    if (params.user_count < 1) throw ConfigError("user_count must be at least 1");
    if (!(params.inter_site_distance_m > 0.0)) throw ConfigError("inter_site_distance_m must be positive");
    if (!(params.region_half_extent_m > 0.0)) throw ConfigError("region_half_extent_m must be positive");
    if (!(params.sector_load >= 0.0 && params.sector_load <= 1.0))
        throw ConfigError("sector_load must lie in [0, 1]");
    if (params.prb_count <= 0) throw ConfigError("prb_count must be positive");

    // Site 0 at the center, up to 6 sites on an inner hex ring, the rest on an
    // outer ring at twice the distance, rotated half a step.
    std::vector<Point2D> sites;
    sites.push_back({0.0, 0.0});
    const double d = params.inter_site_distance_m;
    int inner = std::min(params.site_count - 1, 6);
    for (int i = 0; i < inner; ++i) {
        double a = i * 60.0 * std::numbers::pi / 180.0;
        sites.push_back({d * std::cos(a), d * std::sin(a)});
    }
    int outer = params.site_count - 1 - inner;
    for (int i = 0; i < outer; ++i) {
        double a = (30.0 + i * 360.0 / outer) * std::numbers::pi / 180.0;
        sites.push_back({2.0 * d * std::cos(a), 2.0 * d * std::sin(a)});
    }

    NetworkScenario scenario;
    scenario.constants = params.constants;
    scenario.rng_seed = seed;
    scenario.non_target_cio_db = params.non_target_cio_db;
    scenario.non_target_hom_db = params.non_target_hom_db;
    scenario.prb_count = params.prb_count;

    for (int site = 0; site < params.site_count; ++site) {
        for (int k = 0; k < params.sectors_per_site; ++k) {
            Sector sec;
            sec.sector_id = site * params.sectors_per_site + k;
            sec.site_position = sites[static_cast<std::size_t>(site)];
            sec.azimuth_deg = k * 360.0 / params.sectors_per_site;
            sec.is_target = (site == 0);
            sec.load = params.sector_load;
            scenario.sectors.push_back(sec);
        }
    }

    std::mt19937_64 rng(seed);
    const double e = params.region_half_extent_m;
    for (int i = 0; i < params.user_count; ++i) {
        UserEquipment ue;
        ue.ue_id = i;
        ue.position.x = detail::uniform_in(rng, -e, e);
        ue.position.y = detail::uniform_in(rng, -e, e);
        ue.traffic_demand = 1.0;
        scenario.users.push_back(ue);
    }

    validate(scenario);
    return scenario;
}

double path_loss_db(const NetworkScenario& scenario, const Sector& sector,
                    const Point2D& ue_position) {
    const RadioConstants& c = scenario.constants;
    double d = std::max(distance_m(sector.site_position, ue_position), c.ref_distance_m);
    return c.pathloss_ref_db + 10.0 * c.pathloss_exponent * std::log10(d / c.ref_distance_m);
}

double rsrp_dbm(const NetworkScenario& scenario, const Sector& sector, const UserEquipment& ue) {
    return scenario.constants.tx_power_dbm + sector_gain_dbi(scenario.constants, sector, ue.position) -
           path_loss_db(scenario, sector, ue.position);
}

std::vector<int> qualify(const NetworkScenario& scenario, const UserEquipment&,
                         const std::map<int, double>& rsrp_map) {
    const RadioConstants& c = scenario.constants;
    const double bar = c.min_rsrp_dbm + std::max(0.0, c.selection_threshold_db);
    std::vector<int> qualified;
    for (const Sector& sec : scenario.sectors) {
        auto it = rsrp_map.find(sec.sector_id);
        if (it == rsrp_map.end())
            throw ConfigError("rsrp map is missing sector " + std::to_string(sec.sector_id));
        if (it->second >= bar) qualified.push_back(sec.sector_id);
    }
    std::sort(qualified.begin(), qualified.end());
    return qualified;
}

double cio_db_for(const NetworkScenario& scenario, const MobilityConfig& config, int sector_id) {
    int rank = target_rank(scenario, sector_id);
    if (rank < 0) return scenario.non_target_cio_db;
    return config.cio_db[static_cast<std::size_t>(rank)];
}

double hom_db_for(const NetworkScenario& scenario, const MobilityConfig& config, int sector_id) {
    int rank = target_rank(scenario, sector_id);
    if (rank < 0) return scenario.non_target_hom_db;
    return config.hom_db[static_cast<std::size_t>(rank)];
}

AssociationResult associate(const NetworkScenario& scenario, const MobilityConfig& config,
                            const UserEquipment& ue) {
    if (!in_cop_box(config)) throw ConfigError("mobility config outside the COP box");

    AssociationResult result;
    result.ue_id = ue.ue_id;
    for (const Sector& sec : scenario.sectors)
        result.rsrp_by_sector_dbm[sec.sector_id] = rsrp_dbm(scenario, sec, ue);
    result.qualified_sector_ids = qualify(scenario, ue, result.rsrp_by_sector_dbm);
    if (result.qualified_sector_ids.empty()) return result;  // OUTAGE

    // Pre-selection: highest RSRP, ties to the lowest sector_id (ascending scan).
    int preselected = -1;
    double preselected_rsrp = -std::numeric_limits<double>::infinity();
    for (int id : result.qualified_sector_ids) {
        double r = result.rsrp_by_sector_dbm.at(id);
        if (r > preselected_rsrp) {
            preselected_rsrp = r;
            preselected = id;
        }
    }

    // Final selection: the best offset-adjusted candidate that clears the
    // serving score plus the serving cell's handover margin. The serving cell
    // itself competes, which keeps the lowest-id rule on exact score ties.
    const double serving_score = preselected_rsrp + cio_db_for(scenario, config, preselected);
    const double margin = hom_db_for(scenario, config, preselected);
    int best_candidate = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int id : result.qualified_sector_ids) {
        double score = result.rsrp_by_sector_dbm.at(id) + cio_db_for(scenario, config, id);
        if (score >= serving_score + margin && score > best_score) {
            best_score = score;
            best_candidate = id;
        }
    }
    result.serving_sector_id = best_candidate >= 0 ? best_candidate : preselected;
    return result;
}

namespace {

double sinr_linear(const NetworkScenario& scenario, const AssociationResult& association) {
    const int serving = *association.serving_sector_id;
    const double signal_mw = db_to_linear(association.rsrp_by_sector_dbm.at(serving));
    double interference_mw = 0.0;
    for (const Sector& sec : scenario.sectors) {
        if (sec.sector_id == serving) continue;
        interference_mw += sec.load * db_to_linear(association.rsrp_by_sector_dbm.at(sec.sector_id));
    }
    const double noise_mw = db_to_linear(scenario.constants.noise_power_dbm);
    return signal_mw / (interference_mw + noise_mw);
}

}  // namespace

double sinr_db(const NetworkScenario& scenario, const MobilityConfig&, const UserEquipment& ue,
               const AssociationResult& association) {
    if (association.outage())
        throw OutageError("no SINR for ue " + std::to_string(ue.ue_id) + ": user is in outage");
    return linear_to_db(sinr_linear(scenario, association));
}

bool nearest_site_hosts_target(const NetworkScenario& scenario, const Point2D& position) {
    double best = std::numeric_limits<double>::infinity();
    bool best_is_target = false;
    for (const Sector& sec : scenario.sectors) {
        double d = distance_m(sec.site_position, position);
        if (d < best) {
            best = d;
            best_is_target = sec.is_target;
        } else if (d == best) {
            best_is_target = best_is_target || sec.is_target;
        }
    }
    return best_is_target;
}

double capacity(const NetworkScenario& scenario, const std::vector<ServedUser>& served) {
    double total = 0.0;
    for (const Sector& sec : scenario.sectors) {
        if (!sec.is_target) continue;
        if (!(sec.load > 0.0))
            throw ConfigError("capacity needs a positive load on sector " +
                              std::to_string(sec.sector_id));
        double resource_sum = 0.0;
        for (const ServedUser& user : served)
            if (user.serving_sector_id == sec.sector_id)
                resource_sum += user.traffic_demand / std::log2(1.0 + user.sinr_linear);
        total += scenario.prb_count - resource_sum / sec.load;
    }
    return total;
}

KpiReport evaluate_kpi(const NetworkScenario& scenario, const MobilityConfig& config) {
    if (!in_cop_box(config)) throw ConfigError("mobility config outside the COP box");

    KpiReport report;
    std::vector<ServedUser> served;
    double sum_db = 0.0;
    int members = 0;
    for (const UserEquipment& ue : scenario.users) {
        AssociationResult association = associate(scenario, config, ue);
        bool serves_target = !association.outage() &&
                             sector_by_id(scenario, *association.serving_sector_id).is_target;
        if (!serves_target && !nearest_site_hosts_target(scenario, ue.position)) continue;
        ++members;
        if (association.outage()) {
            ++report.outage_count;
            continue;
        }
        double linear = sinr_linear(scenario, association);
        double db = linear_to_db(linear);
        report.per_user_sinr_db[ue.ue_id] = db;
        sum_db += db;
        served.push_back({ue.ue_id, *association.serving_sector_id, ue.traffic_demand, linear});
    }

    if (report.per_user_sinr_db.empty())
        throw DegenerateKpiError(members == 0 ? "data-gathering set is empty"
                                              : "every user in the data-gathering set is in outage",
                                 report.outage_count);

    report.mean_sinr_db = sum_db / static_cast<double>(report.per_user_sinr_db.size());
    report.capacity = capacity(scenario, served);
    return report;
}

}  // namespace copkit

#pragma once

// Snapshot simulator for a small LTE-like network: cell layout, CIO/HOM-aware
// serving-cell selection, per-user SINR and the mean-SINR KPI.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace copkit {

struct Point2D {
    double x = 0.0;
    double y = 0.0;
};

double distance_m(const Point2D& a, const Point2D& b);

// Radio-level constants shared by every sector of a scenario.
struct RadioConstants {
    double carrier_frequency_mhz = 2100.0;
    double tx_power_dbm = 43.0;           // per-sector transmit power
    double antenna_gain_dbi = 18.5;       // main-lobe gain
    double min_rsrp_dbm = -140.0;         // qualification floor
    double selection_threshold_db = 0.0;  // added (when positive) to the floor
    double noise_power_dbm = -95.0;       // noise power over the carrier bandwidth
    double pathloss_exponent = 3.5;
    double pathloss_ref_db = 34.5;        // loss at ref_distance_m
    double ref_distance_m = 1.0;
};

// Throws ConfigError when an invariant is violated.
void validate(const RadioConstants& constants);

struct Sector {
    int sector_id = 0;
    Point2D site_position;
    double azimuth_deg = 0.0;  // [0, 360)
    bool is_target = false;    // one of the 3 sectors whose COPs vary
    double load = 1.0;         // interfering-cell load w, in [0, 1]
};

struct UserEquipment {
    int ue_id = 0;
    Point2D position;
    double traffic_demand = 1.0;  // resource demand per user
};

// The 6-gene COP vector under optimization: one CIO and one HOM per target
// sector, ordered by ascending target sector_id.
struct MobilityConfig {
    std::array<double, 3> cio_db{0.0, 0.0, 0.0};  // each in [-10, 10]
    std::array<double, 3> hom_db{0.0, 0.0, 0.0};  // each in [0, 10]
};

inline constexpr double kCioMinDb = -10.0;
inline constexpr double kCioMaxDb = 10.0;
inline constexpr double kHomMinDb = 0.0;
inline constexpr double kHomMaxDb = 10.0;

bool in_cop_box(const MobilityConfig& config);

struct NetworkScenario {
    RadioConstants constants;
    std::vector<Sector> sectors;
    std::vector<UserEquipment> users;
    std::uint64_t rng_seed = 0;
    double non_target_cio_db = 0.0;  // CIO applied to every non-target sector
    double non_target_hom_db = 0.0;  // HOM applied when the serving cell is non-target
    int prb_count = 100;             // physical resource blocks per sector

    // Ascending; the canonical scenario has exactly three.
    std::vector<int> target_sector_ids() const;
};

// Throws ConfigError when a scenario invariant is violated.
void validate(const NetworkScenario& scenario);

// Geometry and population settings consumed by generate_scenario.
struct LayoutParams {
    RadioConstants constants;
    int site_count = 12;
    int sectors_per_site = 3;
    int user_count = 356;
    double inter_site_distance_m = 500.0;
    double region_half_extent_m = 1250.0;  // users are sampled in this centered square
    double sector_load = 1.0;
    int prb_count = 100;
    double non_target_cio_db = 0.0;
    double non_target_hom_db = 0.0;
};

// Deterministic in (seed, params): site 0 sits at the layout center and hosts
// the target sectors; the remaining sites form two rings around it; users are
// sampled uniformly in the bounding square.
NetworkScenario generate_scenario(std::uint64_t seed, const LayoutParams& params = {});

struct AssociationResult {
    int ue_id = 0;
    std::optional<int> serving_sector_id;      // nullopt marks OUTAGE
    std::map<int, double> rsrp_by_sector_dbm;  // sector_id -> received power
    std::vector<int> qualified_sector_ids;     // ascending

    bool outage() const { return !serving_sector_id.has_value(); }
};

struct KpiReport {
    double mean_sinr_db = 0.0;
    std::map<int, double> per_user_sinr_db;  // non-outage members of the gathering set
    double capacity = 0.0;                   // summed over target sectors
    int outage_count = 0;
};

// One evaluated user, the inputs the capacity formula consumes.
struct ServedUser {
    int ue_id = 0;
    int serving_sector_id = 0;
    double traffic_demand = 1.0;
    double sinr_linear = 1.0;
};

// Log-distance loss; distances below ref_distance_m are clamped to it.
double path_loss_db(const NetworkScenario& scenario, const Sector& sector,
                    const Point2D& ue_position);

// tx power + masked antenna gain - path loss. Each sector has a 120-degree
// main lobe centered on its azimuth; the gain drops 20 dB outside it.
double rsrp_dbm(const NetworkScenario& scenario, const Sector& sector,
                const UserEquipment& ue);

// Sectors whose RSRP clears min_rsrp + max(0, selection_threshold), ascending.
// The comparison is inclusive. rsrp_map must cover every sector.
std::vector<int> qualify(const NetworkScenario& scenario, const UserEquipment& ue,
                         const std::map<int, double>& rsrp_map);

// CIO / HOM in effect for a sector under the given config: the config value
// for target sectors, the scenario's non-target default otherwise.
double cio_db_for(const NetworkScenario& scenario, const MobilityConfig& config, int sector_id);
double hom_db_for(const NetworkScenario& scenario, const MobilityConfig& config, int sector_id);

// Qualification, pre-selection by highest RSRP, then final selection by the
// largest offset-adjusted power among candidates clearing the serving score
// plus its handover margin. Ties break to the lowest sector_id. An empty
// qualified set yields OUTAGE.
AssociationResult associate(const NetworkScenario& scenario, const MobilityConfig& config,
                            const UserEquipment& ue);

// Linear-domain SINR of an associated user, returned in dB.
// Throws OutageError when the association carries no serving cell.
double sinr_db(const NetworkScenario& scenario, const MobilityConfig& config,
               const UserEquipment& ue, const AssociationResult& association);

// True when the nearest site (by distance to the site position) hosts a
// target sector. Defines the geometric part of the data-gathering set.
bool nearest_site_hosts_target(const NetworkScenario& scenario, const Point2D& position);

// Remaining resource blocks per target sector after serving the demand of its
// users, summed over target sectors. Throws ConfigError on a zero sector load.
double capacity(const NetworkScenario& scenario, const std::vector<ServedUser>& served);

// Mean SINR over the data-gathering set: users served by a target sector plus
// users whose nearest site hosts one. Outage members are counted but excluded
// from the mean. Throws DegenerateKpiError when no member has a serving cell.
KpiReport evaluate_kpi(const NetworkScenario& scenario, const MobilityConfig& config);

// Structured text serialization so sweeps and tests can pin an exact world.
// Doubles are written with shortest round-trip precision.
void write_scenario(const NetworkScenario& scenario, std::ostream& out);
void write_scenario_file(const NetworkScenario& scenario, const std::string& path);
NetworkScenario read_scenario(std::istream& in);
NetworkScenario read_scenario_file(const std::string& path);

}  // namespace copkit

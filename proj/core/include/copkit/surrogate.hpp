#pragma once

// Regression models mapping the 6-dimensional COP vector to mean SINR, the
// RMSE evaluation harness, and a uniform prediction contract for the GA.

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "copkit/datagen.hpp"
#include "copkit/scenario.hpp"

namespace copkit {

struct FeatureRow {
    std::array<double, 6> x{};  // (cio1, cio2, cio3, hom1, hom2, hom3)
    double y = 0.0;             // mean SINR, dB
};

std::array<double, 6> to_features(const MobilityConfig& config);
MobilityConfig to_config(const std::array<double, 6>& x);

// Drops NaN-flagged (fully-outage) records: they carry no regression target.
std::vector<FeatureRow> to_feature_rows(const SweepDataset& dataset);

struct LinearModel {
    std::array<double, 6> w{};
    double b = 0.0;
};

struct KnnModel {
    int k = 5;
    std::vector<FeatureRow> training_rows;
};

// feature < 0 marks a leaf.
struct GbrtNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;
};

struct GbrtTree {
    std::vector<GbrtNode> nodes;
    double value_at(const std::array<double, 6>& x) const;
};

struct GbrtModel {
    std::vector<GbrtTree> trees;
    double learning_rate = 0.1;
    double l2_lambda = 5.0;
    double base_prediction = 0.0;
    int max_depth = 3;
    int n_trees = 100;
};

// Lattice table of predictions imported from file; lookup returns the value
// of the nearest stored config (ties to the lower row index).
struct ExternalTable {
    std::vector<FeatureRow> rows;
};

struct FitReport {
    std::string model_name;
    double rmse_train = 0.0;
    double rmse_test = 0.0;
    double train_fraction = 1.0;
    int n_train = 0;
    int n_test = 0;
    std::uint64_t seed = 0;
    std::string error;  // non-empty when this harness cell failed
};

struct TrainedModel {
    std::variant<LinearModel, KnnModel, GbrtModel, ExternalTable> model;
    FitReport report;

    std::string family() const;
};

// Seeded shuffle split into (train, test); both sides non-empty or it throws.
std::pair<std::vector<FeatureRow>, std::vector<FeatureRow>> split(
    const std::vector<FeatureRow>& rows, double test_fraction, std::uint64_t seed);

// Least squares through ridge-stabilized (1e-8) normal equations.
LinearModel fit_linear(const std::vector<FeatureRow>& train);

KnnModel fit_knn(const std::vector<FeatureRow>& train, int k);

// Stagewise squared-loss boosting over axis-aligned regression trees with
// L2-regularized leaf values. Deterministic; the seed is only recorded.
GbrtModel fit_gbrt(const std::vector<FeatureRow>& train, int n_trees, int max_depth,
                   double learning_rate, double l2_lambda, std::uint64_t seed);

double predict(const LinearModel& model, const std::array<double, 6>& x);
double predict(const KnnModel& model, const std::array<double, 6>& x);
double predict(const GbrtModel& model, const std::array<double, 6>& x);
double predict(const ExternalTable& model, const std::array<double, 6>& x);

// Configs outside the COP box are clamped onto it (the GA may propose
// boundary values exactly); the first clamp emits a stderr note.
double predict(const TrainedModel& model, const MobilityConfig& config);

double rmse(const TrainedModel& model, const std::vector<FeatureRow>& rows);

// Shared hyperparameters for train_model / evaluate_models.
// The GBRT settings trade a little full-data accuracy for robustness when
// only a sliver of the sweep is available for training.
struct SurrogateParams {
    int knn_k = 5;
    int gbrt_trees = 100;
    int gbrt_max_depth = 3;
    double gbrt_learning_rate = 0.1;
    double gbrt_l2_lambda = 5.0;
    double test_fraction = 0.2;
};

// Splits off a fixed held-out test side, keeps `train_fraction` of the train
// side (seeded, without replacement), fits `family` and fills the report.
// family "external" scores `external` instead of fitting.
TrainedModel train_model(const std::vector<FeatureRow>& rows, const std::string& family,
                         double train_fraction, std::uint64_t seed,
                         const SurrogateParams& params = {},
                         const ExternalTable* external = nullptr);

// The model-comparison harness: every family x fraction cell on a shared
// held-out test split. Failed cells carry their error instead of aborting
// the table.
std::vector<FitReport> evaluate_models(const std::vector<FeatureRow>& rows,
                                       const std::vector<double>& fractions, std::uint64_t seed,
                                       const SurrogateParams& params = {});

ExternalTable load_external_table(const std::string& csv_path);

// Self-describing structured text, shortest round-trip doubles.
void write_model(const TrainedModel& model, const std::string& path);
TrainedModel read_model(const std::string& path);

}  // namespace copkit

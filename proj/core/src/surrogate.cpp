#include "copkit/surrogate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "copkit/errors.hpp"
#include "rng_util.hpp"

namespace copkit {

namespace {

constexpr double kRidge = 1e-8;

// Gauss-Jordan with partial pivoting on the (ridge-stabilized) normal matrix.
std::array<double, 7> solve7(std::array<std::array<double, 7>, 7> a, std::array<double, 7> b) {
    for (int col = 0; col < 7; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 7; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-300)
            throw FitError("design matrix is rank deficient beyond ridge rescue");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        const double inv = 1.0 / a[col][col];
        for (int c = col; c < 7; ++c) a[col][c] *= inv;
        b[col] *= inv;
        for (int r = 0; r < 7; ++r) {
            if (r == col) continue;
            const double factor = a[r][col];
            if (factor == 0.0) continue;
            for (int c = col; c < 7; ++c) a[r][c] -= factor * a[col][c];
            b[r] -= factor * b[col];
        }
    }
    return b;
}

double mean_target(const std::vector<FeatureRow>& rows) {
    double sum = 0.0;
    for (const FeatureRow& r : rows) sum += r.y;
    return sum / static_cast<double>(rows.size());
}

// Regularized squared-loss score of a node holding residual sum g over n rows.
double node_score(double g, double n, double lambda) { return g * g / (n + lambda); }

int build_tree_node(const std::vector<FeatureRow>& rows, const std::vector<double>& residual,
                    std::vector<int> indices, int depth, int max_depth, double lambda,
                    std::vector<GbrtNode>& nodes) {
    double g = 0.0;
    for (int idx : indices) g += residual[static_cast<std::size_t>(idx)];
    const double n = static_cast<double>(indices.size());

    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(node_id)].leaf_value = g / (n + lambda);
    if (depth >= max_depth || indices.size() < 2) return node_id;

    double best_gain = 1e-12;  // splits must strictly improve the score
    int best_feature = -1;
    double best_threshold = 0.0;
    const double parent_score = node_score(g, n, lambda);

    std::vector<int> sorted = indices;
    for (int feature = 0; feature < 6; ++feature) {
        const auto f = static_cast<std::size_t>(feature);
        std::sort(sorted.begin(), sorted.end(), [&](int lhs, int rhs) {
            const double a = rows[static_cast<std::size_t>(lhs)].x[f];
            const double b = rows[static_cast<std::size_t>(rhs)].x[f];
            return a != b ? a < b : lhs < rhs;
        });
        double left_g = 0.0;
        for (std::size_t k = 1; k < sorted.size(); ++k) {
            left_g += residual[static_cast<std::size_t>(sorted[k - 1])];
            const double lo = rows[static_cast<std::size_t>(sorted[k - 1])].x[f];
            const double hi = rows[static_cast<std::size_t>(sorted[k])].x[f];
            if (lo == hi) continue;
            const double threshold = 0.5 * (lo + hi);
            // Keep the scanned prefix/suffix consistent with the x < threshold
            // routing rule even when the midpoint rounds onto an endpoint.
            if (!(lo < threshold && threshold <= hi)) continue;
            const double nl = static_cast<double>(k);
            const double nr = n - nl;
            const double gain =
                node_score(left_g, nl, lambda) + node_score(g - left_g, nr, lambda) - parent_score;
            if (gain > best_gain) {
                best_gain = gain;
                best_feature = feature;
                best_threshold = threshold;
            }
        }
    }
    if (best_feature < 0) return node_id;

    std::vector<int> left, right;
    for (int idx : indices) {
        if (rows[static_cast<std::size_t>(idx)].x[static_cast<std::size_t>(best_feature)] <
            best_threshold)
            left.push_back(idx);
        else
            right.push_back(idx);
    }
    if (left.empty() || right.empty()) return node_id;  // degenerate rounding, keep the leaf

    const int left_id = build_tree_node(rows, residual, std::move(left), depth + 1, max_depth,
                                        lambda, nodes);
    const int right_id = build_tree_node(rows, residual, std::move(right), depth + 1, max_depth,
                                         lambda, nodes);
    GbrtNode& node = nodes[static_cast<std::size_t>(node_id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left_id;
    node.right = right_id;
    return node_id;
}

}  // namespace

std::array<double, 6> to_features(const MobilityConfig& config) {
    return {config.cio_db[0], config.cio_db[1], config.cio_db[2],
            config.hom_db[0], config.hom_db[1], config.hom_db[2]};
}

MobilityConfig to_config(const std::array<double, 6>& x) {
    MobilityConfig config;
    config.cio_db = {x[0], x[1], x[2]};
    config.hom_db = {x[3], x[4], x[5]};
    return config;
}

std::vector<FeatureRow> to_feature_rows(const SweepDataset& dataset) {
    std::vector<FeatureRow> rows;
    rows.reserve(dataset.records.size());
    for (const SweepRecord& r : dataset.records) {
        if (std::isnan(r.mean_sinr_db)) continue;
        rows.push_back({to_features(r.config), r.mean_sinr_db});
    }
    return rows;
}

double GbrtTree::value_at(const std::array<double, 6>& x) const {
    int node = 0;
    while (true) {
        const GbrtNode& n = nodes[static_cast<std::size_t>(node)];
        if (n.feature < 0) return n.leaf_value;
        node = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
}

std::string TrainedModel::family() const {
    if (std::holds_alternative<LinearModel>(model)) return "linear";
    if (std::holds_alternative<KnnModel>(model)) return "knn";
    if (std::holds_alternative<GbrtModel>(model)) return "gbrt";
    return "external";
}

std::pair<std::vector<FeatureRow>, std::vector<FeatureRow>> split(
    const std::vector<FeatureRow>& rows, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must lie in (0, 1)");
    const std::size_t n = rows.size();
    const auto n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n)));
    if (n_test < 1 || n_test >= n) throw FitError("split would leave an empty side");

    // Seeded test-index draw; both sides keep the original row order.
    std::vector<std::size_t> test_idx = detail::sample_indices(n, n_test, seed);
    std::vector<FeatureRow> train, test;
    train.reserve(n - n_test);
    test.reserve(n_test);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (next < test_idx.size() && test_idx[next] == i) {
            test.push_back(rows[i]);
            ++next;
        } else {
            train.push_back(rows[i]);
        }
    }
    return {std::move(train), std::move(test)};
}

LinearModel fit_linear(const std::vector<FeatureRow>& train) {
    if (train.size() < 7) throw FitError("linear fit needs at least 7 rows");
    std::array<std::array<double, 7>, 7> ata{};
    std::array<double, 7> aty{};
    for (const FeatureRow& row : train) {
        std::array<double, 7> phi;
        for (std::size_t i = 0; i < 6; ++i) phi[i] = row.x[i];
        phi[6] = 1.0;
        for (std::size_t i = 0; i < 7; ++i) {
            for (std::size_t j = 0; j < 7; ++j) ata[i][j] += phi[i] * phi[j];
            aty[i] += phi[i] * row.y;
        }
    }
    for (std::size_t i = 0; i < 7; ++i) ata[i][i] += kRidge;

    const std::array<double, 7> solution = solve7(ata, aty);
    LinearModel model;
    for (std::size_t i = 0; i < 6; ++i) model.w[i] = solution[i];
    model.b = solution[6];
    for (double v : solution)
        if (!std::isfinite(v)) throw FitError("linear fit produced non-finite coefficients");
    return model;
}

KnnModel fit_knn(const std::vector<FeatureRow>& train, int k) {
    if (k < 1) throw FitError("k must be at least 1");
    if (static_cast<std::size_t>(k) > train.size())
        throw FitError("k exceeds the number of training rows");
    return {k, train};
}

GbrtModel fit_gbrt(const std::vector<FeatureRow>& train, int n_trees, int max_depth,
                   double learning_rate, double l2_lambda, std::uint64_t seed) {
    if (train.size() < 10) throw FitError("gbrt fit needs at least 10 rows");
    if (n_trees < 0) throw FitError("n_trees must be non-negative");
    if (max_depth < 1) throw FitError("max_depth must be at least 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw FitError("learning_rate must lie in (0, 1]");
    if (l2_lambda < 0.0) throw FitError("l2_lambda must be non-negative");

    GbrtModel model;
    model.learning_rate = learning_rate;
    model.l2_lambda = l2_lambda;
    model.max_depth = max_depth;
    model.n_trees = n_trees;
    model.base_prediction = mean_target(train);
    (void)seed;  // fitting is deterministic; the seed is recorded in reports only

    std::vector<double> prediction(train.size(), model.base_prediction);
    std::vector<double> residual(train.size());
    std::vector<int> all(train.size());
    std::iota(all.begin(), all.end(), 0);

    for (int t = 0; t < n_trees; ++t) {
        for (std::size_t i = 0; i < train.size(); ++i) residual[i] = train[i].y - prediction[i];
        GbrtTree tree;
        build_tree_node(train, residual, all, 0, max_depth, l2_lambda, tree.nodes);
        for (std::size_t i = 0; i < train.size(); ++i)
            prediction[i] += learning_rate * tree.value_at(train[i].x);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

double predict(const LinearModel& model, const std::array<double, 6>& x) {
    double value = model.b;
    for (std::size_t i = 0; i < 6; ++i) value += model.w[i] * x[i];
    return value;
}

double predict(const KnnModel& model, const std::array<double, 6>& x) {
    const auto k = static_cast<std::size_t>(model.k);
    std::vector<std::pair<double, std::size_t>> by_distance;
    by_distance.reserve(model.training_rows.size());
    for (std::size_t i = 0; i < model.training_rows.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < 6; ++j) {
            const double diff = model.training_rows[i].x[j] - x[j];
            d2 += diff * diff;
        }
        by_distance.emplace_back(d2, i);
    }
    // Distance ties resolve to the lower training-row index.
    std::partial_sort(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(k),
                      by_distance.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += model.training_rows[by_distance[i].second].y;
    return sum / static_cast<double>(k);
}

double predict(const GbrtModel& model, const std::array<double, 6>& x) {
    double value = model.base_prediction;
    for (const GbrtTree& tree : model.trees) value += model.learning_rate * tree.value_at(x);
    return value;
}

double predict(const ExternalTable& model, const std::array<double, 6>& x) {
    if (model.rows.empty()) throw ConfigError("external table is empty");
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < model.rows.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < 6; ++j) {
            const double diff = model.rows[i].x[j] - x[j];
            d2 += diff * diff;
        }
        if (d2 < best) {
            best = d2;
            best_idx = i;
        }
    }
    return model.rows[best_idx].y;
}

double predict(const TrainedModel& model, const MobilityConfig& config) {
    MobilityConfig clamped = config;
    bool out_of_box = false;
    for (double& v : clamped.cio_db) {
        double c = std::clamp(v, kCioMinDb, kCioMaxDb);
        out_of_box |= c != v;
        v = c;
    }
    for (double& v : clamped.hom_db) {
        double c = std::clamp(v, kHomMinDb, kHomMaxDb);
        out_of_box |= c != v;
        v = c;
    }
    if (out_of_box) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
            std::fprintf(stderr, "copkit: prediction input left the COP box and was clamped\n");
    }
    const std::array<double, 6> x = to_features(clamped);
    return std::visit([&](const auto& m) { return predict(m, x); }, model.model);
}

double rmse(const TrainedModel& model, const std::vector<FeatureRow>& rows) {
    if (rows.empty()) throw ConfigError("rmse needs at least one row");
    double sq_sum = 0.0;
    for (const FeatureRow& row : rows) {
        const double r = predict(model, to_config(row.x)) - row.y;
        sq_sum += r * r;
    }
    return std::sqrt(sq_sum / static_cast<double>(rows.size()));
}

TrainedModel train_model(const std::vector<FeatureRow>& rows, const std::string& family,
                         double train_fraction, std::uint64_t seed, const SurrogateParams& params,
                         const ExternalTable* external) {
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw ConfigError("train_fraction must lie in (0, 1]");

    auto [train_all, test] = split(rows, params.test_fraction, seed);
    std::vector<FeatureRow> train;
    if (train_fraction < 1.0) {
        const auto m = static_cast<std::size_t>(
            std::floor(train_fraction * static_cast<double>(train_all.size())));
        if (m < 1) throw FitError("train fraction leaves no rows");
        for (std::size_t idx : detail::sample_indices(train_all.size(), m, seed + 1))
            train.push_back(train_all[idx]);
    } else {
        train = std::move(train_all);
    }

    TrainedModel trained;
    if (family == "linear") {
        trained.model = fit_linear(train);
    } else if (family == "knn") {
        trained.model = fit_knn(train, params.knn_k);
    } else if (family == "gbrt") {
        trained.model = fit_gbrt(train, params.gbrt_trees, params.gbrt_max_depth,
                                 params.gbrt_learning_rate, params.gbrt_l2_lambda, seed);
    } else if (family == "external") {
        if (external == nullptr) throw ConfigError("family 'external' needs a prediction table");
        trained.model = *external;
    } else {
        throw ConfigError("unknown model family '" + family + "'");
    }

    FitReport& report = trained.report;
    report.model_name = family;
    report.train_fraction = train_fraction;
    report.n_train = static_cast<int>(train.size());
    report.n_test = static_cast<int>(test.size());
    report.seed = seed;
    report.rmse_train = rmse(trained, train);
    report.rmse_test = rmse(trained, test);
    return trained;
}

std::vector<FitReport> evaluate_models(const std::vector<FeatureRow>& rows,
                                       const std::vector<double>& fractions, std::uint64_t seed,
                                       const SurrogateParams& params) {
    static const std::vector<std::string> kFamilies = {"linear", "knn", "gbrt"};
    std::vector<FitReport> reports;
    for (double fraction : fractions) {
        for (const std::string& family : kFamilies) {
            try {
                reports.push_back(train_model(rows, family, fraction, seed, params).report);
            } catch (const std::exception& e) {
                FitReport failed;
                failed.model_name = family;
                failed.train_fraction = fraction;
                failed.seed = seed;
                failed.rmse_train = std::numeric_limits<double>::quiet_NaN();
                failed.rmse_test = std::numeric_limits<double>::quiet_NaN();
                failed.error = e.what();
                reports.push_back(failed);
            }
        }
    }
    return reports;
}

}  // namespace copkit

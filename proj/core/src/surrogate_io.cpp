#include <algorithm>
#include <cmath>
#include <fstream>

#include "copkit/errors.hpp"
#include "copkit/surrogate.hpp"
#include "text_util.hpp"

namespace copkit {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::parse_int;
using detail::split;
using detail::trim;

constexpr const char* kMagic = "copkit-model v1";

// Sequential reader over non-blank, non-comment lines.
struct LineReader {
    std::istream& in;
    int line_no = 0;
    std::string current;

    bool next() {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            std::string_view text = trim(line);
            if (text.empty() || text.front() == '#') continue;
            current = std::string(text);
            return true;
        }
        return false;
    }

    std::string expect(const char* what) {
        if (!next()) throw ParseError(std::string("unexpected end of file, expected ") + what,
                                      line_no);
        return current;
    }

    std::string expect_key(const std::string& key) {
        std::string line = expect(("'" + key + " = ...'").c_str());
        std::size_t eq = line.find('=');
        if (eq == std::string::npos || std::string(trim(line.substr(0, eq))) != key)
            throw ParseError("expected key '" + key + "'", line_no);
        return std::string(trim(line.substr(eq + 1)));
    }

    void expect_literal(const std::string& literal) {
        if (expect(("'" + literal + "'").c_str()) != literal)
            throw ParseError("expected '" + literal + "'", line_no);
    }
};

std::vector<std::string> row_fields(const std::string& line, int line_no, std::size_t count,
                                    const char* tag) {
    auto fields = split(line, ' ');
    std::erase_if(fields, [](const std::string& f) { return f.empty(); });
    if (fields.size() != count || fields[0] != tag)
        throw ParseError(std::string("malformed '") + tag + "' record", line_no);
    return fields;
}

void write_rows(std::ostream& out, const std::vector<FeatureRow>& rows) {
    out << "rows = " << rows.size() << "\n";
    for (const FeatureRow& r : rows) {
        out << "row";
        for (double v : r.x) out << ' ' << format_double(v);
        out << ' ' << format_double(r.y) << "\n";
    }
}

std::vector<FeatureRow> read_rows(LineReader& reader) {
    const auto count = static_cast<std::size_t>(parse_int(reader.expect_key("rows"), reader.line_no));
    std::vector<FeatureRow> rows;
    rows.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto f = row_fields(reader.expect("a 'row' record"), reader.line_no, 8, "row");
        FeatureRow row;
        for (std::size_t j = 0; j < 6; ++j) row.x[j] = parse_double(f[1 + j], reader.line_no);
        row.y = parse_double(f[7], reader.line_no);
        rows.push_back(row);
    }
    return rows;
}

void write_tree(std::ostream& out, const GbrtTree& tree) {
    out << "tree " << tree.nodes.size() << "\n";
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const GbrtNode& n = tree.nodes[i];
        if (n.feature < 0)
            out << "node " << i << " leaf " << format_double(n.leaf_value) << "\n";
        else
            out << "node " << i << " split " << n.feature << ' ' << format_double(n.threshold)
                << ' ' << n.left << ' ' << n.right << "\n";
    }
}

GbrtTree read_tree(LineReader& reader) {
    auto header = split(reader.expect("a 'tree' record"), ' ');
    if (header.size() != 2 || header[0] != "tree")
        throw ParseError("expected 'tree <node_count>'", reader.line_no);
    const auto count = static_cast<std::size_t>(parse_int(header[1], reader.line_no));
    GbrtTree tree;
    tree.nodes.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto fields = split(reader.expect("a 'node' record"), ' ');
        std::erase_if(fields, [](const std::string& f) { return f.empty(); });
        if (fields.size() < 4 || fields[0] != "node")
            throw ParseError("malformed 'node' record", reader.line_no);
        const auto id = static_cast<std::size_t>(parse_int(fields[1], reader.line_no));
        if (id != i) throw ParseError("node records out of order", reader.line_no);
        GbrtNode& node = tree.nodes[i];
        if (fields[2] == "leaf" && fields.size() == 4) {
            node.leaf_value = parse_double(fields[3], reader.line_no);
        } else if (fields[2] == "split" && fields.size() == 7) {
            node.feature = static_cast<int>(parse_int(fields[3], reader.line_no));
            node.threshold = parse_double(fields[4], reader.line_no);
            node.left = static_cast<int>(parse_int(fields[5], reader.line_no));
            node.right = static_cast<int>(parse_int(fields[6], reader.line_no));
            if (node.feature < 0 || node.feature > 5)
                throw ParseError("split feature out of range", reader.line_no);
        } else {
            throw ParseError("malformed 'node' record", reader.line_no);
        }
    }
    return tree;
}

}  // namespace

void write_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << kMagic << "\n";
    out << "family = " << model.family() << "\n";
    const FitReport& r = model.report;
    out << "[report]\n";
    out << "model_name = " << r.model_name << "\n";
    out << "rmse_train = " << format_double(r.rmse_train) << "\n";
    out << "rmse_test = " << format_double(r.rmse_test) << "\n";
    out << "train_fraction = " << format_double(r.train_fraction) << "\n";
    out << "n_train = " << r.n_train << "\n";
    out << "n_test = " << r.n_test << "\n";
    out << "seed = " << r.seed << "\n";
    out << "error = " << r.error << "\n";
    out << "[" << model.family() << "]\n";
    if (const auto* linear = std::get_if<LinearModel>(&model.model)) {
        out << "w =";
        for (double v : linear->w) out << ' ' << format_double(v);
        out << "\n";
        out << "b = " << format_double(linear->b) << "\n";
    } else if (const auto* knn = std::get_if<KnnModel>(&model.model)) {
        out << "k = " << knn->k << "\n";
        write_rows(out, knn->training_rows);
    } else if (const auto* gbrt = std::get_if<GbrtModel>(&model.model)) {
        out << "learning_rate = " << format_double(gbrt->learning_rate) << "\n";
        out << "l2_lambda = " << format_double(gbrt->l2_lambda) << "\n";
        out << "base_prediction = " << format_double(gbrt->base_prediction) << "\n";
        out << "max_depth = " << gbrt->max_depth << "\n";
        out << "n_trees = " << gbrt->n_trees << "\n";
        for (const GbrtTree& tree : gbrt->trees) write_tree(out, tree);
    } else if (const auto* external = std::get_if<ExternalTable>(&model.model)) {
        write_rows(out, external->rows);
    }
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

TrainedModel read_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file '" + path + "'");
    LineReader reader{in, 0, {}};
    try {
        reader.expect_literal(kMagic);
        const std::string family = reader.expect_key("family");

        TrainedModel model;
        reader.expect_literal("[report]");
        FitReport& r = model.report;
        r.model_name = reader.expect_key("model_name");
        r.rmse_train = parse_double(reader.expect_key("rmse_train"), reader.line_no);
        r.rmse_test = parse_double(reader.expect_key("rmse_test"), reader.line_no);
        r.train_fraction = parse_double(reader.expect_key("train_fraction"), reader.line_no);
        r.n_train = static_cast<int>(parse_int(reader.expect_key("n_train"), reader.line_no));
        r.n_test = static_cast<int>(parse_int(reader.expect_key("n_test"), reader.line_no));
        r.seed = static_cast<std::uint64_t>(parse_int(reader.expect_key("seed"), reader.line_no));
        r.error = reader.expect_key("error");

        reader.expect_literal("[" + family + "]");
        if (family == "linear") {
            LinearModel linear;
            auto w = split(reader.expect_key("w"), ' ');
            std::erase_if(w, [](const std::string& f) { return f.empty(); });
            if (w.size() != 6) throw ParseError("linear weights need 6 values", reader.line_no);
            for (std::size_t i = 0; i < 6; ++i) linear.w[i] = parse_double(w[i], reader.line_no);
            linear.b = parse_double(reader.expect_key("b"), reader.line_no);
            model.model = linear;
        } else if (family == "knn") {
            KnnModel knn;
            knn.k = static_cast<int>(parse_int(reader.expect_key("k"), reader.line_no));
            knn.training_rows = read_rows(reader);
            if (knn.k < 1 || static_cast<std::size_t>(knn.k) > knn.training_rows.size())
                throw ParseError("knn k is inconsistent with the stored rows", reader.line_no);
            model.model = std::move(knn);
        } else if (family == "gbrt") {
            GbrtModel gbrt;
            gbrt.learning_rate = parse_double(reader.expect_key("learning_rate"), reader.line_no);
            gbrt.l2_lambda = parse_double(reader.expect_key("l2_lambda"), reader.line_no);
            gbrt.base_prediction =
                parse_double(reader.expect_key("base_prediction"), reader.line_no);
            gbrt.max_depth = static_cast<int>(parse_int(reader.expect_key("max_depth"), reader.line_no));
            gbrt.n_trees = static_cast<int>(parse_int(reader.expect_key("n_trees"), reader.line_no));
            for (int t = 0; t < gbrt.n_trees; ++t) gbrt.trees.push_back(read_tree(reader));
            model.model = std::move(gbrt);
        } else if (family == "external") {
            ExternalTable table;
            table.rows = read_rows(reader);
            model.model = std::move(table);
        } else {
            throw ParseError("unknown model family '" + family + "'", reader.line_no);
        }
        return model;
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

ExternalTable load_external_table(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw ConfigError("cannot open external predictions file '" + csv_path + "'");

    ExternalTable table;
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        auto f = split(text, ',');
        for (auto& field : f) field = std::string(trim(field));
        if (!saw_header) {
            // Dataset schema with the outage column optional.
            static const std::vector<std::string> kRequired = {
                "cio1", "cio2", "cio3", "hom1", "hom2", "hom3", "mean_sinr_db"};
            for (const std::string& column : kRequired)
                if (std::find(f.begin(), f.end(), column) == f.end())
                    throw ParseError(csv_path + ": missing column '" + column + "'", line_no);
            const bool with_outage = f.size() == 8 && f[7] == "outage_count";
            if (!std::equal(kRequired.begin(), kRequired.end(), f.begin()) ||
                (f.size() != 7 && !with_outage))
                throw ParseError(csv_path + ": unexpected header", line_no);
            columns = f.size();
            saw_header = true;
            continue;
        }
        if (f.size() != columns)
            throw ParseError(csv_path + ": expected " + std::to_string(columns) + " fields",
                             line_no);
        FeatureRow row;
        for (std::size_t i = 0; i < 6; ++i) row.x[i] = parse_double(f[i], line_no);
        row.y = parse_double(f[6], line_no);
        if (std::isnan(row.y)) continue;  // outage rows carry no prediction
        table.rows.push_back(row);
    }
    if (!saw_header) throw ParseError(csv_path + ": no header found");
    if (table.rows.empty()) throw ParseError(csv_path + ": no prediction rows");
    return table;
}

}  // namespace copkit

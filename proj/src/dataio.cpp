#include "sigclass/dataio.hpp"

#include "detail.hpp"
#include "sigclass/error.hpp"
#include "sigclass/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace sigclass {

namespace detail {

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        // RFC 4180 quoting within a single line.
        std::vector<std::string> fields(1);
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    fields.back() += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    fields.back() += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                fields.emplace_back();
            } else {
                fields.back() += c;
            }
        }
        if (quoted)
            throw Error(Errc::parse, path.string() + ":" + std::to_string(line_no) + ": unterminated quote");
        rows.push_back(std::move(fields));
    }
    return rows;
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::io, "cannot write '" + path.string() + "'");
        out << content;
        if (!out.flush()) throw Error(Errc::io, "write failed for '" + path.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(Errc::io, "cannot move output into place at '" + path.string() + "'");
    }
}

} // namespace detail

LabeledDataset::LabeledDataset(FeatureMatrix features, std::vector<std::string> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
    if (labels_.size() != static_cast<std::size_t>(features_.samples()))
        throw Error(Errc::label_mismatch, std::to_string(labels_.size()) + " labels for " +
                                              std::to_string(features_.samples()) + " samples");
    for (std::size_t j = 0; j < labels_.size(); ++j)
        if (labels_[j].empty())
            throw Error(Errc::label_mismatch, "empty label for sample '" + features_.sample_ids()[j] + "'");
    label_set_ = labels_;
    std::sort(label_set_.begin(), label_set_.end());
    label_set_.erase(std::unique(label_set_.begin(), label_set_.end()), label_set_.end());
}

FeatureMatrix load_features_csv(const std::filesystem::path& path) {
    const auto rows = detail::read_csv(path);
    if (rows.size() < 2 || rows.front().size() < 2)
        throw Error(Errc::empty_input, "'" + path.string() + "' has no samples or no features");
    const auto& header = rows.front();
    std::vector<std::string> ids(header.begin() + 1, header.end());
    const auto m = static_cast<Eigen::Index>(ids.size());
    const auto n = static_cast<Eigen::Index>(rows.size() - 1);
    Matrix values(n, m);
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i) + 1];
        if (static_cast<Eigen::Index>(row.size()) != m + 1)
            throw Error(Errc::parse, path.string() + ": feature row " + std::to_string(i + 1) + " has " +
                                         std::to_string(row.size()) + " cells, expected " + std::to_string(m + 1));
        names.push_back(row.front());
        for (Eigen::Index j = 0; j < m; ++j) {
            const std::string& cell = row[static_cast<std::size_t>(j) + 1];
            const std::string where = path.string() + ": feature '" + row.front() + "' (row " +
                                      std::to_string(i + 1) + "), sample '" + ids[static_cast<std::size_t>(j)] +
                                      "' (column " + std::to_string(j + 1) + ")";
            const auto v = detail::parse_double(cell);
            if (!v) throw Error(Errc::parse, where + ": '" + cell + "' is not a number");
            if (!std::isfinite(*v)) throw Error(Errc::non_finite_input, where + ": non-finite value '" + cell + "'");
            if (*v < 0.0) throw Error(Errc::negative_input, where + ": negative value '" + cell + "'");
            values(i, j) = *v;
        }
    }
    return FeatureMatrix(std::move(values), std::move(ids), std::move(names));
}

LabeledDataset load_csv(const std::filesystem::path& features_path, const std::filesystem::path& labels_path) {
    FeatureMatrix features = load_features_csv(features_path);
    const auto rows = detail::read_csv(labels_path);
    if (rows.empty()) throw Error(Errc::empty_input, "'" + labels_path.string() + "' is empty");
    const auto& header = rows.front();
    if (header.size() < 2 || header[0] != "sample_id" || header[1] != "label")
        throw Error(Errc::missing_column, labels_path.string() + ": header must start with sample_id,label");
    std::unordered_map<std::string, std::string> by_id;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() < 2)
            throw Error(Errc::parse, labels_path.string() + ": row " + std::to_string(r) + " has too few cells");
        if (!by_id.emplace(rows[r][0], rows[r][1]).second)
            throw Error(Errc::id_mismatch, labels_path.string() + ": duplicate sample id '" + rows[r][0] + "'");
    }
    std::vector<std::string> labels;
    labels.reserve(features.sample_ids().size());
    for (const auto& id : features.sample_ids()) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw Error(Errc::id_mismatch, "sample '" + id + "' has no label");
        labels.push_back(it->second);
    }
    if (by_id.size() != labels.size())
        throw Error(Errc::id_mismatch, labels_path.string() + " lists sample ids absent from the features file");
    return LabeledDataset(std::move(features), std::move(labels));
}

void save_features_csv(const FeatureMatrix& x, const std::filesystem::path& path) {
    std::string out = "feature";
    for (const auto& id : x.sample_ids()) out += "," + detail::csv_field(id);
    out += "\n";
    for (Eigen::Index i = 0; i < x.features(); ++i) {
        out += detail::csv_field(x.feature_names()[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < x.samples(); ++j) {
            out += ',';
            out += detail::format_double(x.values()(i, j));
        }
        out += "\n";
    }
    detail::write_text_file(path, out);
}

void save_csv(const LabeledDataset& ds, const std::filesystem::path& features_path,
              const std::filesystem::path& labels_path) {
    save_features_csv(ds.features(), features_path);
    std::string out = "sample_id,label\n";
    for (std::size_t j = 0; j < ds.labels().size(); ++j)
        out += detail::csv_field(ds.features().sample_ids()[j]) + "," + detail::csv_field(ds.labels()[j]) + "\n";
    detail::write_text_file(labels_path, out);
}

void save_truth_csv(const LabeledDataset& ds, const std::vector<bool>& novel_flags,
                    const std::filesystem::path& path) {
    if (novel_flags.size() != ds.labels().size())
        throw Error(Errc::dimension_mismatch, "novel flags do not cover every sample");
    std::string out = "sample_id,label,novel\n";
    for (std::size_t j = 0; j < ds.labels().size(); ++j)
        out += detail::csv_field(ds.features().sample_ids()[j]) + "," + detail::csv_field(ds.labels()[j]) + "," +
               (novel_flags[j] ? "1" : "0") + "\n";
    detail::write_text_file(path, out);
}

const char* to_string(NormalizationMode mode) noexcept {
    return mode == NormalizationMode::per_feature_max ? "per_feature_max" : "none";
}

NormalizationMode parse_normalization_mode(const std::string& text) {
    if (text == "per_feature_max") return NormalizationMode::per_feature_max;
    if (text == "none") return NormalizationMode::none;
    throw Error(Errc::invalid_argument, "unknown normalization mode '" + text + "'");
}

NormalizedDataset normalize(const LabeledDataset& ds, NormalizationMode mode) {
    const FeatureMatrix& x = ds.features();
    if (x.values().isZero(0.0)) throw Error(Errc::degenerate_input, "feature matrix is identically zero");
    NormalizationParams params;
    params.mode = mode;
    params.input_features = x.feature_names();
    for (Eigen::Index i = 0; i < x.features(); ++i) {
        const double max = x.values().row(i).maxCoeff();
        if (mode == NormalizationMode::none) {
            params.kept.push_back(static_cast<std::size_t>(i));
            params.scale.push_back(1.0);
        } else if (max > 0.0) {
            params.kept.push_back(static_cast<std::size_t>(i));
            params.scale.push_back(max);
        } else {
            params.dropped.push_back(x.feature_names()[static_cast<std::size_t>(i)]);
        }
    }
    FeatureMatrix scaled = apply_normalization(params, x);
    return {LabeledDataset(std::move(scaled), ds.labels()), std::move(params)};
}

FeatureMatrix apply_normalization(const NormalizationParams& params, const FeatureMatrix& x) {
    if (x.feature_names() != params.input_features)
        throw Error(Errc::dimension_mismatch, "input features (" + std::to_string(x.features()) +
                                                  ") do not match the " +
                                                  std::to_string(params.input_features.size()) +
                                                  " features the parameters were fitted on");
    Matrix out(static_cast<Eigen::Index>(params.kept.size()), x.samples());
    std::vector<std::string> names;
    for (std::size_t r = 0; r < params.kept.size(); ++r) {
        const auto src = static_cast<Eigen::Index>(params.kept[r]);
        if (params.scale[r] == 1.0)
            out.row(static_cast<Eigen::Index>(r)) = x.values().row(src);
        else
            out.row(static_cast<Eigen::Index>(r)) = x.values().row(src) / params.scale[r];
        names.push_back(params.input_features[params.kept[r]]);
    }
    return FeatureMatrix(std::move(out), x.sample_ids(), std::move(names));
}

HoldoutSplit split_holdout(const LabeledDataset& ds, const std::string& holdout_class, double test_fraction,
                           std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error(Errc::invalid_argument, "test_fraction must lie in (0, 1)");
    const auto& labels = ds.labels();
    if (!std::binary_search(ds.label_set().begin(), ds.label_set().end(), holdout_class))
        throw Error(Errc::unknown_class, "holdout class '" + holdout_class + "' is not present");

    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t j = 0; j < labels.size(); ++j) by_class[labels[j]].push_back(j);

    CounterRng rng(seed);
    std::vector<bool> in_test(labels.size(), false);
    std::uint64_t stream = 0;
    for (auto& [label, members] : by_class) {
        ++stream;
        if (label == holdout_class) {
            for (std::size_t j : members) in_test[j] = true;
            continue;
        }
        const std::size_t total = members.size();
        const auto take = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(total) + 1e-9)));
        if (take >= total)
            throw Error(Errc::class_emptied, "class '" + label + "' would have no training samples");
        CounterRng class_rng = rng.split(stream);
        for (std::size_t i = total - 1; i > 0; --i) std::swap(members[i], members[class_rng.index(i + 1)]);
        for (std::size_t i = 0; i < take; ++i) in_test[members[i]] = true;
    }

    std::vector<std::size_t> train_idx, test_idx;
    std::vector<std::string> train_labels, test_labels;
    std::vector<bool> novel;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (in_test[j]) {
            test_idx.push_back(j);
            test_labels.push_back(labels[j]);
            novel.push_back(labels[j] == holdout_class);
        } else {
            train_idx.push_back(j);
            train_labels.push_back(labels[j]);
        }
    }
    return {LabeledDataset(ds.features().select_samples(train_idx), std::move(train_labels)),
            LabeledDataset(ds.features().select_samples(test_idx), std::move(test_labels)), std::move(novel)};
}

} // namespace sigclass

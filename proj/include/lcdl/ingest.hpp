#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lcdl/model.hpp"

namespace lcdl {

/// External label strings; entry c - 1 is the name of internal class c.
struct LabelMap {
  std::vector<std::string> names;

  int num_classes() const { return static_cast<int>(names.size()); }
  const std::string& name(int c) const { return names.at(c - 1); }
  /// Internal class of an external label, or nullopt when unknown.
  std::optional<int> find(const std::string& name) const;

  bool operator==(const LabelMap&) const = default;
};

struct PcaTransform {
  Vector mean;     // m_in
  Matrix basis;    // m_in × m_out, orthonormal columns
  double explained_variance_ratio = 1.0;
  /// Variance along each kept direction, non-increasing.
  Vector eigenvalues;

  Eigen::Index input_dim() const { return basis.rows(); }
  Eigen::Index output_dim() const { return basis.cols(); }
};

namespace ingest {

enum class Format { Csv, RawF64 };

struct LoadedMatrix {
  FeatureMatrix features;
  /// Present when the file carries labels (CSV header row or raw label block).
  std::optional<std::vector<std::string>> labels;
};

/// Picks RawF64 when the file starts with the raw magic, Csv otherwise.
Format detect_format(const std::filesystem::path& path);

LoadedMatrix load_matrix(const std::filesystem::path& path, Format format);
LoadedMatrix load_matrix(const std::filesystem::path& path);

/// Parses CSV text; ParseError and DimensionInconsistent carry the 1-based line.
LoadedMatrix parse_csv(std::istream& in);

/// Writes `label,f1,...,fm` rows when labels are given, bare feature rows
/// otherwise. Values are printed with 17 significant digits.
void write_csv(const std::filesystem::path& path, const FeatureMatrix& features,
               const std::vector<std::string>* labels);

/// Raw labels must be unsigned integers.
void write_raw(const std::filesystem::path& path, const FeatureMatrix& features,
               const std::vector<std::uint32_t>* labels);

/// Maps external labels onto 1..C. Labels that all parse as integers are
/// ordered numerically, otherwise lexicographically.
std::pair<LabelMap, Labels> encode_labels(const std::vector<std::string>& raw);

/// Encodes labels against an existing map; unknown labels raise ParseError.
Labels encode_with(const LabelMap& map, const std::vector<std::string>& raw);

struct Dimensions {
  Eigen::Index count;
};
struct VarianceFraction {
  double fraction;
};
using PcaTarget = std::variant<Dimensions, VarianceFraction>;

PcaTransform pca_fit(const FeatureMatrix& samples, PcaTarget target);

/// basis^T (X - mean).
FeatureMatrix pca_apply(const PcaTransform& transform,
                        const FeatureMatrix& samples);

/// basis Y + mean.
FeatureMatrix pca_reconstruct(const PcaTransform& transform,
                              const FeatureMatrix& projected);

struct Split {
  LabeledDataset train;
  LabeledDataset test;
  /// Original column index of every train / test column.
  std::vector<Eigen::Index> train_index;
  std::vector<Eigen::Index> test_index;
};

/// Draws exactly train_per_class samples of each class for training and
/// sends the rest to test. Columns keep their original relative order.
Split split_per_class(const LabeledDataset& ds, int train_per_class,
                      std::uint64_t seed);

}  // namespace ingest
}  // namespace lcdl

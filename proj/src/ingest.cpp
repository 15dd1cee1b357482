#include "lcdl/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string_view>

#include "binary_io.hpp"
#include "lcdl/random.hpp"

namespace lcdl {

std::optional<int> LabelMap::find(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<int>(it - names.begin()) + 1;
}

namespace ingest {

namespace {

constexpr char kRawMagic[4] = {'L', 'C', 'D', 'M'};
constexpr char kLabelMagic[4] = {'L', 'B', 'L', 'S'};
constexpr std::uint8_t kRawVersion = 0x01;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

std::optional<long long> parse_integer(std::string_view s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  return in;
}

LoadedMatrix read_raw(std::istream& in) {
  constexpr auto kCode = ErrorCode::ParseError;
  char magic[4];
  binary::read_exact(in, magic, 4, kCode, "raw magic");
  if (!std::equal(magic, magic + 4, kRawMagic)) {
    throw Error(kCode, "missing LCDM magic");
  }
  if (const auto version = binary::get_u8(in, kCode, "raw version");
      version != kRawVersion) {
    throw Error(kCode, "unsupported raw version " + std::to_string(version));
  }
  const std::uint64_t m = binary::get_u64(in, kCode, "row count");
  const std::uint64_t n = binary::get_u64(in, kCode, "column count");
  if (m == 0 || n == 0 || m > (1ull << 32) || n > (1ull << 32)) {
    throw Error(ErrorCode::DimensionInconsistent,
                "raw dimensions " + std::to_string(m) + "x" + std::to_string(n));
  }
  LoadedMatrix out;
  out.features.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < out.features.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.features.rows(); ++i) {
      out.features(i, j) = binary::get_f64(in, ErrorCode::DimensionInconsistent,
                                           "raw values");
    }
  }
  char tag[4];
  in.read(tag, 4);
  if (in.gcount() == 0) return out;
  if (in.gcount() != 4 || !std::equal(tag, tag + 4, kLabelMagic)) {
    throw Error(kCode, "unexpected trailing bytes after raw values");
  }
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::uint64_t j = 0; j < n; ++j) {
    labels.push_back(std::to_string(binary::get_u32(in, kCode, "raw labels")));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(kCode, "unexpected trailing bytes after raw labels");
  }
  out.labels = std::move(labels);
  return out;
}

}  // namespace

Format detect_format(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::equal(magic, magic + 4, kRawMagic)
             ? Format::RawF64
             : Format::Csv;
}

LoadedMatrix parse_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  bool header = false;
  std::size_t width = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (line_no == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    if (view.empty()) continue;
    auto fields = split_fields(view);
    if (rows.empty() && !header && fields.front() == "label") {
      header = true;
      width = fields.size() - 1;
      if (width == 0) {
        throw Error(ErrorCode::ParseError, "header has no feature columns",
                    line_no);
      }
      continue;
    }
    const std::size_t first = header ? 1 : 0;
    const std::size_t count = fields.size() - first;
    if (width == 0) width = count;
    if (count != width || (header && fields.size() < 2)) {
      throw Error(ErrorCode::DimensionInconsistent,
                  "line " + std::to_string(line_no) + " has " +
                      std::to_string(count) + " features, expected " +
                      std::to_string(width),
                  line_no);
    }
    std::vector<double> row;
    row.reserve(width);
    for (std::size_t f = first; f < fields.size(); ++f) {
      const auto v = parse_double(fields[f]);
      if (!v) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": '" +
                        std::string(fields[f]) + "' is not a number",
                    line_no);
      }
      row.push_back(*v);
    }
    if (header) {
      if (fields.front().empty()) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": empty label", line_no);
      }
      labels.emplace_back(fields.front());
    }
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read failure");
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "no samples in CSV input");

  LoadedMatrix out;
  out.features.resize(static_cast<Eigen::Index>(width),
                      static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t i = 0; i < width; ++i) {
      out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[j][i];
    }
  }
  if (header) out.labels = std::move(labels);
  return out;
}

LoadedMatrix load_matrix(const std::filesystem::path& path, Format format) {
  std::ifstream in = open_input(path);
  return format == Format::RawF64 ? read_raw(in) : parse_csv(in);
}

LoadedMatrix load_matrix(const std::filesystem::path& path) {
  return load_matrix(path, detect_format(path));
}

void write_csv(const std::filesystem::path& path, const FeatureMatrix& features,
               const std::vector<std::string>* labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  if (labels) {
    out << "label";
    for (Eigen::Index i = 0; i < features.rows(); ++i) out << ",f" << (i + 1);
    out << '\n';
  }
  char buf[32];
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    if (labels) out << (*labels)[static_cast<std::size_t>(j)] << ',';
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", features(i, j));
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path.string());
}

void write_raw(const std::filesystem::path& path, const FeatureMatrix& features,
               const std::vector<std::uint32_t>* labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(kRawMagic, 4);
  binary::put_u8(out, kRawVersion);
  binary::put_u64(out, static_cast<std::uint64_t>(features.rows()));
  binary::put_u64(out, static_cast<std::uint64_t>(features.cols()));
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      binary::put_f64(out, features(i, j));
    }
  }
  if (labels) {
    out.write(kLabelMagic, 4);
    for (std::uint32_t y : *labels) binary::put_u32(out, y);
  }
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path.string());
}

std::pair<LabelMap, Labels> encode_labels(const std::vector<std::string>& raw) {
  std::vector<std::string> unique(raw.begin(), raw.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  const bool numeric = std::all_of(unique.begin(), unique.end(), [](const auto& s) {
    return parse_integer(s).has_value();
  });
  if (numeric) {
    std::stable_sort(unique.begin(), unique.end(),
                     [](const std::string& a, const std::string& b) {
                       return *parse_integer(a) < *parse_integer(b);
                     });
  }
  LabelMap map{std::move(unique)};
  return {map, encode_with(map, raw)};
}

Labels encode_with(const LabelMap& map, const std::vector<std::string>& raw) {
  Labels out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto c = map.find(raw[i]);
    if (!c) {
      throw Error(ErrorCode::ParseError,
                  "label '" + raw[i] + "' at sample " + std::to_string(i) +
                      " is unknown",
                  static_cast<long>(i));
    }
    out.push_back(*c);
  }
  return out;
}

PcaTransform pca_fit(const FeatureMatrix& samples, PcaTarget target) {
  const Eigen::Index m = samples.rows();
  const Eigen::Index n = samples.cols();
  if (n < 2) {
    throw Error(ErrorCode::InvalidParameter, "PCA needs at least two samples");
  }
  PcaTransform t;
  t.mean = samples.rowwise().mean();
  const Matrix centered = samples.colwise() - t.mean;
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const Vector eig = sv.array().square() / static_cast<double>(n - 1);
  const double total = eig.sum();

  const double cutoff = static_cast<double>(std::max(m, n)) *
                        std::numeric_limits<double>::epsilon() *
                        (sv.size() ? sv[0] : 0.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > cutoff) ++rank;

  Eigen::Index keep = 0;
  if (const auto* dims = std::get_if<Dimensions>(&target)) {
    if (dims->count < 1) {
      throw Error(ErrorCode::InvalidParameter, "PCA dimension must be >= 1");
    }
    if (dims->count > std::min(m, n)) {
      throw Error(ErrorCode::TargetTooLarge,
                  "PCA dimension " + std::to_string(dims->count) +
                      " exceeds min(m, n) = " + std::to_string(std::min(m, n)));
    }
    keep = dims->count;
  } else {
    const double f = std::get<VarianceFraction>(target).fraction;
    if (!(f > 0.0 && f <= 1.0)) {
      throw Error(ErrorCode::InvalidParameter,
                  "variance fraction must lie in (0, 1]");
    }
    keep = 1;
    if (total > 0.0) {
      double cumulative = 0.0;
      for (keep = 0; keep < rank;) {
        cumulative += eig[keep];
        ++keep;
        if (cumulative / total >= f - 1e-12) break;
      }
      keep = std::max<Eigen::Index>(keep, 1);
    }
  }

  t.basis = svd.matrixU().leftCols(keep);
  for (Eigen::Index j = 0; j < keep; ++j) {
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < m; ++i) {
      if (std::abs(t.basis(i, j)) > std::abs(t.basis(arg, j))) arg = i;
    }
    if (t.basis(arg, j) < 0.0) t.basis.col(j) *= -1.0;
  }
  t.eigenvalues = eig.head(keep);
  t.explained_variance_ratio = total > 0.0 ? t.eigenvalues.sum() / total : 1.0;
  return t;
}

FeatureMatrix pca_apply(const PcaTransform& transform,
                        const FeatureMatrix& samples) {
  if (samples.rows() != transform.mean.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "input has " + std::to_string(samples.rows()) +
                    " features, PCA expects " +
                    std::to_string(transform.mean.size()));
  }
  return transform.basis.transpose() * (samples.colwise() - transform.mean);
}

FeatureMatrix pca_reconstruct(const PcaTransform& transform,
                              const FeatureMatrix& projected) {
  if (projected.rows() != transform.basis.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "projected input does not match the PCA output dimension");
  }
  return (transform.basis * projected).colwise() + transform.mean;
}

Split split_per_class(const LabeledDataset& ds, int train_per_class,
                      std::uint64_t seed) {
  if (static_cast<Eigen::Index>(ds.labels.size()) != ds.size()) {
    throw Error(ErrorCode::LengthMismatch, "labels do not match samples");
  }
  if (train_per_class < 1) {
    throw Error(ErrorCode::InvalidParameter, "train_per_class must be >= 1");
  }
  Rng rng(seed);
  std::vector<bool> in_train(ds.labels.size(), false);
  for (int c = 1; c <= ds.num_classes; ++c) {
    std::vector<Eigen::Index> pool = class_indices(ds.labels, c);
    if (pool.size() < static_cast<std::size_t>(train_per_class) + 1) {
      throw Error(ErrorCode::InsufficientClassSamples,
                  "class " + std::to_string(c) + " has " +
                      std::to_string(pool.size()) + " samples, needs " +
                      std::to_string(train_per_class + 1),
                  c);
    }
    const auto size = static_cast<std::uint64_t>(pool.size());
    for (std::uint64_t j = 0; j < static_cast<std::uint64_t>(train_per_class); ++j) {
      const std::uint64_t r = j + rng.uniform_index(size - j);
      std::swap(pool[j], pool[r]);
      in_train[static_cast<std::size_t>(pool[j])] = true;
    }
  }

  Split out;
  for (std::size_t i = 0; i < in_train.size(); ++i) {
    (in_train[i] ? out.train_index : out.test_index)
        .push_back(static_cast<Eigen::Index>(i));
  }
  auto gather = [&](const std::vector<Eigen::Index>& index) {
    LabeledDataset part;
    part.num_classes = ds.num_classes;
    part.features.resize(ds.dim(), static_cast<Eigen::Index>(index.size()));
    for (std::size_t j = 0; j < index.size(); ++j) {
      part.features.col(static_cast<Eigen::Index>(j)) = ds.features.col(index[j]);
      part.labels.push_back(ds.labels[static_cast<std::size_t>(index[j])]);
    }
    return part;
  };
  out.train = gather(out.train_index);
  out.test = gather(out.test_index);
  return out;
}

}  // namespace ingest
}  // namespace lcdl

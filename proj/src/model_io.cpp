#include "lcdl/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include "binary_io.hpp"

namespace lcdl::model_io {

namespace {

constexpr auto kBad = ErrorCode::BadModelFile;
constexpr std::uint64_t kMaxDim = 1ull << 32;

void put_matrix(std::ostream& out, const Matrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) binary::put_f64(out, a(i, j));
  }
}

Matrix get_matrix(std::istream& in, std::uint64_t rows, std::uint64_t cols,
                  const char* what) {
  Matrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      a(i, j) = binary::get_f64(in, kBad, what);
    }
  }
  return a;
}

std::uint64_t get_dim(std::istream& in, const char* what) {
  const std::uint64_t v = binary::get_u64(in, kBad, what);
  if (v > kMaxDim) throw Error(kBad, std::string(what) + " out of range");
  return v;
}

}  // namespace

void write(std::ostream& out, const TrainedModel& model) {
  const Dictionary& dict = model.dictionary;
  const HyperParams& p = model.params;
  const auto m = static_cast<std::uint64_t>(dict.dim());
  const auto k = static_cast<std::uint64_t>(dict.size());
  const auto c = static_cast<std::uint64_t>(model.num_classes());

  out.write(kMagic, 4);
  binary::put_u8(out, kVersion);
  binary::put_u64(out, m);
  binary::put_u64(out, k);
  binary::put_u64(out, c);
  binary::put_f64(out, p.lambda1);
  binary::put_f64(out, p.lambda2);
  binary::put_f64(out, p.theta);
  binary::put_f64(out, p.eta1);
  binary::put_f64(out, p.eta2);
  binary::put_u64(out, static_cast<std::uint64_t>(p.atoms_per_class));
  binary::put_u64(out, static_cast<std::uint64_t>(p.knn_k));
  binary::put_f64(out, p.delta.value_or(0.0));
  binary::put_u64(out, static_cast<std::uint64_t>(p.max_iters));
  binary::put_f64(out, p.ridge_eps.value_or(-1.0));
  binary::put_u64(out, p.seed);

  put_matrix(out, dict.atoms);
  for (int label : dict.atom_labels) {
    binary::put_u32(out, static_cast<std::uint32_t>(label));
  }
  put_matrix(out, model.svm.normals);
  for (Eigen::Index i = 0; i < model.svm.biases.size(); ++i) {
    binary::put_f64(out, model.svm.biases[i]);
  }
  put_matrix(out, model.projector);

  binary::put_u8(out, model.pca ? 1 : 0);
  if (model.pca) {
    const PcaTransform& t = *model.pca;
    binary::put_u64(out, static_cast<std::uint64_t>(t.input_dim()));
    binary::put_u64(out, static_cast<std::uint64_t>(t.output_dim()));
    binary::put_f64(out, t.explained_variance_ratio);
    for (Eigen::Index i = 0; i < t.eigenvalues.size(); ++i) {
      binary::put_f64(out, t.eigenvalues[i]);
    }
    for (Eigen::Index i = 0; i < t.mean.size(); ++i) binary::put_f64(out, t.mean[i]);
    put_matrix(out, t.basis);
  }

  binary::put_u64(out, static_cast<std::uint64_t>(model.label_map.names.size()));
  for (const std::string& name : model.label_map.names) {
    binary::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
}

TrainedModel read(std::istream& in) {
  char magic[4];
  binary::read_exact(in, magic, 4, kBad, "magic");
  if (!std::equal(magic, magic + 4, kMagic)) {
    throw Error(kBad, "not a model file (missing LCDS magic)");
  }
  if (const auto version = binary::get_u8(in, kBad, "version"); version != kVersion) {
    throw Error(ErrorCode::ModelVersion,
                "model version " + std::to_string(version) + ", expected " +
                    std::to_string(kVersion));
  }

  TrainedModel model;
  const std::uint64_t m = get_dim(in, "feature dimension");
  const std::uint64_t k = get_dim(in, "atom count");
  const std::uint64_t c = get_dim(in, "class count");
  if (m == 0 || k == 0 || c == 0) throw Error(kBad, "empty model dimensions");

  HyperParams& p = model.params;
  p.lambda1 = binary::get_f64(in, kBad, "lambda1");
  p.lambda2 = binary::get_f64(in, kBad, "lambda2");
  p.theta = binary::get_f64(in, kBad, "theta");
  p.eta1 = binary::get_f64(in, kBad, "eta1");
  p.eta2 = binary::get_f64(in, kBad, "eta2");
  p.atoms_per_class = static_cast<int>(get_dim(in, "atoms_per_class"));
  p.knn_k = static_cast<int>(get_dim(in, "knn_k"));
  if (const double delta = binary::get_f64(in, kBad, "delta"); delta > 0.0) {
    p.delta = delta;
  }
  p.max_iters = static_cast<int>(get_dim(in, "max_iters"));
  if (const double ridge = binary::get_f64(in, kBad, "ridge_eps"); ridge >= 0.0) {
    p.ridge_eps = ridge;
  }
  p.seed = binary::get_u64(in, kBad, "seed");

  model.dictionary.atoms = get_matrix(in, m, k, "atoms");
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint32_t label = binary::get_u32(in, kBad, "atom labels");
    if (label < 1 || label > c) throw Error(kBad, "atom label out of range");
    model.dictionary.atom_labels.push_back(static_cast<int>(label));
  }
  model.svm.normals = get_matrix(in, k, c, "SVM normals");
  model.svm.biases.resize(static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i < model.svm.biases.size(); ++i) {
    model.svm.biases[i] = binary::get_f64(in, kBad, "SVM biases");
  }
  model.projector = get_matrix(in, k, m, "projector");

  const std::uint8_t has_pca = binary::get_u8(in, kBad, "PCA flag");
  if (has_pca > 1) throw Error(kBad, "invalid PCA flag");
  if (has_pca) {
    PcaTransform t;
    const std::uint64_t m_in = get_dim(in, "PCA input dimension");
    const std::uint64_t m_out = get_dim(in, "PCA output dimension");
    if (m_out != m || m_in == 0) throw Error(kBad, "PCA dimensions disagree");
    t.explained_variance_ratio = binary::get_f64(in, kBad, "PCA variance ratio");
    t.eigenvalues.resize(static_cast<Eigen::Index>(m_out));
    for (Eigen::Index i = 0; i < t.eigenvalues.size(); ++i) {
      t.eigenvalues[i] = binary::get_f64(in, kBad, "PCA eigenvalues");
    }
    t.mean.resize(static_cast<Eigen::Index>(m_in));
    for (Eigen::Index i = 0; i < t.mean.size(); ++i) {
      t.mean[i] = binary::get_f64(in, kBad, "PCA mean");
    }
    t.basis = get_matrix(in, m_in, m_out, "PCA basis");
    model.pca = std::move(t);
  }

  const std::uint64_t count = get_dim(in, "label count");
  if (count != c) throw Error(kBad, "label map size disagrees with class count");
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t len = binary::get_u32(in, kBad, "label length");
    if (len > (1u << 20)) throw Error(kBad, "label too long");
    std::string name(len, '\0');
    binary::read_exact(in, name.data(), len, kBad, "label text");
    model.label_map.names.push_back(std::move(name));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(kBad, "trailing bytes after label map");
  }
  return model;
}

void save(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write(out, model);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path.string());
}

TrainedModel load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read(in);
}

}  // namespace lcdl::model_io

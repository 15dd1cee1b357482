#include "lcdl/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lcdl/random.hpp"

namespace lcdl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::ClassOutOfRange: return "ClassOutOfRange";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::NonPositiveDelta: return "NonPositiveDelta";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::NegativeSimilarity: return "NegativeSimilarity";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::DegenerateAtom: return "DegenerateAtom";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionInconsistent: return "DimensionInconsistent";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::TargetTooLarge: return "TargetTooLarge";
    case ErrorCode::InsufficientClassSamples: return "InsufficientClassSamples";
    case ErrorCode::BadModelFile: return "BadModelFile";
    case ErrorCode::ModelVersion: return "ModelVersion";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<long> index, std::optional<long> position)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      index_(index),
      position_(position) {}

int Dictionary::num_classes() const {
  return atom_labels.empty()
             ? 0
             : *std::max_element(atom_labels.begin(), atom_labels.end());
}

void validate_params(const HyperParams& p,
                     std::optional<Eigen::Index> num_atoms) {
  auto weight = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidParameter,
                  std::string(name) + " must be finite and nonnegative");
    }
  };
  weight(p.lambda1, "lambda1");
  weight(p.lambda2, "lambda2");
  weight(p.theta, "theta");
  weight(p.eta1, "eta1");
  weight(p.eta2, "eta2");
  if (p.ridge_eps) weight(*p.ridge_eps, "ridge_eps");
  if (p.delta && !(std::isfinite(*p.delta) && *p.delta > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "delta must be positive");
  }
  if (p.atoms_per_class < 1) {
    throw Error(ErrorCode::InvalidParameter, "atoms_per_class must be >= 1");
  }
  if (p.knn_k < 1) {
    throw Error(ErrorCode::InvalidParameter, "knn_k must be >= 1");
  }
  if (p.max_iters < 1) {
    throw Error(ErrorCode::InvalidParameter, "max_iters must be >= 1");
  }
  if (num_atoms && p.knn_k > *num_atoms - 1) {
    throw Error(ErrorCode::KTooLarge,
                "knn_k = " + std::to_string(p.knn_k) + " needs at least " +
                    std::to_string(p.knn_k + 1) + " atoms, have " +
                    std::to_string(*num_atoms));
  }
}

void validate_dataset(const LabeledDataset& ds) {
  const auto n = ds.features.cols();
  if (static_cast<Eigen::Index>(ds.labels.size()) != n) {
    throw Error(ErrorCode::LengthMismatch,
                "labels has " + std::to_string(ds.labels.size()) +
                    " entries for " + std::to_string(n) + " samples");
  }
  if (ds.features.rows() < 1 || n < 1) {
    throw Error(ErrorCode::EmptyInput, "dataset has no features or samples");
  }
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (ds.labels[i] < 1 || ds.labels[i] > ds.num_classes) {
      throw Error(ErrorCode::ClassOutOfRange,
                  "label " + std::to_string(ds.labels[i]) + " at sample " +
                      std::to_string(i) + " outside 1.." +
                      std::to_string(ds.num_classes),
                  static_cast<long>(i));
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
      if (!std::isfinite(ds.features(i, j))) {
        throw Error(ErrorCode::NonFiniteEntry,
                    "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") is not finite",
                    static_cast<long>(i), static_cast<long>(j));
      }
    }
  }
  std::vector<bool> seen(static_cast<std::size_t>(ds.num_classes) + 1, false);
  for (int y : ds.labels) seen[static_cast<std::size_t>(y)] = true;
  for (int c = 1; c <= ds.num_classes; ++c) {
    if (!seen[static_cast<std::size_t>(c)]) {
      throw Error(ErrorCode::EmptyClass,
                  "class " + std::to_string(c) + " has no samples", c);
    }
  }
}

Vector one_vs_all_targets(const Labels& labels, int c, int num_classes) {
  if (c < 1 || c > num_classes) {
    throw Error(ErrorCode::ClassOutOfRange,
                "class " + std::to_string(c) + " outside 1.." +
                    std::to_string(num_classes),
                c);
  }
  Vector y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = labels[i] == c ? 1.0 : -1.0;
  }
  return y;
}

std::vector<Eigen::Index> class_indices(const Labels& labels, int c) {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == c) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
  // Rejection sampling on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = engine_.max() - engine_.max() % bound;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % bound;
}

double Rng::uniform_open() {
  // 53 random bits mapped to (0, 1).
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

}  // namespace lcdl

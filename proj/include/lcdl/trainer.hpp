#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "lcdl/coder.hpp"
#include "lcdl/graph.hpp"
#include "lcdl/ingest.hpp"
#include "lcdl/svm.hpp"

namespace lcdl {

struct TrainedModel {
  Dictionary dictionary;
  SvmModel svm;
  HyperParams params;
  Matrix projector;  // K × m
  LabelMap label_map;
  std::optional<PcaTransform> pca;

  int num_classes() const { return svm.num_classes(); }
  /// Feature dimension expected from raw input (before any PCA).
  Eigen::Index input_dim() const {
    return pca ? pca->input_dim() : dictionary.dim();
  }
};

struct AtomReinit {
  int iteration;
  Eigen::Index atom;
};

struct TrainTrace {
  std::vector<double> objective_per_iter;
  /// Total number of (sample, class) active-set memberships per iteration.
  std::vector<long> active_set_sizes;
  std::vector<AtomReinit> atom_reinit_events;
  Eigen::Index num_samples = 0;

  std::size_t iterations() const { return objective_per_iter.size(); }
};

namespace trainer {

struct Initialization {
  Dictionary dictionary;
  CodingMatrix codes;
  SvmModel svm;
};

/// Atoms of class c are atoms_per_class samples of class c drawn from a
/// generator seeded with params.seed (without replacement when the class is
/// large enough), then unit-normalized. Codes are ridge-stabilized least
/// squares over that dictionary; the SVM starts at zero.
Initialization initialize(const LabeledDataset& ds, const HyperParams& params);

/// Replaces collapsed atom `atom` with the sample of its class that D Z
/// reconstructs worst and clears its profile row. Throws DegenerateAtom when
/// the class has no nonzero sample.
void reinitialize_atom(const FeatureMatrix& samples, const Labels& labels,
                       const Labels& atom_labels, Matrix& atoms,
                       CodingMatrix& codes, Eigen::Index atom);

/// ||X - DZ||_F^2.
double reconstruction_term(const FeatureMatrix& samples, const Matrix& atoms,
                           const CodingMatrix& codes);

/// 2 * sum_c [ ||u_c||^2 + theta * sum_i quad_hinge(z_i, y_i^c, u_c, b_c) ].
double svm_term(const CodingMatrix& codes, const Labels& labels,
                const SvmModel& svm, double theta);

/// ||X - DZ||_F^2 + lambda1 tr(Z^T L Z) + lambda2 * svm_term.
double objective(const FeatureMatrix& samples, const Dictionary& dict,
                 const CodingMatrix& codes, const Matrix& laplacian,
                 const SvmModel& svm, const Labels& labels,
                 const HyperParams& params);

/// Relative objective change that ends training early.
inline constexpr double kStopTolerance = 1e-5;

/// Per-sweep hook for diagnostics; sees the state after each step.
struct SweepObserver {
  virtual ~SweepObserver() = default;
  /// `svm` is the model the active sets were evaluated against.
  virtual void after_coding(int /*iteration*/, const Dictionary&,
                            const LaplacianBundle&, const SvmModel& /*svm*/,
                            const coder::CodingSweep&) {}
  virtual void after_dictionary(int /*iteration*/, const Matrix& /*raw_atoms*/,
                                const CodingMatrix& /*codes*/, double /*ridge*/) {}
  virtual void after_svm(int /*iteration*/, const svm::MulticlassFit&) {}
};

/// Alternating minimization: per sweep, rebuild the Laplacian from the
/// current dictionary, recode, update and renormalize the dictionary, then
/// refit the SVM. Stops after params.max_iters sweeps or when the relative
/// objective change drops below kStopTolerance.
std::pair<TrainedModel, TrainTrace> train(const LabeledDataset& ds,
                                          const HyperParams& params,
                                          SweepObserver* observer = nullptr);

}  // namespace trainer
}  // namespace lcdl

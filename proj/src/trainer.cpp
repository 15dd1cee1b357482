#include "lcdl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lcdl/classifier.hpp"
#include "lcdl/dictionary.hpp"
#include "lcdl/random.hpp"

namespace lcdl::trainer {

namespace {

std::vector<Eigen::Index> draw_class_samples(std::vector<Eigen::Index> pool,
                                             int count, Rng& rng) {
  std::vector<Eigen::Index> picked;
  picked.reserve(static_cast<std::size_t>(count));
  const auto size = static_cast<std::uint64_t>(pool.size());
  if (size >= static_cast<std::uint64_t>(count)) {
    // Partial Fisher-Yates: the first `count` slots become a uniform draw
    // without replacement.
    for (std::uint64_t j = 0; j < static_cast<std::uint64_t>(count); ++j) {
      const std::uint64_t r = j + rng.uniform_index(size - j);
      std::swap(pool[j], pool[r]);
      picked.push_back(pool[j]);
    }
  } else {
    for (int j = 0; j < count; ++j) picked.push_back(pool[rng.uniform_index(size)]);
  }
  return picked;
}

long count_active(const coder::CodingSweep& sweep) {
  long total = 0;
  for (const auto& phi : sweep.active_sets) total += static_cast<long>(phi.size());
  return total;
}

}  // namespace

void reinitialize_atom(const FeatureMatrix& samples, const Labels& labels,
                       const Labels& atom_labels, Matrix& atoms,
                       CodingMatrix& codes, Eigen::Index atom) {
  const auto members = class_indices(labels, atom_labels[static_cast<std::size_t>(atom)]);
  Eigen::Index worst = -1;
  double worst_residual = -1.0;
  for (Eigen::Index j : members) {
    if (samples.col(j).norm() < dictionary::kDegenerateNorm) continue;
    const double r = (samples.col(j) - atoms * codes.col(j)).norm();
    if (r > worst_residual) {
      worst_residual = r;
      worst = j;
    }
  }
  if (worst < 0) {
    throw Error(ErrorCode::DegenerateAtom,
                "atom " + std::to_string(atom) +
                    " collapsed and its class has no nonzero sample",
                static_cast<long>(atom));
  }
  atoms.col(atom) = samples.col(worst);
  codes.row(atom).setZero();
}

Initialization initialize(const LabeledDataset& ds, const HyperParams& params) {
  validate_dataset(ds);
  const Eigen::Index num_atoms =
      static_cast<Eigen::Index>(params.atoms_per_class) * ds.num_classes;
  validate_params(params, num_atoms);

  Rng rng(params.seed);
  Initialization init;
  init.dictionary.atoms.resize(ds.dim(), num_atoms);
  init.dictionary.atom_labels.reserve(static_cast<std::size_t>(num_atoms));
  Eigen::Index k = 0;
  for (int c = 1; c <= ds.num_classes; ++c) {
    for (Eigen::Index j : draw_class_samples(class_indices(ds.labels, c),
                                             params.atoms_per_class, rng)) {
      const double norm = ds.features.col(j).norm();
      if (norm < dictionary::kDegenerateNorm) {
        throw Error(ErrorCode::DegenerateAtom,
                    "sample " + std::to_string(j) +
                        " drawn as an initial atom is zero",
                    static_cast<long>(k));
      }
      init.dictionary.atoms.col(k) = ds.features.col(j) / norm;
      init.dictionary.atom_labels.push_back(c);
      ++k;
    }
  }

  init.svm = SvmModel::zeros(num_atoms, ds.num_classes);
  HyperParams plain = params;
  plain.lambda1 = 0.0;
  init.codes = coder::code_all(init.dictionary, Matrix::Zero(num_atoms, num_atoms),
                               ds.features, ds.labels, ds.num_classes, plain,
                               init.svm, 1, CodingMatrix())
                   .codes;
  return init;
}

double reconstruction_term(const FeatureMatrix& samples, const Matrix& atoms,
                           const CodingMatrix& codes) {
  if (atoms.rows() != samples.rows() || atoms.cols() != codes.rows() ||
      codes.cols() != samples.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "X, D and Z dimensions are inconsistent");
  }
  return (samples - atoms * codes).squaredNorm();
}

double svm_term(const CodingMatrix& codes, const Labels& labels,
                const SvmModel& svm, double theta) {
  if (svm.normals.rows() != codes.rows() ||
      static_cast<Eigen::Index>(labels.size()) != codes.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "SVM, codes and labels dimensions are inconsistent");
  }
  double total = 0.0;
  for (int c = 1; c <= svm.num_classes(); ++c) {
    const Vector u = svm.normals.col(c - 1);
    const double b = svm.biases[c - 1];
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < codes.cols(); ++i) {
      const double y = labels[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
      hinge += coder::quad_hinge(codes.col(i), y, u, b);
    }
    total += u.squaredNorm() + theta * hinge;
  }
  return 2.0 * total;
}

double objective(const FeatureMatrix& samples, const Dictionary& dict,
                 const CodingMatrix& codes, const Matrix& laplacian,
                 const SvmModel& svm, const Labels& labels,
                 const HyperParams& params) {
  return reconstruction_term(samples, dict.atoms, codes) +
         params.lambda1 * graph::locality_energy(codes, laplacian) +
         params.lambda2 * svm_term(codes, labels, svm, params.theta);
}

std::pair<TrainedModel, TrainTrace> train(const LabeledDataset& ds,
                                          const HyperParams& params,
                                          SweepObserver* observer) {
  Initialization init = initialize(ds, params);
  Dictionary dict = std::move(init.dictionary);
  CodingMatrix codes = std::move(init.codes);
  SvmModel svm = std::move(init.svm);

  TrainTrace trace;
  trace.num_samples = ds.size();
  for (int t = 1; t <= params.max_iters; ++t) {
    const LaplacianBundle bundle = graph::build(dict, params.knn_k, params.delta);
    coder::CodingSweep sweep =
        coder::code_all(dict, bundle.laplacian, ds.features, ds.labels,
                        ds.num_classes, params, svm, t, codes);
    if (observer) observer->after_coding(t, dict, bundle, svm, sweep);
    trace.active_set_sizes.push_back(count_active(sweep));
    codes = std::move(sweep.codes);

    const double ridge = params.ridge_eps.value_or(dictionary::default_ridge(codes));
    Matrix raw = dictionary::update_dictionary(ds.features, codes, ridge);
    if (observer) observer->after_dictionary(t, raw, codes, ridge);
    for (;;) {
      try {
        auto [atoms, rescaled] = dictionary::normalize_atoms(raw, codes);
        dict.atoms = std::move(atoms);
        codes = std::move(rescaled);
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateAtom || !e.index()) throw;
        reinitialize_atom(ds.features, ds.labels, dict.atom_labels, raw, codes,
                          *e.index());
        trace.atom_reinit_events.push_back({t, *e.index()});
      }
    }

    svm::MulticlassFit fit =
        svm::fit_multiclass(codes, ds.labels, ds.num_classes, params.theta);
    if (observer) observer->after_svm(t, fit);
    svm = std::move(fit.model);

    const LaplacianBundle current = graph::build(dict, params.knn_k, params.delta);
    const double value = objective(ds.features, dict, codes, current.laplacian,
                                   svm, ds.labels, params);
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::SingularSystem,
                  "objective became non-finite at iteration " + std::to_string(t),
                  t);
    }
    trace.objective_per_iter.push_back(value);
    if (trace.objective_per_iter.size() >= 2) {
      const double prev = trace.objective_per_iter[trace.objective_per_iter.size() - 2];
      const double scale = std::max(std::abs(prev), std::numeric_limits<double>::min());
      if (std::abs(prev - value) / scale < kStopTolerance) break;
    }
  }

  TrainedModel model;
  model.projector = classifier::build_projector(dict, params.eta1);
  model.dictionary = std::move(dict);
  model.svm = std::move(svm);
  model.params = params;
  for (int c = 1; c <= ds.num_classes; ++c) {
    model.label_map.names.push_back(std::to_string(c));
  }
  return {std::move(model), std::move(trace)};
}

}  // namespace lcdl::trainer

#pragma once

#include <filesystem>
#include <iosfwd>

#include "lcdl/trainer.hpp"

namespace lcdl::model_io {

inline constexpr char kMagic[4] = {'L', 'C', 'D', 'S'};
inline constexpr std::uint8_t kVersion = 0x01;

/// Binary little-endian model file: magic, version, header (dimensions and
/// hyperparameters), atoms, atom labels, SVM normals and biases, projector,
/// optional PCA transform, label map.
void write(std::ostream& out, const TrainedModel& model);
TrainedModel read(std::istream& in);

void save(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load(const std::filesystem::path& path);

}  // namespace lcdl::model_io

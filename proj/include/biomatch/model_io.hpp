#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "biomatch/nn.hpp"

namespace biomatch::nn {

inline constexpr std::uint16_t kModelFormatVersion = 1;

/// Encodes a network as a BMNN container (layout in docs/FORMATS.md).
std::vector<std::uint8_t> serialize_model(const NeuralNetwork& net);
/// Throws CorruptFileError(kCorruptModel) on bad magic, unknown version,
/// truncation, or an inconsistent layer stack.
NeuralNetwork deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const NeuralNetwork& net, const std::string& path);
NeuralNetwork load_model(const std::string& path);

/// Lower-case hex SHA-256 of the serialized model.
std::string model_digest(const NeuralNetwork& net);

}  // namespace biomatch::nn

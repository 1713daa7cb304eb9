#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "biomatch/nn.hpp"

namespace biomatch::nn {

enum class GateKind : std::uint8_t { kInput, kAnd, kOr, kNot };

struct Gate {
  GateKind kind = GateKind::kInput;
  /// Predecessor gate indices. For kInput gates this is empty and
  /// `input_index` names the circuit input it reads.
  std::vector<std::size_t> inputs;
  std::size_t input_index = 0;
};

/// Boolean circuit as a gate DAG with designated output gates.
class BooleanCircuit {
 public:
  BooleanCircuit(std::size_t arity, std::vector<Gate> gates, std::vector<std::size_t> outputs);

  std::size_t arity() const { return arity_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<std::size_t>& outputs() const { return outputs_; }
  /// Longest input-to-gate path, in gates; inputs have depth 0.
  std::size_t depth_of(std::size_t gate) const { return depth_[gate]; }
  /// Maximum depth over the output gates.
  std::size_t depth() const;

  /// Direct evaluation on a Boolean assignment; one 0/1 value per output.
  std::vector<std::uint8_t> evaluate(std::span<const std::uint8_t> assignment) const;

 private:
  std::size_t arity_;
  std::vector<Gate> gates_;
  std::vector<std::size_t> outputs_;
  std::vector<std::size_t> depth_;
};

/// Compiles a circuit into a threshold MLP whose depth (number of
/// Linear+Threshold pairs) equals the circuit depth. Gates are simulated as
///   AND of arity a -> 1[sum x - a + 1/2 > 0]
///   OR             -> 1[sum x - 1/2 > 0]
///   NOT            -> 1[-x + 1/2 > 0]
/// and values needed by deeper gates are relayed with 1[x - 1/2 > 0].
NeuralNetwork circuit_to_mlp(const BooleanCircuit& circuit);

}  // namespace biomatch::nn

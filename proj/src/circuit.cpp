#include "biomatch/circuit.hpp"

#include <algorithm>
#include <string>

#include "biomatch/error.hpp"

namespace biomatch::nn {

namespace {

[[noreturn]] void malformed(const std::string& why) {
  throw Error(ErrorCode::kMalformedCircuit, why);
}

// Post-order over the gate DAG; throws on a cycle.
std::vector<std::size_t> topological_order(const std::vector<Gate>& gates) {
  enum class Mark : std::uint8_t { kNone, kActive, kDone };
  std::vector<Mark> mark(gates.size(), Mark::kNone);
  std::vector<std::size_t> order;
  order.reserve(gates.size());
  // Iterative DFS: (gate, next predecessor slot).
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  for (std::size_t root = 0; root < gates.size(); ++root) {
    if (mark[root] != Mark::kNone) continue;
    stack.emplace_back(root, 0);
    mark[root] = Mark::kActive;
    while (!stack.empty()) {
      auto& [gate, next] = stack.back();
      if (next < gates[gate].inputs.size()) {
        const std::size_t pred = gates[gate].inputs[next++];
        if (mark[pred] == Mark::kActive) malformed("cycle through gate " + std::to_string(pred));
        if (mark[pred] == Mark::kNone) {
          mark[pred] = Mark::kActive;
          stack.emplace_back(pred, 0);
        }
      } else {
        mark[gate] = Mark::kDone;
        order.push_back(gate);
        stack.pop_back();
      }
    }
  }
  return order;
}

}  // namespace

BooleanCircuit::BooleanCircuit(std::size_t arity, std::vector<Gate> gates,
                               std::vector<std::size_t> outputs)
    : arity_(arity), gates_(std::move(gates)), outputs_(std::move(outputs)) {
  if (outputs_.empty()) malformed("circuit has no outputs");
  for (std::size_t out : outputs_) {
    if (out >= gates_.size()) malformed("output refers to missing gate " + std::to_string(out));
  }
  for (std::size_t g = 0; g < gates_.size(); ++g) {
    const Gate& gate = gates_[g];
    for (std::size_t pred : gate.inputs) {
      if (pred >= gates_.size()) {
        malformed("gate " + std::to_string(g) + " reads dangling gate " + std::to_string(pred));
      }
    }
    switch (gate.kind) {
      case GateKind::kInput:
        if (!gate.inputs.empty()) malformed("input gate with predecessors");
        if (gate.input_index >= arity_) malformed("input gate reads beyond circuit arity");
        break;
      case GateKind::kNot:
        if (gate.inputs.size() != 1) malformed("NOT gate must have exactly one predecessor");
        break;
      case GateKind::kAnd:
      case GateKind::kOr:
        if (gate.inputs.empty()) malformed("gate " + std::to_string(g) + " has no predecessors");
        break;
    }
  }
  depth_.assign(gates_.size(), 0);
  for (std::size_t g : topological_order(gates_)) {
    for (std::size_t pred : gates_[g].inputs) depth_[g] = std::max(depth_[g], depth_[pred] + 1);
  }
}

std::size_t BooleanCircuit::depth() const {
  std::size_t d = 0;
  for (std::size_t out : outputs_) d = std::max(d, depth_[out]);
  return d;
}

std::vector<std::uint8_t> BooleanCircuit::evaluate(std::span<const std::uint8_t> assignment) const {
  if (assignment.size() != arity_) {
    throw Error(ErrorCode::kDimensionMismatch, "assignment size differs from circuit arity");
  }
  std::vector<std::uint8_t> value(gates_.size(), 0);
  for (std::size_t g : topological_order(gates_)) {
    const Gate& gate = gates_[g];
    switch (gate.kind) {
      case GateKind::kInput: value[g] = assignment[gate.input_index] != 0; break;
      case GateKind::kNot: value[g] = !value[gate.inputs[0]]; break;
      case GateKind::kAnd:
        value[g] = std::all_of(gate.inputs.begin(), gate.inputs.end(),
                               [&](std::size_t p) { return value[p] != 0; });
        break;
      case GateKind::kOr:
        value[g] = std::any_of(gate.inputs.begin(), gate.inputs.end(),
                               [&](std::size_t p) { return value[p] != 0; });
        break;
    }
  }
  std::vector<std::uint8_t> out;
  out.reserve(outputs_.size());
  for (std::size_t o : outputs_) out.push_back(value[o]);
  return out;
}

NeuralNetwork circuit_to_mlp(const BooleanCircuit& circuit) {
  const auto& gates = circuit.gates();
  const std::size_t n = gates.size();
  // A bare input wire still needs one relay layer to be a network.
  const std::size_t depth = std::max<std::size_t>(circuit.depth(), 1);

  // Only gates feeding an output matter. last_use[g] is the deepest level
  // that reads g; outputs are read by the final layer.
  std::vector<bool> needed(n, false);
  std::vector<std::size_t> last_use(n, 0);
  std::vector<std::size_t> pending(circuit.outputs().begin(), circuit.outputs().end());
  for (std::size_t o : circuit.outputs()) last_use[o] = depth + 1;
  while (!pending.empty()) {
    const std::size_t g = pending.back();
    pending.pop_back();
    if (needed[g]) continue;
    needed[g] = true;
    for (std::size_t p : gates[g].inputs) pending.push_back(p);
  }
  for (std::size_t g = 0; g < n; ++g) {
    if (!needed[g]) continue;
    for (std::size_t p : gates[g].inputs) {
      last_use[p] = std::max(last_use[p], circuit.depth_of(g));
    }
  }

  constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  // slot_of[g]: position of gate g's value in the previous level's vector.
  std::vector<std::size_t> slot_of(n, kAbsent);
  for (std::size_t g = 0; g < n; ++g) {
    if (gates[g].kind == GateKind::kInput) slot_of[g] = gates[g].input_index;
  }
  std::size_t width = circuit.arity();

  std::vector<Layer> layers;
  for (std::size_t level = 1; level <= depth; ++level) {
    std::vector<std::size_t> slots;
    if (level == depth) {
      slots = circuit.outputs();
    } else {
      for (std::size_t g = 0; g < n; ++g) {
        if (needed[g] && circuit.depth_of(g) <= level && last_use[g] > level) slots.push_back(g);
      }
    }

    LinearLayer linear{Matrix(width, slots.size()), std::vector<double>(slots.size(), 0.0)};
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const Gate& gate = gates[slots[s]];
      if (circuit.depth_of(slots[s]) < level) {
        linear.weights(slot_of[slots[s]], s) += 1.0;
        linear.bias[s] = -0.5;
        continue;
      }
      for (std::size_t p : gate.inputs) {
        linear.weights(slot_of[p], s) += gate.kind == GateKind::kNot ? -1.0 : 1.0;
      }
      switch (gate.kind) {
        case GateKind::kAnd: linear.bias[s] = 0.5 - static_cast<double>(gate.inputs.size()); break;
        case GateKind::kOr: linear.bias[s] = -0.5; break;
        case GateKind::kNot: linear.bias[s] = 0.5; break;
        case GateKind::kInput: break;  // depth 0, always relayed
      }
    }
    layers.emplace_back(std::move(linear));
    layers.emplace_back(ActivationLayer{ActivationKind::kThreshold, slots.size()});

    std::fill(slot_of.begin(), slot_of.end(), kAbsent);
    for (std::size_t s = 0; s < slots.size(); ++s) slot_of[slots[s]] = s;
    width = slots.size();
  }
  return NeuralNetwork(std::move(layers));
}

}  // namespace biomatch::nn

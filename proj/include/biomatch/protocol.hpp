#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <shared_mutex>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "biomatch/config.hpp"
#include "biomatch/matcher.hpp"
#include "biomatch/metric.hpp"
#include "biomatch/nn.hpp"
#include "biomatch/template_store.hpp"

namespace biomatch::protocol {

/// Which model the system embeds with.
struct ExtractorRef {
  std::string model_id;
  /// Hex SHA-256 of the serialized model.
  std::string digest;

  friend bool operator==(const ExtractorRef&, const ExtractorRef&) = default;
};

/// Public parameters fixed by init.
struct SystemParams {
  std::size_t lambda = 64;
  SpaceDescriptor space;
  double threshold = 0.0;
  std::size_t capacity = 1;
  ExtractorRef extractor;
  /// Seeds the verifier's identifier coins.
  std::uint64_t seed = 0;

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

KeyValues to_key_values(const SystemParams& params);
SystemParams params_from_key_values(const KeyValues& kv);

// Messages carry embeddings g(x) only; no message type can hold a raw
// biometric sample.
struct EnrollRequest {
  MetricPoint embedding;
};
struct EnrollResponse {
  store::Identifier id;
};
struct VerifyRequest {
  store::Identifier id;
  MetricPoint embedding;
};

enum class VerifyReason : std::uint8_t { kMatch = 0, kNoMatch = 1, kUnknownId = 2 };
std::string to_string(VerifyReason reason);

struct VerifyResponse {
  bool accepted = false;
  double score = 0.0;
  VerifyReason reason = VerifyReason::kNoMatch;
};
struct IdentifyRequest {
  MetricPoint embedding;
};
struct IdentifyResponse {
  std::optional<store::Identifier> id;
  double score = 0.0;
};

using Message = std::variant<EnrollRequest, EnrollResponse, VerifyRequest, VerifyResponse,
                             IdentifyRequest, IdentifyResponse>;

enum class Direction : std::uint8_t { kProverToVerifier, kVerifierToProver };

Direction direction_of(const Message& message);
std::string kind_name(const Message& message);
/// Binary payload written as hex in the transcript export.
std::vector<std::uint8_t> encode_payload(const Message& message);

struct TranscriptEntry {
  /// Position in the transcript; doubles as a logical timestamp.
  std::uint64_t seq = 0;
  Message message;
};

class Transcript {
 public:
  void append(Message message);
  const std::vector<TranscriptEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// One line per message: `seq,direction,kind,payload-hex`, with direction
  /// `P->V` or `V->P`.
  void write(std::ostream& out) const;
  std::string to_text() const;

 private:
  std::vector<TranscriptEntry> entries_;
};

struct VerifyOutcome {
  matcher::MatchDecision decision;
  VerifyReason reason = VerifyReason::kNoMatch;
};

/// Prover/verifier pair for one biometric system. The prover side embeds
/// raw samples with g; the verifier owns the gallery and the identifier
/// coins. verify/identify take a shared lock and may run concurrently;
/// enroll serialises as the single writer.
class System {
 public:
  System() = default;
  System(const System&) = delete;
  System& operator=(const System&) = delete;

  /// Fixes the public parameters and creates an empty gallery. Runs once:
  /// a second call throws AlreadyInitialized. Throws DimensionMismatch when
  /// the extractor's embedding width differs from the space dimension.
  const SystemParams& init(std::size_t lambda, const SpaceDescriptor& space,
                           nn::NeuralNetwork extractor, double threshold, std::size_t capacity,
                           std::uint64_t seed = 0, std::string model_id = "extractor");

  /// Resumes a persisted system. The model must hash to params.extractor.digest
  /// and the gallery must match the parameters.
  void attach(const SystemParams& params, nn::NeuralNetwork extractor, store::Gallery gallery);

  bool initialized() const;

  store::Identifier enroll(std::span<const double> sample);
  VerifyOutcome verify(const store::Identifier& id, std::span<const double> sample);
  matcher::IdentificationResult identify(std::span<const double> sample);

  /// Sets the threshold to the EER operating point of the labelled
  /// calibration scores, clamped at 0 for distance spaces. Returns it.
  double calibrate(const matcher::ScoreSet& scores);

  SystemParams params() const;
  store::Gallery gallery() const;
  Transcript transcript() const;
  const nn::NeuralNetwork& extractor() const { return extractor_; }

 private:
  void require_initialized() const;
  MetricPoint prover_embed(std::span<const double> sample) const;
  void record(Message request, Message response);

  mutable std::shared_mutex mutex_;
  std::optional<SystemParams> params_;
  nn::NeuralNetwork extractor_;
  std::optional<store::Gallery> gallery_;
  std::mt19937_64 rng_;

  mutable std::mutex transcript_mutex_;
  Transcript transcript_;
};

}  // namespace biomatch::protocol

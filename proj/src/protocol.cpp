#include "biomatch/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "binary_io.hpp"
#include "biomatch/error.hpp"
#include "biomatch/model_io.hpp"
#include "hex.hpp"
#include "text.hpp"

namespace biomatch::protocol {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void write_id(detail::ByteWriter& w, const store::Identifier& id) {
  w.u16(static_cast<std::uint16_t>(id.bytes().size()));
  w.bytes(id.bytes());
}

void write_embedding(detail::ByteWriter& w, const MetricPoint& p) {
  std::vector<std::uint8_t> buf;
  store::encode_embedding(buf, p);
  w.bytes(buf);
}

}  // namespace

KeyValues to_key_values(const SystemParams& params) {
  KeyValues kv;
  kv.set("lambda", std::to_string(params.lambda));
  kv.set("space.kind", to_string(params.space.kind));
  kv.set("space.dim", std::to_string(params.space.dimension));
  kv.set("threshold", detail::format_double(params.threshold));
  kv.set("capacity", std::to_string(params.capacity));
  kv.set("seed", std::to_string(params.seed));
  kv.set("model.id", params.extractor.model_id);
  kv.set("model.digest", params.extractor.digest);
  return kv;
}

SystemParams params_from_key_values(const KeyValues& kv) {
  SystemParams p;
  p.lambda = kv.require_u64("lambda");
  p.space = SpaceDescriptor::of(parse_metric_kind(kv.require("space.kind")),
                                kv.require_u64("space.dim"));
  p.threshold = kv.require_double("threshold");
  p.capacity = kv.require_u64("capacity");
  p.seed = kv.get_u64("seed", 0);
  p.extractor.model_id = kv.get_string("model.id", "");
  p.extractor.digest = kv.require("model.digest");
  return p;
}

std::string to_string(VerifyReason reason) {
  switch (reason) {
    case VerifyReason::kMatch: return "Match";
    case VerifyReason::kNoMatch: return "NoMatch";
    case VerifyReason::kUnknownId: return "UnknownId";
  }
  return "Unknown";
}

Direction direction_of(const Message& message) {
  return std::visit(Overloaded{
                        [](const EnrollRequest&) { return Direction::kProverToVerifier; },
                        [](const VerifyRequest&) { return Direction::kProverToVerifier; },
                        [](const IdentifyRequest&) { return Direction::kProverToVerifier; },
                        [](const auto&) { return Direction::kVerifierToProver; },
                    },
                    message);
}

std::string kind_name(const Message& message) {
  return std::visit(Overloaded{
                        [](const EnrollRequest&) { return "EnrollRequest"; },
                        [](const EnrollResponse&) { return "EnrollResponse"; },
                        [](const VerifyRequest&) { return "VerifyRequest"; },
                        [](const VerifyResponse&) { return "VerifyResponse"; },
                        [](const IdentifyRequest&) { return "IdentifyRequest"; },
                        [](const IdentifyResponse&) { return "IdentifyResponse"; },
                    },
                    message);
}

std::vector<std::uint8_t> encode_payload(const Message& message) {
  detail::ByteWriter w;
  std::visit(Overloaded{
                 [&](const EnrollRequest& m) { write_embedding(w, m.embedding); },
                 [&](const EnrollResponse& m) { write_id(w, m.id); },
                 [&](const VerifyRequest& m) {
                   write_id(w, m.id);
                   write_embedding(w, m.embedding);
                 },
                 [&](const VerifyResponse& m) {
                   w.u8(m.accepted ? 1 : 0);
                   w.u8(static_cast<std::uint8_t>(m.reason));
                   w.f64(m.score);
                 },
                 [&](const IdentifyRequest& m) { write_embedding(w, m.embedding); },
                 [&](const IdentifyResponse& m) {
                   w.u8(m.id ? 1 : 0);
                   if (m.id) write_id(w, *m.id);
                   w.f64(m.score);
                 },
             },
             message);
  return w.take();
}

void Transcript::append(Message message) {
  entries_.push_back(TranscriptEntry{entries_.size(), std::move(message)});
}

void Transcript::write(std::ostream& out) const {
  for (const auto& e : entries_) {
    out << e.seq << ','
        << (direction_of(e.message) == Direction::kProverToVerifier ? "P->V" : "V->P") << ','
        << kind_name(e.message) << ',' << detail::to_hex(encode_payload(e.message)) << '\n';
  }
}

std::string Transcript::to_text() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

const SystemParams& System::init(std::size_t lambda, const SpaceDescriptor& space,
                                 nn::NeuralNetwork extractor, double threshold,
                                 std::size_t capacity, std::uint64_t seed, std::string model_id) {
  std::unique_lock lock(mutex_);
  if (params_) throw Error(ErrorCode::kAlreadyInitialized, "init runs once per system");
  if (space.kind == MetricKind::kLevenshtein) {
    throw Error(ErrorCode::kSpaceMismatch, "a network extractor cannot target a Levenshtein space");
  }
  if (nn::embedding_dim(extractor) != space.dimension) {
    throw Error(ErrorCode::kDimensionMismatch,
                "extractor embeds into dimension " + std::to_string(nn::embedding_dim(extractor)) +
                    " but the space has dimension " + std::to_string(space.dimension));
  }
  if (!std::isfinite(threshold) ||
      (space.orientation == Orientation::kDistance && threshold < 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "distance threshold must be finite and >= 0");
  }
  // Validates lambda and capacity before anything is committed.
  store::Gallery gallery(lambda, capacity, space);

  SystemParams params;
  params.lambda = lambda;
  params.space = space;
  params.threshold = threshold;
  params.capacity = capacity;
  params.seed = seed;
  params.extractor = ExtractorRef{std::move(model_id), nn::model_digest(extractor)};

  extractor_ = std::move(extractor);
  gallery_.emplace(std::move(gallery));
  rng_.seed(seed);
  params_ = std::move(params);
  return *params_;
}

void System::attach(const SystemParams& params, nn::NeuralNetwork extractor,
                    store::Gallery gallery) {
  std::unique_lock lock(mutex_);
  if (params_) throw Error(ErrorCode::kAlreadyInitialized, "system already has parameters");
  if (nn::model_digest(extractor) != params.extractor.digest) {
    throw Error(ErrorCode::kInvalidConfig, "model digest does not match the system parameters");
  }
  if (nn::embedding_dim(extractor) != params.space.dimension) {
    throw Error(ErrorCode::kDimensionMismatch, "extractor does not match the space dimension");
  }
  if (gallery.space() != params.space || gallery.lambda() != params.lambda ||
      gallery.capacity() != params.capacity) {
    throw Error(ErrorCode::kSpaceMismatch, "gallery does not match the system parameters");
  }
  extractor_ = std::move(extractor);
  rng_.seed(params.seed + gallery.size());
  gallery_.emplace(std::move(gallery));
  params_ = params;
}

bool System::initialized() const {
  std::shared_lock lock(mutex_);
  return params_.has_value();
}

void System::require_initialized() const {
  if (!params_) throw Error(ErrorCode::kNotInitialized, "system has not been initialised");
}

MetricPoint System::prover_embed(std::span<const double> sample) const {
  return nn::embed(extractor_, sample, params_->space);
}

void System::record(Message request, Message response) {
  std::lock_guard lock(transcript_mutex_);
  transcript_.append(std::move(request));
  transcript_.append(std::move(response));
}

store::Identifier System::enroll(std::span<const double> sample) {
  std::unique_lock lock(mutex_);
  require_initialized();
  // Prover: x -> g(x). Only the embedding crosses to the verifier.
  MetricPoint embedding = prover_embed(sample);
  if (gallery_->full()) {
    throw Error(ErrorCode::kCapacityExceeded,
                "gallery holds its capacity of " + std::to_string(gallery_->capacity()) +
                    " records");
  }
  store::Identifier id = store::generate_id(*gallery_, rng_);
  gallery_->insert(store::TemplateRecord{id, embedding});
  record(EnrollRequest{std::move(embedding)}, EnrollResponse{id});
  return id;
}

VerifyOutcome System::verify(const store::Identifier& id, std::span<const double> sample) {
  std::shared_lock lock(mutex_);
  require_initialized();
  MetricPoint embedding = prover_embed(sample);
  VerifyOutcome outcome;
  const auto reference = gallery_->lookup(id);
  if (!reference) {
    outcome.decision = matcher::MatchDecision{false, 0.0, params_->threshold};
    outcome.reason = VerifyReason::kUnknownId;
  } else {
    const double score = compare(params_->space, embedding, reference->embedding);
    outcome.decision = matcher::decide(score, params_->threshold, params_->space.orientation);
    outcome.reason = outcome.decision.accept ? VerifyReason::kMatch : VerifyReason::kNoMatch;
  }
  record(VerifyRequest{id, std::move(embedding)},
         VerifyResponse{outcome.decision.accept, outcome.decision.score, outcome.reason});
  return outcome;
}

matcher::IdentificationResult System::identify(std::span<const double> sample) {
  std::shared_lock lock(mutex_);
  require_initialized();
  MetricPoint embedding = prover_embed(sample);
  auto result =
      matcher::identify(gallery_->records(), embedding, params_->threshold, params_->space);
  record(IdentifyRequest{std::move(embedding)}, IdentifyResponse{result.identified, result.best_score});
  return result;
}

double System::calibrate(const matcher::ScoreSet& scores) {
  std::unique_lock lock(mutex_);
  require_initialized();
  if (scores.orientation != params_->space.orientation) {
    throw Error(ErrorCode::kInvalidArgument, "calibration scores use the wrong orientation");
  }
  double t = matcher::eer(scores).threshold;
  if (params_->space.orientation == Orientation::kDistance) t = std::max(t, 0.0);
  params_->threshold = t;
  return t;
}

SystemParams System::params() const {
  std::shared_lock lock(mutex_);
  require_initialized();
  return *params_;
}

store::Gallery System::gallery() const {
  std::shared_lock lock(mutex_);
  require_initialized();
  return *gallery_;
}

Transcript System::transcript() const {
  std::lock_guard lock(transcript_mutex_);
  return transcript_;
}

}  // namespace biomatch::protocol

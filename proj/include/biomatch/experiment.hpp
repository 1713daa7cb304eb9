#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "biomatch/config.hpp"
#include "biomatch/matcher.hpp"
#include "biomatch/nn.hpp"
#include "biomatch/protocol.hpp"
#include "biomatch/synthetic.hpp"
#include "biomatch/template_store.hpp"

namespace biomatch::harness {

/// Everything an evaluation run needs. Read from the shared key=value
/// config; the key for each field is noted alongside it.
struct ExperimentConfig {
  std::uint64_t seed = 1;                 // seed
  std::size_t lambda = 64;                // lambda
  MetricKind space = MetricKind::kEuclidean;  // space.kind
  std::size_t capacity = 1024;            // capacity

  std::size_t classes = 8;                // data.classes
  std::size_t dimension = 16;             // data.dim
  double center_scale = 10.0;             // data.scale
  double noise_stddev = 0.05;             // data.noise
  std::size_t train_per_class = 20;       // data.train_per_class
  std::size_t probes_per_class = 20;      // data.probes_per_class

  std::size_t hidden = 32;                // train.hidden
  std::size_t epochs = 300;               // train.epochs
  double learning_rate = 0.1;             // train.rate

  std::size_t impostor_cap = 100000;      // eval.impostor_cap

  static ExperimentConfig from_key_values(const KeyValues& kv);
  KeyValues to_key_values() const;
};

/// Per-stage seeds, derived from the master seed by fixed offsets.
struct StageSeeds {
  std::uint64_t data = 0;
  std::uint64_t init = 0;
  std::uint64_t ids = 0;
  std::uint64_t impostors = 0;

  static StageSeeds derive(std::uint64_t master);
};

struct ExperimentReport {
  double eer = 0.0;
  /// EER threshold in the space's native orientation.
  double threshold = 0.0;
  double fmr_at_threshold = 0.0;
  double fnmr_at_threshold = 0.0;
  /// Threshold installed in the system after calibration.
  double system_threshold = 0.0;
  std::size_t gallery_size = 0;
  matcher::ScaledRates scaled;
  std::size_t genuine_count = 0;
  std::size_t impostor_count = 0;
  std::size_t self_verify_failures = 0;
  double train_loss = 0.0;
  double train_error = 0.0;
  std::string roc_path = "roc.csv";
  Orientation orientation = Orientation::kDistance;
  StageSeeds seeds;
  ExperimentConfig config;

  /// Flat `key:value` lines; keys are listed in docs/FORMATS.md.
  KeyValues to_key_values() const;
};

/// Samples of one experiment: per class, train_per_class training samples,
/// one enrollment sample, then probes_per_class held-out probes.
SyntheticData generate_experiment_data(const ExperimentConfig& config);

struct TrainedExtractor {
  nn::NeuralNetwork model;
  double train_loss = 0.0;
  double train_error = 0.0;
};

/// Builds g = h . f: f standardises each input feature with statistics of
/// the training split (fixed, not trained); h is a one-hidden-layer ReLU MLP
/// with a softmax head trained by full-batch gradient descent on
/// cross-entropy.
TrainedExtractor train_extractor(const ExperimentConfig& config, const SyntheticData& data);

/// One persisted comparison score.
struct ScoreRow {
  std::size_t identity = 0;
  std::size_t probe = 0;
  std::size_t template_identity = 0;
  matcher::ScoreLabel label = matcher::ScoreLabel::kGenuine;
  double score = 0.0;
};

struct ExperimentArtifacts {
  ExperimentReport report;
  /// Ordered by (identity, probe, template identity).
  std::vector<ScoreRow> scores;
  std::vector<matcher::RocPoint> roc;
  nn::NeuralNetwork model;
  protocol::SystemParams params;
  store::Gallery gallery{64, 1, SpaceDescriptor::of(MetricKind::kEuclidean, 1)};
  protocol::Transcript transcript;
};

/// generate -> train -> enroll -> probe -> rates. Errors are re-raised
/// with the failing stage name prefixed to the message.
ExperimentArtifacts run_experiment(const ExperimentConfig& config);

/// Writes report.txt, roc.csv, scores.csv, gallery.bmdb, model.bmnn,
/// params.txt and transcript.txt into `dir` (created if missing).
void write_artifacts(const ExperimentArtifacts& artifacts, const std::string& dir);

void write_scores_csv(std::ostream& out, const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> read_scores_csv(const std::string& path);

struct ReportCheck {
  double fmr = 0.0;
  double fnmr = 0.0;
  bool consistent = false;
};

/// Recomputes FMR/FNMR at the reported threshold from the persisted scores.
ReportCheck check_report(const KeyValues& report, const std::vector<ScoreRow>& scores);

}  // namespace biomatch::harness

#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "biomatch/metric.hpp"
#include "biomatch/template_store.hpp"

namespace biomatch::matcher {

enum class ScoreLabel : std::uint8_t { kGenuine, kImpostor };

struct Score {
  double value = 0.0;
  ScoreLabel label = ScoreLabel::kGenuine;
};

/// Labelled comparison scores in their native orientation.
struct ScoreSet {
  std::vector<Score> scores;
  Orientation orientation = Orientation::kSimilarity;

  /// Genuine / impostor values mapped into similarity orientation (distance
  /// scores are negated), in stored order.
  std::vector<double> genuine_similarity() const;
  std::vector<double> impostor_similarity() const;
};

/// Candidate thresholds, strictly increasing.
class ThresholdGrid {
 public:
  /// Throws EmptyGrid when empty, InvalidArgument when not strictly increasing.
  explicit ThresholdGrid(std::vector<double> thresholds);

  /// Midpoints between adjacent distinct pooled values, plus one point below
  /// the minimum and one above the maximum.
  static ThresholdGrid midpoints(std::span<const double> pooled);

  std::span<const double> values() const { return thresholds_; }
  std::size_t size() const { return thresholds_.size(); }

 private:
  std::vector<double> thresholds_;
};

struct MatchDecision {
  bool accept = false;
  double score = 0.0;
  double threshold = 0.0;
};

/// Distance: accept iff score <= t. Similarity: accept iff score >= t.
MatchDecision decide(double score, double threshold, Orientation orientation);

struct IdentificationResult {
  /// Set when the best score passes the threshold.
  std::optional<store::Identifier> identified;
  /// Meaningless for an empty gallery.
  double best_score = 0.0;
  /// |best - runner-up|; zero with fewer than two records.
  double runner_up_margin = 0.0;

  bool matched() const { return identified.has_value(); }
};

/// One-to-many search: best record is the minimum distance or maximum
/// similarity, ties to the smallest identifier. Throws SpaceMismatch when a
/// record or the probe does not conform to `space`.
IdentificationResult identify(std::span<const store::TemplateRecord> gallery,
                              const MetricPoint& probe, double threshold,
                              const SpaceDescriptor& space);

/// Fraction of scores strictly above t. Throws EmptyScoreSet.
double fmr(std::span<const double> impostor_scores, double threshold);
/// Fraction of scores at or below t. Throws EmptyScoreSet.
double fnmr(std::span<const double> genuine_scores, double threshold);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  double fmr = 0.0;
  double fnmr = 0.0;
};

/// Scores are similarity-oriented. Picks the grid point minimising
/// |FMR - FNMR|, ties to the smallest threshold.
EerResult eer(std::span<const double> genuine, std::span<const double> impostor,
              const ThresholdGrid& grid);
/// Convenience over a labelled set with the midpoint grid. The returned
/// threshold is in the set's native orientation.
EerResult eer(const ScoreSet& scores);

struct RocPoint {
  double threshold = 0.0;
  double fmr = 0.0;
  double fnmr = 0.0;
};

std::vector<RocPoint> roc_curve(std::span<const double> genuine, std::span<const double> impostor,
                                const ThresholdGrid& grid);
/// Header `threshold,fmr,fnmr`, values in shortest round-trip form.
void write_roc_csv(std::ostream& out, std::span<const RocPoint> rows);

struct ScaledRates {
  double fmr = 0.0;
  double fnmr = 0.0;
  /// The linear approximation is trusted only while n * FMR < 1/10.
  bool valid = false;
};

ScaledRates gallery_scaled_rates(double fmr1, double fnmr1, std::size_t n);

}  // namespace biomatch::matcher

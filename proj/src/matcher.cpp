#include "biomatch/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "biomatch/error.hpp"
#include "text.hpp"

namespace biomatch::matcher {

namespace {

std::vector<double> select(const ScoreSet& set, ScoreLabel label) {
  std::vector<double> out;
  for (const auto& s : set.scores) {
    if (s.label != label) continue;
    out.push_back(set.orientation == Orientation::kDistance ? -s.value : s.value);
  }
  return out;
}

void require_nonempty(std::span<const double> scores, const char* what) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyScoreSet, std::string(what) + " score set is empty");
}

// True when score a beats b under the orientation.
bool better(double a, double b, Orientation orientation) {
  return orientation == Orientation::kDistance ? a < b : a > b;
}

}  // namespace

std::vector<double> ScoreSet::genuine_similarity() const { return select(*this, ScoreLabel::kGenuine); }

std::vector<double> ScoreSet::impostor_similarity() const {
  return select(*this, ScoreLabel::kImpostor);
}

ThresholdGrid::ThresholdGrid(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {
  if (thresholds_.empty()) throw Error(ErrorCode::kEmptyGrid, "threshold grid is empty");
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    if (!std::isfinite(thresholds_[i])) {
      throw Error(ErrorCode::kInvalidArgument, "threshold grid contains a non-finite value");
    }
    if (i > 0 && !(thresholds_[i - 1] < thresholds_[i])) {
      throw Error(ErrorCode::kInvalidArgument, "threshold grid must be strictly increasing");
    }
  }
}

ThresholdGrid ThresholdGrid::midpoints(std::span<const double> pooled) {
  require_nonempty(pooled, "pooled");
  std::vector<double> sorted(pooled.begin(), pooled.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> grid;
  grid.reserve(sorted.size() + 1);
  grid.push_back(sorted.front() - 1.0);
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    grid.push_back(sorted[i] + (sorted[i + 1] - sorted[i]) / 2.0);
  }
  grid.push_back(sorted.back() + 1.0);
  // Adjacent doubles can round to the same midpoint.
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return ThresholdGrid(std::move(grid));
}

MatchDecision decide(double score, double threshold, Orientation orientation) {
  const bool accept =
      orientation == Orientation::kDistance ? score <= threshold : score >= threshold;
  return MatchDecision{accept, score, threshold};
}

IdentificationResult identify(std::span<const store::TemplateRecord> gallery,
                              const MetricPoint& probe, double threshold,
                              const SpaceDescriptor& space) {
  IdentificationResult result;
  if (gallery.empty()) return result;
  try {
    require_conforming(space, probe);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSpaceMismatch, std::string("probe rejected: ") + e.what());
  }

  const store::TemplateRecord* best = nullptr;
  double best_score = 0.0;
  double runner_up = 0.0;
  bool have_runner_up = false;
  for (const auto& record : gallery) {
    double score = 0.0;
    try {
      score = compare(space, probe, record.embedding);
    } catch (const Error& e) {
      throw Error(ErrorCode::kSpaceMismatch,
                  "record " + record.id.to_hex() + " rejected: " + e.what());
    }
    if (best == nullptr) {
      best = &record;
      best_score = score;
      continue;
    }
    const bool wins =
        better(score, best_score, space.orientation) || (score == best_score && record.id < best->id);
    if (wins) {
      runner_up = best_score;
      best = &record;
      best_score = score;
    } else if (!have_runner_up || better(score, runner_up, space.orientation)) {
      runner_up = score;
    }
    have_runner_up = true;
  }

  result.best_score = best_score;
  result.runner_up_margin = have_runner_up ? std::abs(best_score - runner_up) : 0.0;
  if (decide(best_score, threshold, space.orientation).accept) result.identified = best->id;
  return result;
}

double fmr(std::span<const double> impostor_scores, double threshold) {
  require_nonempty(impostor_scores, "impostor");
  const auto hits = std::count_if(impostor_scores.begin(), impostor_scores.end(),
                                  [&](double s) { return s > threshold; });
  return static_cast<double>(hits) / static_cast<double>(impostor_scores.size());
}

double fnmr(std::span<const double> genuine_scores, double threshold) {
  require_nonempty(genuine_scores, "genuine");
  const auto misses = std::count_if(genuine_scores.begin(), genuine_scores.end(),
                                    [&](double s) { return s <= threshold; });
  return static_cast<double>(misses) / static_cast<double>(genuine_scores.size());
}

EerResult eer(std::span<const double> genuine, std::span<const double> impostor,
              const ThresholdGrid& grid) {
  require_nonempty(genuine, "genuine");
  require_nonempty(impostor, "impostor");
  std::vector<double> g(genuine.begin(), genuine.end());
  std::vector<double> im(impostor.begin(), impostor.end());
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());

  EerResult best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (double t : grid.values()) {
    // Counting via binary search keeps dense grids at O((n + m) log n).
    const auto above = static_cast<double>(im.end() - std::upper_bound(im.begin(), im.end(), t));
    const auto at_or_below = static_cast<double>(std::upper_bound(g.begin(), g.end(), t) - g.begin());
    const double f_match = above / static_cast<double>(im.size());
    const double f_non_match = at_or_below / static_cast<double>(g.size());
    const double gap = std::abs(f_match - f_non_match);
    if (gap < best_gap) {
      best_gap = gap;
      best = EerResult{(f_match + f_non_match) / 2.0, t, f_match, f_non_match};
    }
  }
  return best;
}

EerResult eer(const ScoreSet& scores) {
  const auto genuine = scores.genuine_similarity();
  const auto impostor = scores.impostor_similarity();
  std::vector<double> pooled(genuine);
  pooled.insert(pooled.end(), impostor.begin(), impostor.end());
  auto result = eer(genuine, impostor, ThresholdGrid::midpoints(pooled));
  if (scores.orientation == Orientation::kDistance) result.threshold = -result.threshold;
  return result;
}

std::vector<RocPoint> roc_curve(std::span<const double> genuine, std::span<const double> impostor,
                                const ThresholdGrid& grid) {
  std::vector<RocPoint> rows;
  rows.reserve(grid.size());
  for (double t : grid.values()) rows.push_back(RocPoint{t, fmr(impostor, t), fnmr(genuine, t)});
  return rows;
}

void write_roc_csv(std::ostream& out, std::span<const RocPoint> rows) {
  out << "threshold,fmr,fnmr\n";
  for (const auto& row : rows) {
    out << detail::format_double(row.threshold) << ',' << detail::format_double(row.fmr) << ','
        << detail::format_double(row.fnmr) << '\n';
  }
}

ScaledRates gallery_scaled_rates(double fmr1, double fnmr1, std::size_t n) {
  if (!(fmr1 >= 0.0 && fmr1 <= 1.0) || !(fnmr1 >= 0.0 && fnmr1 <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "rates must lie in [0, 1]");
  }
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "gallery size must be positive");
  const double product = static_cast<double>(n) * fmr1;
  return ScaledRates{std::min(product, 1.0), fnmr1, product < 0.1};
}

}  // namespace biomatch::matcher

#include "biomatch/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "biomatch/error.hpp"
#include "biomatch/model_io.hpp"
#include "text.hpp"

namespace biomatch::harness {

namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage ") + name + ": " + e.what());
  }
}

// Fixed affine map to zero mean / unit variance per feature: the f in
// g = h . f. It is computed from the training inputs and not trained.
nn::LinearLayer standardizer(const std::vector<nn::LabeledSample>& train) {
  const std::size_t n = train.front().input.size();
  std::vector<double> mean(n, 0.0);
  std::vector<double> var(n, 0.0);
  for (const auto& s : train) {
    for (std::size_t i = 0; i < n; ++i) mean[i] += s.input[i];
  }
  for (auto& m : mean) m /= static_cast<double>(train.size());
  for (const auto& s : train) {
    for (std::size_t i = 0; i < n; ++i) var[i] += (s.input[i] - mean[i]) * (s.input[i] - mean[i]);
  }
  nn::LinearLayer layer{nn::Matrix(n, n), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const double sd = std::sqrt(var[i] / static_cast<double>(train.size()));
    const double inv = sd > 1e-12 ? 1.0 / sd : 1.0;
    layer.weights(i, i) = inv;
    layer.bias[i] = -mean[i] * inv;
  }
  return layer;
}

std::string orientation_name(Orientation o) {
  return o == Orientation::kDistance ? "distance" : "similarity";
}

std::size_t samples_per_class(const ExperimentConfig& config) {
  return config.train_per_class + 1 + config.probes_per_class;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_key_values(const KeyValues& kv) {
  ExperimentConfig c;
  c.seed = kv.get_u64("seed", c.seed);
  c.lambda = kv.get_u64("lambda", c.lambda);
  c.space = parse_metric_kind(kv.get_string("space.kind", to_string(c.space)));
  c.capacity = kv.get_u64("capacity", c.capacity);
  c.classes = kv.get_u64("data.classes", c.classes);
  c.dimension = kv.get_u64("data.dim", c.dimension);
  c.center_scale = kv.get_double("data.scale", c.center_scale);
  c.noise_stddev = kv.get_double("data.noise", c.noise_stddev);
  c.train_per_class = kv.get_u64("data.train_per_class", c.train_per_class);
  c.probes_per_class = kv.get_u64("data.probes_per_class", c.probes_per_class);
  c.hidden = kv.get_u64("train.hidden", c.hidden);
  c.epochs = kv.get_u64("train.epochs", c.epochs);
  c.learning_rate = kv.get_double("train.rate", c.learning_rate);
  c.impostor_cap = kv.get_u64("eval.impostor_cap", c.impostor_cap);
  // The extractor embeds into one coordinate per class.
  if (auto dim = kv.get("space.dim"); dim && parse_u64("space.dim", *dim) != c.classes) {
    throw Error(ErrorCode::kInvalidConfig, "space.dim must equal data.classes");
  }
  return c;
}

KeyValues ExperimentConfig::to_key_values() const {
  KeyValues kv;
  kv.set("seed", std::to_string(seed));
  kv.set("lambda", std::to_string(lambda));
  kv.set("space.kind", to_string(space));
  kv.set("capacity", std::to_string(capacity));
  kv.set("data.classes", std::to_string(classes));
  kv.set("data.dim", std::to_string(dimension));
  kv.set("data.scale", detail::format_double(center_scale));
  kv.set("data.noise", detail::format_double(noise_stddev));
  kv.set("data.train_per_class", std::to_string(train_per_class));
  kv.set("data.probes_per_class", std::to_string(probes_per_class));
  kv.set("train.hidden", std::to_string(hidden));
  kv.set("train.epochs", std::to_string(epochs));
  kv.set("train.rate", detail::format_double(learning_rate));
  kv.set("eval.impostor_cap", std::to_string(impostor_cap));
  return kv;
}

StageSeeds StageSeeds::derive(std::uint64_t master) {
  return StageSeeds{master + 1, master + 2, master + 3, master + 4};
}

KeyValues ExperimentReport::to_key_values() const {
  using detail::format_double;
  KeyValues kv;
  kv.set("eer", format_double(eer));
  kv.set("threshold", format_double(threshold));
  kv.set("orientation", orientation_name(orientation));
  kv.set("fmr_at_threshold", format_double(fmr_at_threshold));
  kv.set("fnmr_at_threshold", format_double(fnmr_at_threshold));
  kv.set("system_threshold", format_double(system_threshold));
  kv.set("gallery_size", std::to_string(gallery_size));
  kv.set("fmr_n", format_double(scaled.fmr));
  kv.set("fnmr_n", format_double(scaled.fnmr));
  kv.set("scaled_valid", scaled.valid ? "true" : "false");
  kv.set("genuine_count", std::to_string(genuine_count));
  kv.set("impostor_count", std::to_string(impostor_count));
  kv.set("self_verify_failures", std::to_string(self_verify_failures));
  kv.set("train_loss", format_double(train_loss));
  kv.set("train_error", format_double(train_error));
  kv.set("roc_path", roc_path);
  kv.set("seed.data", std::to_string(seeds.data));
  kv.set("seed.init", std::to_string(seeds.init));
  kv.set("seed.ids", std::to_string(seeds.ids));
  kv.set("seed.impostors", std::to_string(seeds.impostors));
  const KeyValues echo = config.to_key_values();
  for (const auto& [k, v] : echo.entries()) kv.set("config." + k, v);
  return kv;
}

SyntheticData generate_experiment_data(const ExperimentConfig& config) {
  if (config.train_per_class == 0 || config.probes_per_class == 0) {
    throw Error(ErrorCode::kInvalidSpec, "train and probe counts per class must be positive");
  }
  return gen_synthetic(SyntheticDataSpec{config.classes, samples_per_class(config),
                                         config.dimension, config.center_scale,
                                         config.noise_stddev, StageSeeds::derive(config.seed).data});
}

TrainedExtractor train_extractor(const ExperimentConfig& config, const SyntheticData& data) {
  const std::size_t per_class = samples_per_class(config);
  std::vector<nn::LabeledSample> train_set;
  for (std::size_t c = 0; c < config.classes; ++c) {
    const auto* base = &data.samples.at(c * per_class);
    train_set.insert(train_set.end(), base, base + config.train_per_class);
  }
  const std::uint64_t init_seed = StageSeeds::derive(config.seed).init;

  const nn::LinearLayer features = standardizer(train_set);
  std::vector<nn::LabeledSample> standardized = train_set;
  for (auto& s : standardized) s.input = nn::apply_layer(features, s.input);

  const std::size_t widths[] = {config.dimension, config.hidden, config.classes};
  auto head = nn::NeuralNetwork::mlp(widths, nn::ActivationKind::kReLU, true, init_seed);
  auto trained = nn::train(
      std::move(head), standardized,
      nn::TrainingConfig{config.learning_rate, config.epochs, nn::Loss::kCrossEntropy, init_seed});

  std::vector<nn::Layer> layers{features};
  const auto& head_layers = trained.network.layers();
  layers.insert(layers.end(), head_layers.begin(), head_layers.end());

  TrainedExtractor out;
  out.model = nn::NeuralNetwork(std::move(layers), init_seed);
  out.train_loss = trained.epoch_loss.back();
  out.train_error = nn::empirical_error(out.model, train_set);
  return out;
}

ExperimentArtifacts run_experiment(const ExperimentConfig& config) {
  const StageSeeds seeds = StageSeeds::derive(config.seed);
  const std::size_t per_class = samples_per_class(config);

  const SyntheticData data = stage("generate", [&] { return generate_experiment_data(config); });

  std::vector<const nn::LabeledSample*> enrollment;
  std::vector<std::vector<const nn::LabeledSample*>> probes(config.classes);
  for (std::size_t c = 0; c < config.classes; ++c) {
    const auto* base = &data.samples[c * per_class];
    enrollment.push_back(base + config.train_per_class);
    for (std::size_t p = 0; p < config.probes_per_class; ++p) {
      probes[c].push_back(base + config.train_per_class + 1 + p);
    }
  }

  ExperimentArtifacts out;
  ExperimentReport& report = out.report;
  report.seeds = seeds;
  report.config = config;

  out.model = stage("train", [&] {
    auto trained = train_extractor(config, data);
    report.train_loss = trained.train_loss;
    report.train_error = trained.train_error;
    return std::move(trained.model);
  });

  protocol::System system;
  const SpaceDescriptor space = SpaceDescriptor::of(config.space, nn::embedding_dim(out.model));
  report.orientation = space.orientation;

  const std::vector<store::Identifier> ids = stage("enroll", [&] {
    system.init(config.lambda, space, out.model, 0.0, config.capacity, seeds.ids, "experiment");
    std::vector<store::Identifier> enrolled;
    for (const auto* sample : enrollment) enrolled.push_back(system.enroll(sample->input));
    return enrolled;
  });

  out.scores = stage("probe", [&] {
    std::vector<ScoreRow> rows;
    for (std::size_t c = 0; c < config.classes; ++c) {
      for (std::size_t p = 0; p < probes[c].size(); ++p) {
        for (std::size_t t = 0; t < config.classes; ++t) {
          const auto outcome = system.verify(ids[t], probes[c][p]->input);
          rows.push_back(ScoreRow{c, p, t,
                                  c == t ? matcher::ScoreLabel::kGenuine
                                         : matcher::ScoreLabel::kImpostor,
                                  outcome.decision.score});
        }
      }
    }
    std::vector<std::size_t> impostor_rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].label == matcher::ScoreLabel::kImpostor) impostor_rows.push_back(i);
    }
    if (impostor_rows.size() > config.impostor_cap) {
      std::mt19937_64 rng(seeds.impostors);
      std::shuffle(impostor_rows.begin(), impostor_rows.end(), rng);
      std::vector<bool> drop(rows.size(), false);
      for (std::size_t i = config.impostor_cap; i < impostor_rows.size(); ++i) {
        drop[impostor_rows[i]] = true;
      }
      std::vector<ScoreRow> kept;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!drop[i]) kept.push_back(rows[i]);
      }
      rows = std::move(kept);
    }
    return rows;
  });

  stage("rates", [&] {
    matcher::ScoreSet set;
    set.orientation = space.orientation;
    for (const auto& row : out.scores) {
      set.scores.push_back(matcher::Score{row.score, row.label});
      (row.label == matcher::ScoreLabel::kGenuine ? report.genuine_count : report.impostor_count)++;
    }
    const auto eer = matcher::eer(set);
    report.eer = eer.eer;
    report.threshold = eer.threshold;
    report.fmr_at_threshold = eer.fmr;
    report.fnmr_at_threshold = eer.fnmr;

    const auto genuine = set.genuine_similarity();
    const auto impostor = set.impostor_similarity();
    std::vector<double> pooled(genuine);
    pooled.insert(pooled.end(), impostor.begin(), impostor.end());
    out.roc = matcher::roc_curve(genuine, impostor, matcher::ThresholdGrid::midpoints(pooled));
    if (space.orientation == Orientation::kDistance) {
      for (auto& row : out.roc) row.threshold = -row.threshold;
    }

    report.system_threshold = system.calibrate(set);
    report.gallery_size = system.gallery().size();
    report.scaled = matcher::gallery_scaled_rates(eer.fmr, eer.fnmr, report.gallery_size);
    return 0;
  });

  stage("self-verify", [&] {
    for (std::size_t c = 0; c < config.classes; ++c) {
      if (!system.verify(ids[c], enrollment[c]->input).decision.accept) {
        ++report.self_verify_failures;
      }
    }
    return 0;
  });

  out.params = system.params();
  out.gallery = system.gallery();
  out.transcript = system.transcript();
  return out;
}

void write_scores_csv(std::ostream& out, const std::vector<ScoreRow>& rows) {
  out << "identity,probe,template,label,score\n";
  for (const auto& r : rows) {
    out << r.identity << ',' << r.probe << ',' << r.template_identity << ','
        << (r.label == matcher::ScoreLabel::kGenuine ? "genuine" : "impostor") << ','
        << detail::format_double(r.score) << '\n';
  }
}

std::vector<ScoreRow> read_scores_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line != "identity,probe,template,label,score") {
    throw Error(ErrorCode::kInvalidArgument, "'" + path + "' is not a score file");
  }
  std::vector<ScoreRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 5 || (fields[3] != "genuine" && fields[3] != "impostor")) {
      throw Error(ErrorCode::kInvalidArgument, "malformed score row '" + line + "'");
    }
    rows.push_back(ScoreRow{parse_u64("identity", fields[0]), parse_u64("probe", fields[1]),
                            parse_u64("template", fields[2]),
                            fields[3] == "genuine" ? matcher::ScoreLabel::kGenuine
                                                   : matcher::ScoreLabel::kImpostor,
                            parse_double("score", fields[4])});
  }
  return rows;
}

void write_artifacts(const ExperimentArtifacts& artifacts, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path root(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(root / name, std::ios::trunc);
    if (!f) throw Error(ErrorCode::kIo, "cannot write '" + (root / name).string() + "'");
    return f;
  };
  {
    auto f = open("report.txt");
    f << artifacts.report.to_key_values().to_text(':');
  }
  {
    auto f = open(artifacts.report.roc_path);
    matcher::write_roc_csv(f, artifacts.roc);
  }
  {
    auto f = open("scores.csv");
    write_scores_csv(f, artifacts.scores);
  }
  {
    auto f = open("transcript.txt");
    artifacts.transcript.write(f);
  }
  protocol::to_key_values(artifacts.params).save((root / "params.txt").string(), ':');
  store::save_gallery(artifacts.gallery, (root / "gallery.bmdb").string());
  nn::save_model(artifacts.model, (root / "model.bmnn").string());
}

ReportCheck check_report(const KeyValues& report, const std::vector<ScoreRow>& scores) {
  const double threshold = report.require_double("threshold");
  const bool distance = report.require("orientation") == "distance";
  std::vector<double> genuine;
  std::vector<double> impostor;
  for (const auto& row : scores) {
    const double s = distance ? -row.score : row.score;
    (row.label == matcher::ScoreLabel::kGenuine ? genuine : impostor).push_back(s);
  }
  const double t = distance ? -threshold : threshold;
  ReportCheck check;
  check.fmr = matcher::fmr(impostor, t);
  check.fnmr = matcher::fnmr(genuine, t);
  check.consistent = check.fmr == report.require_double("fmr_at_threshold") &&
                     check.fnmr == report.require_double("fnmr_at_threshold");
  return check;
}

}  // namespace biomatch::harness

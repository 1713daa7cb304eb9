#include "biomatch/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "biomatch/config.hpp"
#include "biomatch/error.hpp"
#include "biomatch/experiment.hpp"
#include "biomatch/model_io.hpp"
#include "biomatch/protocol.hpp"
#include "biomatch/template_store.hpp"
#include "text.hpp"

namespace biomatch::cli {

namespace {

namespace fs = std::filesystem;
using detail::format_double;

// Raised for problems the caller can fix by changing the command line.
struct UsageError {
  std::string message;
};

struct Invocation {
  std::string config_path;
  std::string input;
  std::string id;
  std::string out_dir;
  std::string in_dir;
  std::string model_out;
  std::string transcript;
};

KeyValues load_config(const Invocation& inv) {
  if (inv.config_path.empty()) {
    throw UsageError{"no config file: pass --config or set BIOMATCH_CONFIG"};
  }
  return KeyValues::load(inv.config_path, '=');
}

std::string params_path(const std::string& store_path) { return store_path + ".params"; }

std::string model_path(const KeyValues& cfg) { return cfg.require("model.path"); }

// Rebuilds the verifier state persisted by `init` and earlier enrollments.
void attach(protocol::System& system, const KeyValues& cfg) {
  const std::string store = cfg.require("store.path");
  const auto params = protocol::params_from_key_values(KeyValues::load(params_path(store), ':'));
  system.attach(params, nn::load_model(model_path(cfg)), store::load_gallery(store));
}

void append_transcript(const protocol::System& system, const std::string& path) {
  if (path.empty()) return;
  std::ofstream f(path, std::ios::app);
  if (!f) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  system.transcript().write(f);
}

int cmd_init(const Invocation& inv, std::ostream& out) {
  const KeyValues cfg = load_config(inv);
  const std::string store = cfg.require("store.path");
  if (fs::exists(store) || fs::exists(params_path(store))) {
    throw Error(ErrorCode::kAlreadyInitialized, "a system already exists at '" + store + "'");
  }
  nn::NeuralNetwork model = nn::load_model(model_path(cfg));
  const auto kind = parse_metric_kind(cfg.require("space.kind"));
  const std::size_t dim = cfg.get_u64("space.dim", nn::embedding_dim(model));

  protocol::System system;
  const auto params =
      system.init(cfg.require_u64("lambda"), SpaceDescriptor::of(kind, dim), std::move(model),
                  cfg.require_double("threshold"), cfg.require_u64("capacity"),
                  cfg.get_u64("seed", 0), fs::path(model_path(cfg)).filename().string());
  store::save_gallery(system.gallery(), store);
  protocol::to_key_values(params).save(params_path(store), ':');
  out << "status:initialized store:" << store << " lambda:" << params.lambda
      << " space:" << to_string(params.space.kind) << " dim:" << params.space.dimension
      << " threshold:" << format_double(params.threshold)
      << " digest:" << params.extractor.digest << '\n';
  return kExitOk;
}

int cmd_enroll(const Invocation& inv, std::ostream& out) {
  const KeyValues cfg = load_config(inv);
  const auto sample = read_sample_file(inv.input);
  protocol::System system;
  attach(system, cfg);
  const auto id = system.enroll(sample);
  store::save_gallery(system.gallery(), cfg.require("store.path"));
  append_transcript(system, inv.transcript);
  out << "id:" << id.to_hex() << " gallery_size:" << system.gallery().size() << '\n';
  return kExitOk;
}

int cmd_verify(const Invocation& inv, std::ostream& out) {
  store::Identifier id;
  try {
    id = store::Identifier::from_hex(inv.id);
  } catch (const Error& e) {
    throw UsageError{e.what()};
  }
  const KeyValues cfg = load_config(inv);
  const auto sample = read_sample_file(inv.input);
  protocol::System system;
  attach(system, cfg);
  const auto outcome = system.verify(id, sample);
  append_transcript(system, inv.transcript);
  out << "decision:" << (outcome.decision.accept ? "accept" : "reject")
      << " reason:" << protocol::to_string(outcome.reason)
      << " score:" << format_double(outcome.decision.score)
      << " threshold:" << format_double(outcome.decision.threshold) << '\n';
  return outcome.decision.accept ? kExitOk : kExitNegative;
}

int cmd_identify(const Invocation& inv, std::ostream& out) {
  const KeyValues cfg = load_config(inv);
  const auto sample = read_sample_file(inv.input);
  protocol::System system;
  attach(system, cfg);
  const auto result = system.identify(sample);
  append_transcript(system, inv.transcript);
  if (result.matched()) {
    out << "outcome:identified id:" << result.identified->to_hex()
        << " score:" << format_double(result.best_score)
        << " margin:" << format_double(result.runner_up_margin) << '\n';
    return kExitOk;
  }
  out << "outcome:nomatch";
  if (system.gallery().size() > 0) out << " score:" << format_double(result.best_score);
  out << '\n';
  return kExitNegative;
}

int cmd_train(const Invocation& inv, std::ostream& out) {
  const KeyValues cfg = load_config(inv);
  const auto config = harness::ExperimentConfig::from_key_values(cfg);
  const std::string path = inv.model_out.empty() ? model_path(cfg) : inv.model_out;
  const auto data = harness::generate_experiment_data(config);
  const auto trained = harness::train_extractor(config, data);
  nn::save_model(trained.model, path);
  out << "model:" << path << " embedding_dim:" << nn::embedding_dim(trained.model)
      << " train_loss:" << format_double(trained.train_loss)
      << " train_error:" << format_double(trained.train_error)
      << " digest:" << nn::model_digest(trained.model) << '\n';
  return kExitOk;
}

int cmd_gen_data(const Invocation& inv, std::ostream& out) {
  const KeyValues cfg = load_config(inv);
  const auto config = harness::ExperimentConfig::from_key_values(cfg);
  const auto data = harness::generate_experiment_data(config);
  const fs::path root(inv.out_dir);
  fs::create_directories(root);
  const std::size_t per_class = config.train_per_class + 1 + config.probes_per_class;

  std::ofstream index(root / "index.csv", std::ios::trunc);
  if (!index) throw Error(ErrorCode::kIo, "cannot write '" + (root / "index.csv").string() + "'");
  index << "file,label,split\n";
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const std::size_t pos = i % per_class;
    const char* split = pos < config.train_per_class    ? "train"
                        : pos == config.train_per_class ? "enroll"
                                                        : "probe";
    const std::string name =
        "c" + std::to_string(data.samples[i].label) + "_s" + std::to_string(pos) + ".txt";
    write_sample_file((root / name).string(), data.samples[i].input);
    index << name << ',' << data.samples[i].label << ',' << split << '\n';
  }
  out << "samples:" << data.samples.size() << " classes:" << config.classes
      << " dim:" << config.dimension << " out:" << root.string() << '\n';
  return kExitOk;
}

int cmd_evaluate(const Invocation& inv, std::ostream& out) {
  const KeyValues cfg = load_config(inv);
  const auto config = harness::ExperimentConfig::from_key_values(cfg);
  const auto artifacts = harness::run_experiment(config);
  harness::write_artifacts(artifacts, inv.out_dir);
  const auto& r = artifacts.report;
  const fs::path root(inv.out_dir);
  out << "eer:" << format_double(r.eer) << " threshold:" << format_double(r.threshold)
      << " fmr_n:" << format_double(r.scaled.fmr) << " scaled_valid:"
      << (r.scaled.valid ? "true" : "false") << " report:" << (root / "report.txt").string()
      << " roc:" << (root / r.roc_path).string() << '\n';
  return kExitOk;
}

int cmd_report(const Invocation& inv, std::ostream& out) {
  const fs::path root(inv.in_dir);
  const KeyValues report = KeyValues::load((root / "report.txt").string(), ':');
  const auto scores = harness::read_scores_csv((root / "scores.csv").string());
  const auto check = harness::check_report(report, scores);
  out << "eer:" << report.require("eer") << " threshold:" << report.require("threshold")
      << " orientation:" << report.require("orientation")
      << " fmr:" << format_double(check.fmr) << " fnmr:" << format_double(check.fnmr)
      << " consistent:" << (check.consistent ? "true" : "false") << '\n';
  if (!check.consistent) {
    throw Error(ErrorCode::kInvalidArgument, "report rates differ from the persisted scores");
  }
  return kExitOk;
}

}  // namespace

std::vector<double> read_sample_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    values.push_back(
        parse_double(path + ":" + std::to_string(line_no), line.substr(first, last - first + 1)));
  }
  return values;
}

void write_sample_file(const std::string& path, std::span<const double> values) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  for (double v : values) f << format_double(v) << '\n';
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Biometric template enrollment, matching and evaluation.", "biomatch"};
  Invocation inv;
  app.add_option("--config", inv.config_path, "key=value config file")->envname("BIOMATCH_CONFIG");
  app.require_subcommand(1);

  auto* init = app.add_subcommand("init", "Create an empty system from the config");
  auto* enroll = app.add_subcommand("enroll", "Enroll one raw sample, print its id");
  enroll->add_option("--input", inv.input, "sample file")->required();
  auto* verify = app.add_subcommand("verify", "Verify a raw sample against an id");
  verify->add_option("--id", inv.id, "identifier (hex)")->required();
  verify->add_option("--input", inv.input, "sample file")->required();
  auto* identify = app.add_subcommand("identify", "Search the gallery for a raw sample");
  identify->add_option("--input", inv.input, "sample file")->required();
  for (auto* sub : {enroll, verify, identify}) {
    sub->add_option("--transcript", inv.transcript, "append protocol messages to this file");
  }
  auto* train = app.add_subcommand("train", "Train the extractor and save it to model.path");
  train->add_option("--out", inv.model_out, "model file (overrides model.path)");
  auto* gen = app.add_subcommand("gen-data", "Write the synthetic samples as sample files");
  gen->add_option("--out", inv.out_dir, "output directory")->required();
  auto* evaluate = app.add_subcommand("evaluate", "Run the full experiment, write artifacts");
  evaluate->add_option("--out", inv.out_dir, "output directory")->required();
  auto* report = app.add_subcommand("report", "Re-check a report against its score file");
  report->add_option("--in", inv.in_dir, "directory written by evaluate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "usage error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  try {
    if (init->parsed()) return cmd_init(inv, out);
    if (enroll->parsed()) return cmd_enroll(inv, out);
    if (verify->parsed()) return cmd_verify(inv, out);
    if (identify->parsed()) return cmd_identify(inv, out);
    if (train->parsed()) return cmd_train(inv, out);
    if (gen->parsed()) return cmd_gen_data(inv, out);
    if (evaluate->parsed()) return cmd_evaluate(inv, out);
    if (report->parsed()) return cmd_report(inv, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.message << '\n' << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error:" << to_string(e.code()) << " message:" << e.what() << '\n';
    return kExitFault;
  } catch (const std::exception& e) {
    err << "error:Internal message:" << e.what() << '\n';
    return kExitFault;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"biomatch"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace biomatch::cli

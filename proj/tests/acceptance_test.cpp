// Acceptance gate: every criterion runs at its stated size and tolerance and
// prints exactly one PASS/FAIL line. Exit status is non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "biomatch/circuit.hpp"
#include "biomatch/error.hpp"
#include "biomatch/experiment.hpp"
#include "biomatch/matcher.hpp"
#include "biomatch/metric.hpp"
#include "biomatch/model_io.hpp"
#include "biomatch/nn.hpp"
#include "biomatch/protocol.hpp"
#include "biomatch/template_store.hpp"
#include "circuit_gen.hpp"
#include "oracles.hpp"

using namespace biomatch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// 1. Metric axioms over random triples.

template <class Point, class Dist, class Eq>
void check_axioms(Outcome& o, const std::string& name, const std::vector<Point>& xs,
                  const std::vector<Point>& ys, const std::vector<Point>& zs, Dist d, Eq same,
                  double tol) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto &x = xs[i], &y = ys[i], &z = zs[i];
    const double dxy = d(x, y), dyx = d(y, x), dxz = d(x, z), dyz = d(y, z);
    if (d(x, x) != 0) o.fail(name + ": d(x,x) != 0");
    if ((dxy == 0) != same(x, y)) o.fail(name + ": d(x,y)=0 disagrees with x=y");
    if (std::abs(dxy - dyx) > tol) o.fail(name + ": asymmetric");
    if (dxz > dxy + dyz + tol) o.fail(name + ": triangle inequality violated");
  }
}

Outcome metric_axioms() {
  Outcome o;
  oracle::Gen gen(1001);
  const int kTriples = 1000;
  // A quarter of the pairs repeat a point so the identity axiom is exercised.
  auto pick = [&](const auto& fresh, const auto& prev) { return gen.index(4) == 0 ? prev : fresh; };

  std::vector<BitString> hx, hy, hz;
  std::vector<SymbolString> lx, ly, lz;
  std::vector<std::vector<double>> rx, ry, rz;
  for (int i = 0; i < kTriples; ++i) {
    const std::size_t n = 1 + gen.index(32);
    hx.push_back({gen.bits(n)});
    hy.push_back(pick(BitString{gen.bits(n)}, hx.back()));
    hz.push_back(pick(BitString{gen.bits(n)}, hy.back()));
    lx.push_back({gen.word(8, "abcd")});
    ly.push_back(pick(SymbolString{gen.word(8, "abcd")}, lx.back()));
    lz.push_back(pick(SymbolString{gen.word(8, "abcd")}, ly.back()));
    const std::size_t m = 1 + gen.index(16);
    rx.push_back(gen.reals(m, -100, 100));
    ry.push_back(pick(gen.reals(m, -100, 100), rx.back()));
    rz.push_back(pick(gen.reals(m, -100, 100), ry.back()));
  }
  auto eq = [](const auto& a, const auto& b) { return a == b; };
  check_axioms(o, "hamming", hx, hy, hz,
               [](const BitString& a, const BitString& b) { return double(hamming_distance(a, b)); },
               eq, 0.0);
  check_axioms(o, "levenshtein", lx, ly, lz,
               [](const SymbolString& a, const SymbolString& b) {
                 return double(levenshtein_distance(a, b));
               },
               eq, 0.0);
  check_axioms(o, "euclidean", rx, ry, rz,
               [](const auto& a, const auto& b) { return euclidean_distance(a, b); }, eq, 1e-9);
  check_axioms(o, "chebyshev", rx, ry, rz,
               [](const auto& a, const auto& b) { return chebyshev_distance(a, b); }, eq, 1e-9);
  if (o.pass) o.detail = "4 metrics x " + std::to_string(kTriples) + " triples";
  return o;
}

// ---------------------------------------------------------------------------
// 2. Levenshtein against the literal recursion.

Outcome levenshtein_oracle() {
  Outcome o;
  std::vector<std::string> words{""};
  for (std::size_t len = 1; len <= 3; ++len) {
    std::vector<std::string> next;
    for (const auto& w : words) {
      if (w.size() != len - 1) continue;
      for (char c : std::string("abc")) next.push_back(w + c);
    }
    words.insert(words.end(), next.begin(), next.end());
  }
  std::size_t pairs = 0;
  for (const auto& a : words) {
    for (const auto& b : words) {
      ++pairs;
      if (levenshtein_distance({a}, {b}) != oracle::naive_levenshtein(a, b)) {
        o.fail("mismatch on '" + a + "' / '" + b + "'");
      }
    }
  }
  oracle::Gen gen(1002);
  for (int i = 0; i < 500; ++i) {
    const auto a = gen.word(6, "abc");
    const auto b = gen.word(6, "abc");
    if (levenshtein_distance({a}, {b}) != oracle::naive_levenshtein(a, b)) {
      o.fail("mismatch on '" + a + "' / '" + b + "'");
    }
  }
  if (o.pass) o.detail = std::to_string(pairs) + " exhaustive pairs + 500 random, exact";
  return o;
}

// ---------------------------------------------------------------------------
// 3. FMR_t(S) + FNMR_t(S) = 1.

Outcome complementarity() {
  Outcome o;
  oracle::Gen gen(1003);
  for (int i = 0; i < 1000; ++i) {
    const auto s = gen.reals(1 + gen.index(100), -1, 1);
    const double t = gen.coin() ? s[gen.index(s.size())] : gen.real(-1.5, 1.5);
    if (matcher::fmr(s, t) + matcher::fnmr(s, t) != 1.0) o.fail("sum != 1 at trial " + std::to_string(i));
  }
  if (o.pass) o.detail = "1000 (S, t) pairs, exact";
  return o;
}

// ---------------------------------------------------------------------------
// 4. EER on separated and identical score sets.

Outcome eer_sanity() {
  Outcome o;
  oracle::Gen gen(1004);
  auto midpoint_eer = [](const std::vector<double>& g, const std::vector<double>& i) {
    std::vector<double> pooled(g);
    pooled.insert(pooled.end(), i.begin(), i.end());
    return matcher::eer(g, i, matcher::ThresholdGrid::midpoints(pooled));
  };
  for (int trial = 0; trial < 20; ++trial) {
    const auto genuine = gen.reals(1 + gen.index(200), 0.5, 1.0);
    const auto impostor = gen.reals(1 + gen.index(200), -1.0, 0.49);
    if (midpoint_eer(genuine, impostor).eer != 0.0) o.fail("separated sets gave eer > 0");
  }
  const auto same = gen.reals(10000, 0.0, 1.0);
  const double e = midpoint_eer(same, same).eer;
  if (std::abs(e - 0.5) > 0.02) o.fail("identical sets gave eer " + fmt(e));
  if (o.pass) o.detail = "separated -> 0; identical 10000 -> " + fmt(e);
  return o;
}

// ---------------------------------------------------------------------------
// 5. Backprop against central differences.

Outcome gradient_check() {
  Outcome o;
  oracle::Gen gen(1005);
  double worst = 0.0;
  std::size_t coords = 0;
  for (int net_i = 0; net_i < 20; ++net_i) {
    const nn::Loss loss = net_i % 2 == 0 ? nn::Loss::kSquaredError : nn::Loss::kCrossEntropy;
    const std::size_t depth = 1 + gen.index(3);
    std::vector<std::size_t> widths{1 + gen.index(8)};
    for (std::size_t l = 0; l < depth; ++l) widths.push_back(1 + gen.index(16));
    if (loss == nn::Loss::kCrossEntropy) widths.back() = std::max<std::size_t>(widths.back(), 2);
    const auto hidden = gen.coin() ? nn::ActivationKind::kSigmoid : nn::ActivationKind::kReLU;
    auto net = nn::NeuralNetwork::mlp(widths, hidden, loss == nn::Loss::kCrossEntropy, gen.rng());
    auto theta = nn::flatten_parameters(net);
    for (auto& p : theta) p += gen.real(-0.2, 0.2);
    net = nn::with_parameters(net, theta);

    std::vector<nn::LabeledSample> batch;
    for (int s = 0; s < 5; ++s) {
      nn::LabeledSample sample{gen.reals(widths.front(), -2, 2), gen.index(widths.back()), {}};
      if (loss == nn::Loss::kSquaredError) sample.target = gen.reals(widths.back(), -1, 1);
      batch.push_back(std::move(sample));
    }
    const auto analytic = nn::flatten(nn::backprop_gradients(net, batch, loss));
    const auto numeric = oracle::finite_difference_gradient(net, batch, loss, 1e-5);
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      const double scale = std::max(std::abs(analytic[k]), std::abs(numeric[k]));
      if (scale <= 1e-8) continue;
      ++coords;
      const double rel = std::abs(analytic[k] - numeric[k]) / scale;
      worst = std::max(worst, rel);
      if (rel >= 1e-4) {
        o.fail("net " + std::to_string(net_i) + " coordinate " + std::to_string(k) +
               " relative error " + fmt(rel));
      }
    }
  }
  if (o.pass) {
    o.detail = "20 nets, " + std::to_string(coords) + " coordinates, worst relative error " + fmt(worst);
  }
  return o;
}

// ---------------------------------------------------------------------------
// 6. Circuit compiler truth tables.

Outcome circuit_compiler() {
  Outcome o;
  using nn::Gate;
  using nn::GateKind;
  std::vector<nn::BooleanCircuit> corpus;
  corpus.emplace_back(1, std::vector<Gate>{{GateKind::kInput, {}, 0}, {GateKind::kNot, {0}, 0}},
                      std::vector<std::size_t>{1});
  corpus.emplace_back(2,
                      std::vector<Gate>{{GateKind::kInput, {}, 0}, {GateKind::kInput, {}, 1},
                                        {GateKind::kAnd, {0, 1}, 0}},
                      std::vector<std::size_t>{2});
  corpus.emplace_back(3,
                      std::vector<Gate>{{GateKind::kInput, {}, 0},
                                        {GateKind::kInput, {}, 1},
                                        {GateKind::kInput, {}, 2},
                                        {GateKind::kAnd, {0, 1}, 0},
                                        {GateKind::kNot, {2}, 0},
                                        {GateKind::kOr, {3, 4}, 0}},
                      std::vector<std::size_t>{5});
  // 8-input parity-like ladder reaching depth 5.
  {
    std::vector<Gate> g;
    for (std::size_t i = 0; i < 8; ++i) g.push_back({GateKind::kInput, {}, i});
    g.push_back({GateKind::kAnd, {0, 1, 2}, 0});       // 8, depth 1
    g.push_back({GateKind::kOr, {3, 4}, 0});           // 9, depth 1
    g.push_back({GateKind::kNot, {8}, 0});             // 10, depth 2
    g.push_back({GateKind::kOr, {10, 9, 5}, 0});       // 11, depth 3
    g.push_back({GateKind::kAnd, {11, 6}, 0});         // 12, depth 4
    g.push_back({GateKind::kOr, {12, 7, 0}, 0});       // 13, depth 5
    corpus.emplace_back(8, g, std::vector<std::size_t>{13, 10});
  }
  oracle::Gen gen(1006);
  while (corpus.size() < 40) {
    corpus.push_back(oracle::random_circuit(gen, 1 + gen.index(8), 1 + gen.index(5)));
  }

  std::size_t rows = 0;
  for (std::size_t ci = 0; ci < corpus.size(); ++ci) {
    const auto& c = corpus[ci];
    if (c.arity() > 8 || c.depth() > 5) o.fail("corpus circuit outside arity/depth limits");
    const auto net = nn::circuit_to_mlp(c);
    for (std::size_t row = 0; row < (std::size_t{1} << c.arity()); ++row) {
      ++rows;
      const auto x = oracle::assignment(c.arity(), row);
      const auto y = nn::forward(net, std::vector<double>(x.begin(), x.end()));
      for (std::size_t k = 0; k < c.outputs().size(); ++k) {
        const double want = oracle::eval_gate(c.gates(), c.outputs()[k], x) ? 1.0 : 0.0;
        if (y.size() != c.outputs().size() || y[k] != want) {
          o.fail("circuit " + std::to_string(ci) + " differs on row " + std::to_string(row));
        }
      }
    }
  }
  if (o.pass) {
    o.detail = std::to_string(corpus.size()) + " circuits, " + std::to_string(rows) + " rows, exact";
  }
  return o;
}

// ---------------------------------------------------------------------------
// 7. End-to-end verification on synthetic identities.

Outcome end_to_end() {
  Outcome o;
  harness::ExperimentConfig separable;
  separable.classes = 8;
  separable.dimension = 16;
  separable.center_scale = 10.0;
  separable.noise_stddev = 0.05;  // noise / scale = 0.005
  const auto a = harness::run_experiment(separable);
  if (a.report.eer >= 0.05) o.fail("separable eer " + fmt(a.report.eer));
  if (a.report.self_verify_failures != 0) {
    o.fail(std::to_string(a.report.self_verify_failures) + " enrolled samples failed to self-verify");
  }

  harness::ExperimentConfig blurred = separable;
  blurred.center_scale = 0.1;
  blurred.noise_stddev = 100.0;  // noise / scale = 1000
  const auto b = harness::run_experiment(blurred);
  if (b.report.eer < 0.3) o.fail("indistinguishable eer " + fmt(b.report.eer));
  if (o.pass) {
    o.detail = "separable eer " + fmt(a.report.eer) + ", self-verify 8/8; indistinguishable eer " +
               fmt(b.report.eer);
  }
  return o;
}

// ---------------------------------------------------------------------------
// 8. identify against a linear scan, and identify => verify.

Outcome identification_consistency() {
  Outcome o;
  oracle::Gen gen(1008);
  const std::size_t dim = 4;
  const nn::NeuralNetwork ident({nn::LinearLayer{nn::Matrix::identity(dim), std::vector<double>(dim, 0.0)}});
  const auto space = SpaceDescriptor::of(MetricKind::kEuclidean, dim);
  std::size_t identified = 0;
  for (int trial = 0; trial < 500; ++trial) {
    protocol::System sys;
    sys.init(64, space, ident, gen.real(0.0, 3.0), 64, gen.rng());
    const std::size_t n = gen.index(65);
    std::vector<std::vector<double>> enrolled;
    for (std::size_t i = 0; i < n; ++i) {
      enrolled.push_back(gen.reals(dim, -3, 3));
      sys.enroll(enrolled.back());
    }
    std::vector<double> probe = gen.reals(dim, -3, 3);
    if (n > 0 && gen.coin()) {
      probe = enrolled[gen.index(n)];
      for (auto& v : probe) v += gen.real(-0.5, 0.5);
    }
    const double t = sys.params().threshold;
    const auto gallery = sys.gallery();
    const std::vector<store::TemplateRecord> records(gallery.records().begin(), gallery.records().end());
    const auto scan = oracle::linear_scan(records, probe, t);
    const auto r = sys.identify(probe);
    if (r.matched() != scan.index.has_value()) {
      o.fail("trial " + std::to_string(trial) + ": match/no-match disagrees with scan");
      continue;
    }
    if (n > 0 && r.best_score != scan.best) o.fail("trial " + std::to_string(trial) + ": best score differs");
    if (!r.matched()) continue;
    ++identified;
    if (*r.identified != records[*scan.index].id) o.fail("trial " + std::to_string(trial) + ": id differs");
    const auto v = sys.verify(*r.identified, probe);
    if (!v.decision.accept || v.decision.score != r.best_score) {
      o.fail("trial " + std::to_string(trial) + ": identified id does not verify with equal score");
    }
  }
  if (o.pass) o.detail = "500 galleries, " + std::to_string(identified) + " identifications, exact";
  return o;
}

// ---------------------------------------------------------------------------
// 9. P(at least one false match among n) versus n * FMR.

Outcome gallery_scaling() {
  Outcome o;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const int kTrials = 100000;
  std::string detail;
  for (const auto [n, fmr1] : {std::pair<std::size_t, double>{10, 0.005}, {50, 0.001}}) {
    // Impostor similarity ~ U(0, 1) has FMR_t = 1 - t.
    const double t = 1.0 - fmr1;
    // One stream per configuration. At 100000 trials the estimator's standard
    // deviation (~0.0007) is about half the headroom left inside the gap.
    std::mt19937_64 rng(1009 + n);
    std::vector<double> scores(n);
    int any = 0;
    for (int trial = 0; trial < kTrials; ++trial) {
      for (auto& s : scores) s = uniform(rng);
      if (matcher::fmr(scores, t) > 0.0) ++any;
    }
    const double mc = static_cast<double>(any) / kTrials;
    const auto scaled = matcher::gallery_scaled_rates(fmr1, 0.0, n);
    const double gap = static_cast<double>(n * n) * fmr1 * fmr1;
    const double dev = std::abs(mc - scaled.fmr);
    if (!scaled.valid) o.fail("n*FMR should be in the valid regime");
    const double exact = 1.0 - std::pow(1.0 - fmr1, static_cast<double>(n));
    if (std::abs(exact - scaled.fmr) > gap) o.fail("closed form exceeds the union-bound gap");
    if (dev > gap) {
      o.fail("n=" + std::to_string(n) + ": |" + fmt(mc) + " - " + fmt(scaled.fmr) + "| = " + fmt(dev) +
             " > " + fmt(gap));
    }
    detail += (detail.empty() ? "" : "; ") + std::string("n=") + std::to_string(n) + " mc " + fmt(mc) +
              " vs " + fmt(scaled.fmr) + " (gap " + fmt(dev) + " <= " + fmt(gap) + ")";
  }
  if (o.pass) o.detail = detail;
  return o;
}

// ---------------------------------------------------------------------------
// 10. Determinism and persistence.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class Fn>
bool rejects_as(Fn&& fn, CorruptKind kind) {
  try {
    fn();
  } catch (const CorruptFileError& e) {
    return e.kind() == kind;
  } catch (...) {
  }
  return false;
}

Outcome determinism_and_persistence() {
  Outcome o;
  harness::ExperimentConfig cfg;
  cfg.seed = 2024;
  const auto root = fs::temp_directory_path() / "biomatch_acceptance";
  fs::remove_all(root);
  harness::write_artifacts(harness::run_experiment(cfg), (root / "a").string());
  harness::write_artifacts(harness::run_experiment(cfg), (root / "b").string());
  for (const char* f : {"report.txt", "gallery.bmdb", "roc.csv", "scores.csv", "model.bmnn"}) {
    if (slurp(root / "a" / f) != slurp(root / "b" / f)) o.fail(std::string(f) + " differs between runs");
  }

  const auto gallery_path = (root / "a" / "gallery.bmdb").string();
  const auto model_path = (root / "a" / "model.bmnn").string();
  const auto gallery = store::load_gallery(gallery_path);
  const auto model = nn::load_model(model_path);
  store::save_gallery(gallery, (root / "g2.bmdb").string());
  nn::save_model(model, (root / "m2.bmnn").string());
  if (slurp(root / "g2.bmdb") != slurp(gallery_path)) o.fail("gallery save/load is not bit-exact");
  if (slurp(root / "m2.bmnn") != slurp(model_path)) o.fail("model save/load is not bit-exact");
  if (store::load_gallery((root / "g2.bmdb").string()) != gallery) o.fail("gallery changed on reload");
  if (nn::load_model((root / "m2.bmnn").string()) != model) o.fail("model changed on reload");

  const auto gbytes = store::serialize_gallery(gallery);
  const auto mbytes = nn::serialize_model(model);
  int rejected = 0;
  auto expect = [&](bool ok, const char* what) {
    if (ok) {
      ++rejected;
    } else {
      o.fail(std::string("corrupt case not rejected correctly: ") + what);
    }
  };
  for (const auto* bytes : {&gbytes, &mbytes}) {
    const bool is_store = bytes == &gbytes;
    auto load = [&](std::vector<std::uint8_t> b) {
      return [b, is_store] {
        if (is_store) {
          store::deserialize_gallery(b);
        } else {
          nn::deserialize_model(b);
        }
      };
    };
    auto magic = *bytes;
    magic[0] ^= 0xFF;
    expect(rejects_as(load(magic), CorruptKind::kBadMagic), "bad magic");
    auto version = *bytes;
    version[4] += 1;
    expect(rejects_as(load(version), CorruptKind::kBadVersion), "bad version");
    auto cut = *bytes;
    cut.resize(cut.size() / 2);
    expect(rejects_as(load(cut), CorruptKind::kTruncated), "truncated");
    auto one_short = *bytes;
    one_short.pop_back();
    expect(rejects_as(load(one_short), CorruptKind::kTruncated), "one byte short");
    auto trailing = *bytes;
    trailing.push_back(7);
    expect(rejects_as(load(trailing), CorruptKind::kMalformed), "trailing bytes");
  }
  fs::remove_all(root);
  if (o.pass) {
    o.detail = "report, gallery, ROC byte-identical; round trips bit-exact; " + std::to_string(rejected) +
               " corrupt files rejected";
  }
  return o;
}

struct Criterion {
  int number;
  const char* name;
  double time_limit_s;  // 0: none stated
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "metric axioms", 10, metric_axioms},
      {2, "levenshtein oracle equivalence", 0, levenshtein_oracle},
      {3, "FMR/FNMR complementarity", 0, complementarity},
      {4, "EER sanity", 0, eer_sanity},
      {5, "gradient correctness", 30, gradient_check},
      {6, "circuit compiler truth tables", 0, circuit_compiler},
      {7, "end-to-end verification", 120, end_to_end},
      {8, "identification consistency", 0, identification_consistency},
      {9, "gallery scaling", 0, gallery_scaling},
      {10, "determinism and persistence", 0, determinism_and_persistence},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
      o.fail("took " + fmt(secs) + " s, limit " + fmt(c.time_limit_s) + " s");
    }
    if (!o.pass) ++failures;
    std::printf("%s [%2d] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.number, c.name, o.detail.c_str(), secs);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

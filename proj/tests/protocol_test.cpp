#include "biomatch/protocol.hpp"

#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "biomatch/error.hpp"
#include "biomatch/model_io.hpp"
#include "oracles.hpp"

using namespace biomatch;
using namespace biomatch::protocol;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIo;
}

nn::NeuralNetwork identity_model(std::size_t n) {
  return nn::NeuralNetwork({nn::LinearLayer{nn::Matrix::identity(n), std::vector<double>(n, 0.0)}});
}

const SpaceDescriptor kEuclid8 = SpaceDescriptor::of(MetricKind::kEuclidean, 8);

std::vector<double> unit(std::size_t n, std::size_t axis, double scale) {
  std::vector<double> v(n, 0.0);
  v[axis] = scale;
  return v;
}

}  // namespace

TEST(Init, EchoesParameters) {
  System sys;
  const auto model = identity_model(8);
  const auto& pp = sys.init(64, kEuclid8, model, 1.0, 100, 5, "toy");
  EXPECT_EQ(pp.lambda, 64u);
  EXPECT_EQ(pp.space, kEuclid8);
  EXPECT_EQ(pp.threshold, 1.0);
  EXPECT_EQ(pp.capacity, 100u);
  EXPECT_EQ(pp.seed, 5u);
  EXPECT_EQ(pp.extractor.model_id, "toy");
  EXPECT_EQ(pp.extractor.digest, nn::model_digest(model));
  EXPECT_TRUE(sys.initialized());
  EXPECT_EQ(sys.gallery().size(), 0u);
}

TEST(Init, DimensionMismatch) {
  System sys;
  EXPECT_EQ(code_of([&] { sys.init(64, kEuclid8, identity_model(4), 1.0, 100); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_FALSE(sys.initialized());
}

TEST(Init, RunsOnce) {
  System sys;
  sys.init(64, kEuclid8, identity_model(8), 1.0, 100);
  EXPECT_EQ(code_of([&] { sys.init(64, kEuclid8, identity_model(8), 1.0, 100); }),
            ErrorCode::kAlreadyInitialized);
}

TEST(Init, RejectsBadParameters) {
  System sys;
  EXPECT_EQ(code_of([&] { sys.init(64, kEuclid8, identity_model(8), -1.0, 100); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { sys.init(12, kEuclid8, identity_model(8), 1.0, 100); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] {
              sys.init(64, SpaceDescriptor::of(MetricKind::kLevenshtein, 8), identity_model(8), 1.0, 100);
            }),
            ErrorCode::kSpaceMismatch);
  EXPECT_FALSE(sys.initialized());
}

TEST(Operations, RequireInit) {
  System sys;
  const auto x = unit(8, 0, 1);
  EXPECT_EQ(code_of([&] { sys.enroll(x); }), ErrorCode::kNotInitialized);
  EXPECT_EQ(code_of([&] { sys.identify(x); }), ErrorCode::kNotInitialized);
}

TEST(Enroll, ThenVerifySameSample) {
  System sys;
  sys.init(64, kEuclid8, identity_model(8), 1.0, 100);
  const auto x = unit(8, 3, 2.5);
  const auto id = sys.enroll(x);
  EXPECT_EQ(id.bit_length(), 64u);
  const auto out = sys.verify(id, x);
  EXPECT_TRUE(out.decision.accept);
  EXPECT_EQ(out.decision.score, 0.0);
  EXPECT_EQ(out.reason, VerifyReason::kMatch);
}

TEST(Enroll, Capacity) {
  System sys;
  sys.init(64, kEuclid8, identity_model(8), 1.0, 2);
  sys.enroll(unit(8, 0, 1));
  sys.enroll(unit(8, 1, 1));
  EXPECT_EQ(code_of([&] { sys.enroll(unit(8, 2, 1)); }), ErrorCode::kCapacityExceeded);
  EXPECT_EQ(sys.gallery().size(), 2u);
}

TEST(Enroll, SameSampleTwiceGivesDistinctIds) {
  System sys;
  sys.init(64, kEuclid8, identity_model(8), 0.0, 10);
  const auto x = unit(8, 5, -3);
  const auto a = sys.enroll(x);
  const auto b = sys.enroll(x);
  EXPECT_NE(a, b);
  EXPECT_TRUE(sys.verify(a, x).decision.accept);
  EXPECT_TRUE(sys.verify(b, x).decision.accept);
}

TEST(Enroll, WrongInputDimension) {
  System sys;
  sys.init(64, kEuclid8, identity_model(8), 1.0, 10);
  EXPECT_EQ(code_of([&] { sys.enroll(std::vector<double>(7, 0.0)); }), ErrorCode::kDimensionMismatch);
}

TEST(Verify, UnknownId) {
  System sys;
  sys.init(64, kEuclid8, identity_model(8), 1.0, 10);
  sys.enroll(unit(8, 0, 1));
  const auto out = sys.verify(store::Identifier::from_hex("0011223344556677"), unit(8, 0, 1));
  EXPECT_FALSE(out.decision.accept);
  EXPECT_EQ(out.reason, VerifyReason::kUnknownId);
  EXPECT_EQ(to_string(out.reason), "UnknownId");
}

TEST(Verify, ThresholdStraddle) {
  const double t = 1.0;
  System sys;
  sys.init(64, kEuclid8, identity_model(8), t, 10);
  const auto id = sys.enroll(std::vector<double>(8, 0.0));
  // Probes along one axis sit at exactly the requested distance.
  const auto above = sys.verify(id, unit(8, 2, std::nextafter(t, 2.0)));
  const auto below = sys.verify(id, unit(8, 2, std::nextafter(t, 0.0)));
  const auto at = sys.verify(id, unit(8, 2, t));
  EXPECT_FALSE(above.decision.accept);
  EXPECT_EQ(above.reason, VerifyReason::kNoMatch);
  EXPECT_TRUE(below.decision.accept);
  EXPECT_TRUE(at.decision.accept);
  EXPECT_EQ(at.decision.score, t);
}

TEST(Identify, EmptyGallery) {
  System sys;
  sys.init(64, kEuclid8, identity_model(8), 1.0, 10);
  EXPECT_FALSE(sys.identify(unit(8, 0, 1)).matched());
}

TEST(Identify, FindsUserSeven) {
  oracle::Gen gen(61);
  System sys;
  sys.init(64, kEuclid8, identity_model(8), 0.5, 10);
  std::vector<std::vector<double>> samples;
  std::vector<store::Identifier> ids;
  for (int u = 0; u < 10; ++u) {
    samples.push_back(gen.reals(8, -10, 10));
    ids.push_back(sys.enroll(samples.back()));
  }
  const auto gallery = sys.gallery();
  const std::vector<store::TemplateRecord> records(gallery.records().begin(), gallery.records().end());
  const auto r = sys.identify(samples[7]);
  const auto scan = oracle::linear_scan(records, samples[7], 0.5);
  ASSERT_TRUE(r.matched());
  EXPECT_EQ(*r.identified, ids[7]);
  EXPECT_EQ(*r.identified, records[*scan.index].id);
  EXPECT_EQ(r.best_score, 0.0);
}

TEST(Identify, OutlierIsNoMatch) {
  System sys;
  sys.init(64, kEuclid8, identity_model(8), 1.0, 10);
  for (std::size_t axis = 0; axis < 8; ++axis) sys.enroll(unit(8, axis, 1));
  // At least 100 - 1 away from every template.
  const auto r = sys.identify(unit(8, 0, 100));
  EXPECT_FALSE(r.matched());
  EXPECT_GE(r.best_score, 99.0);
}

TEST(Identify, AgreesWithVerify) {
  oracle::Gen gen(62);
  System sys;
  sys.init(64, kEuclid8, identity_model(8), 3.0, 64);
  for (int u = 0; u < 30; ++u) sys.enroll(gen.reals(8, -2, 2));
  for (int trial = 0; trial < 100; ++trial) {
    const auto probe = gen.reals(8, -2, 2);
    const auto r = sys.identify(probe);
    if (!r.matched()) continue;
    const auto v = sys.verify(*r.identified, probe);
    EXPECT_TRUE(v.decision.accept);
    EXPECT_EQ(v.decision.score, r.best_score);
  }
}

TEST(Hamming, BinarisedEmbeddings) {
  System sys;
  const auto space = SpaceDescriptor::of(MetricKind::kHamming, 4);
  sys.init(32, space, identity_model(4), 1.0, 10);
  const auto id = sys.enroll(std::vector<double>{1, -1, 2, -2});
  // One coordinate flips sign: Hamming distance 1.
  const auto out = sys.verify(id, std::vector<double>{0.5, -3, 1, 4});
  EXPECT_TRUE(out.decision.accept);
  EXPECT_EQ(out.decision.score, 1.0);
  EXPECT_FALSE(sys.verify(id, std::vector<double>{-1, 1, 2, 2}).decision.accept);
}

TEST(Calibrate, UsesEerThresholdClampedAtZero) {
  System sys;
  sys.init(64, kEuclid8, identity_model(8), 1.0, 10);
  matcher::ScoreSet set;
  set.orientation = Orientation::kDistance;
  // Tied scores: the tie-break picks the lowest similarity grid point, min - 1.
  set.scores = {{0.0, matcher::ScoreLabel::kGenuine}, {0.0, matcher::ScoreLabel::kImpostor}};
  EXPECT_EQ(sys.calibrate(set), 1.0);

  // Out-of-range scores put t* at -2; a distance threshold cannot go below 0.
  set.scores = {{-3.0, matcher::ScoreLabel::kGenuine}, {-1.0, matcher::ScoreLabel::kImpostor}};
  EXPECT_EQ(sys.calibrate(set), 0.0);

  set.scores = {{1.0, matcher::ScoreLabel::kGenuine}, {3.0, matcher::ScoreLabel::kImpostor}};
  EXPECT_EQ(sys.calibrate(set), 2.0);
  EXPECT_EQ(sys.params().threshold, 2.0);

  set.orientation = Orientation::kSimilarity;
  EXPECT_EQ(code_of([&] { sys.calibrate(set); }), ErrorCode::kInvalidArgument);
}

TEST(Transcript, RequestResponsePairs) {
  System sys;
  sys.init(64, kEuclid8, identity_model(8), 1.0, 10);
  const auto x = unit(8, 1, 1);
  const auto id = sys.enroll(x);
  sys.verify(id, x);
  sys.identify(x);
  const auto entries = sys.transcript().entries();
  ASSERT_EQ(entries.size(), 6u);
  const char* kinds[] = {"EnrollRequest", "EnrollResponse", "VerifyRequest",
                         "VerifyResponse", "IdentifyRequest", "IdentifyResponse"};
  for (std::size_t i = 0; i < entries.size(); ++i) {
    EXPECT_EQ(entries[i].seq, i);
    EXPECT_EQ(kind_name(entries[i].message), kinds[i]);
    EXPECT_EQ(direction_of(entries[i].message),
              i % 2 == 0 ? Direction::kProverToVerifier : Direction::kVerifierToProver);
  }
  EXPECT_EQ(std::get<EnrollResponse>(entries[1].message).id, id);
  EXPECT_EQ(std::get<EnrollRequest>(entries[0].message).embedding, MetricPoint(RealVector{x}));
}

TEST(Transcript, LineFormat) {
  Transcript t;
  t.append(EnrollResponse{store::Identifier::from_hex("abcd")});
  t.append(VerifyResponse{true, 0.0, VerifyReason::kMatch});
  // u16 id length 2 (LE) + id; then accepted, reason, f64 0.0.
  EXPECT_EQ(t.to_text(),
            "0,V->P,EnrollResponse,0200abcd\n"
            "1,V->P,VerifyResponse,01000000000000000000\n");
}

TEST(Transcript, DeterministicForFixedSeed) {
  auto run = [] {
    System sys;
    sys.init(64, kEuclid8, identity_model(8), 1.0, 10, 99);
    oracle::Gen gen(63);
    std::vector<store::Identifier> ids;
    for (int u = 0; u < 5; ++u) ids.push_back(sys.enroll(gen.reals(8)));
    for (const auto& id : ids) sys.verify(id, gen.reals(8));
    sys.identify(gen.reals(8));
    return sys.transcript().to_text();
  };
  EXPECT_EQ(run(), run());
}

TEST(Concurrency, ParallelClientsKeepPairsTogether) {
  System sys;
  sys.init(64, kEuclid8, identity_model(8), 1.0, 1000, 3);
  const auto shared = sys.enroll(unit(8, 0, 1));
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      oracle::Gen gen(100 + t);
      for (int i = 0; i < 50; ++i) {
        if (i % 3 == 0) {
          const auto x = gen.reals(8);
          const auto id = sys.enroll(x);
          EXPECT_TRUE(sys.verify(id, x).decision.accept);
        } else if (i % 3 == 1) {
          EXPECT_TRUE(sys.verify(shared, unit(8, 0, 1)).decision.accept);
        } else {
          sys.identify(gen.reals(8));
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(sys.gallery().size(), 1u + 4 * 17);
  const auto entries = sys.transcript().entries();
  ASSERT_EQ(entries.size() % 2, 0u);
  for (std::size_t i = 0; i < entries.size(); i += 2) {
    const auto req = kind_name(entries[i].message);
    const auto resp = kind_name(entries[i + 1].message);
    EXPECT_EQ(req.substr(0, req.size() - 7) + "Response", resp);
  }
  std::set<store::Identifier> ids;
  const auto gallery = sys.gallery();
  for (const auto& r : gallery.records()) ids.insert(r.id);
  EXPECT_EQ(ids.size(), gallery.size());
}

TEST(Attach, ResumesPersistedSystem) {
  System first;
  const auto model = identity_model(8);
  first.init(64, kEuclid8, model, 1.0, 10, 4);
  const auto x = unit(8, 6, 2);
  const auto id = first.enroll(x);

  const auto params = params_from_key_values(KeyValues::parse(to_key_values(first.params()).to_text(':'), ':'));
  EXPECT_EQ(params, first.params());
  System second;
  second.attach(params, model, first.gallery());
  EXPECT_TRUE(second.verify(id, x).decision.accept);
  const auto next = second.enroll(unit(8, 7, 2));
  EXPECT_NE(next, id);
}

TEST(Attach, RejectsMismatchedModel) {
  System first;
  first.init(64, kEuclid8, identity_model(8), 1.0, 10);
  auto other = nn::NeuralNetwork({nn::LinearLayer{nn::Matrix(8, 8, 2.0), std::vector<double>(8, 0.0)}});
  System second;
  EXPECT_EQ(code_of([&] { second.attach(first.params(), other, first.gallery()); }),
            ErrorCode::kInvalidConfig);
}

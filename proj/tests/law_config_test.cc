#include <cstdio>
#include <fstream>

#include <gtest/gtest.h>

#include "fragtree/law_config.hpp"

namespace fragtree {
namespace {

TEST(ParseLaw, RecognisesEveryFamily) {
  EXPECT_EQ(parse_law("binary").family(), Family::BinaryUniform);
  EXPECT_EQ(parse_law("mary:27").order(), 27);
  EXPECT_EQ(parse_law("quad:9").parts(), 512);
  EXPECT_EQ(parse_law("simplex:3").parts(), 4);
  const SplitLaw beta = parse_law("beta:2,3.5");
  EXPECT_DOUBLE_EQ(beta.beta_a(), 2.0);
  EXPECT_DOUBLE_EQ(beta.beta_a_prime(), 3.5);
  const SplitLaw det = parse_law("det:1/3,2/3");
  ASSERT_EQ(det.parts(), 2);
  EXPECT_DOUBLE_EQ(det.weights()[0], 1.0 / 3.0);
  const SplitLaw lattice = parse_law("lattice:2:1,1");
  EXPECT_EQ(lattice.lattice_kind(), LatticeKind::Lattice);
  EXPECT_DOUBLE_EQ(lattice.weights()[1], 0.5);
}

TEST(ParseLaw, RejectsMalformedInput) {
  for (const char* text : {"", "bogus", "mary", "mary:x", "mary:1", "quad:0", "beta:1", "beta:1,-2",
                           "det:", "det:0.5,0.6", "det:a,b", "lattice:2", "lattice:0.5:1,1",
                           "mary:3extra"}) {
    EXPECT_THROW(parse_law(text), LawConfigError) << text;
  }
}

TEST(LawJson, RoundTripPreservesLawAndHash) {
  for (const char* text : {"binary", "mary:5", "quad:4", "simplex:2", "beta:0.5,7", "det:0.1,0.2,0.7",
                           "lattice:3:1,1,1"}) {
    const SplitLaw law = parse_law(text);
    const SplitLaw again = law_from_json(law_to_json(law));
    EXPECT_EQ(again.spec_string(), law.spec_string()) << text;
    EXPECT_EQ(law_hash(again), law_hash(law)) << text;
    EXPECT_EQ(parse_law(law.spec_string()).spec_string(), law.spec_string()) << text;
  }
}

TEST(LawJson, RejectsUnknownFamily) {
  EXPECT_THROW(law_from_json(nlohmann::json{{"family", "nope"}}), LawConfigError);
  EXPECT_THROW(law_from_json(nlohmann::json::array()), LawConfigError);
}

TEST(LawHash, DistinguishesLaws) {
  EXPECT_NE(law_hash(parse_law("mary:26")), law_hash(parse_law("mary:27")));
  EXPECT_EQ(law_hash(parse_law("mary:26")).size(), 16u);
  // FNV-1a reference vector.
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(EmpiricalLaw, LoadsFileWithComments) {
  const std::string path = ::testing::TempDir() + "fragtree_empirical.txt";
  {
    std::ofstream out(path);
    out << "# two parts\n0.25,0.75\n0.5 0.5\n\n0.9,0.1\n";
  }
  const SplitLaw law = load_empirical_law(path);
  EXPECT_EQ(law.family(), Family::EmpiricalSamples);
  EXPECT_EQ(law.empirical_rows(), 3u);
  EXPECT_EQ(law.parts(), 2);
  EXPECT_EQ(parse_law("empirical:" + path).empirical_rows(), 3u);
  std::remove(path.c_str());
  EXPECT_THROW(load_empirical_law(path), LawConfigError);
}

}  // namespace
}  // namespace fragtree

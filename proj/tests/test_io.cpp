#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cpmasa/io.hpp"
#include "cpmasa/random.hpp"

using namespace cpmasa;

TEST(Codec, MatrixRoundTripIsExact) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = random_ginibre(rng, 3, 2);
    const Matrix back = decode_matrix(Json::parse(encode_matrix(m).dump()));
    EXPECT_EQ((m - back).norm(), 0.0);
  }
}

TEST(Codec, ScalarsAndErrors) {
  EXPECT_EQ(decode_complex(Json::parse("[1.5, -2]")), cd(1.5, -2));
  EXPECT_EQ(decode_complex(Json::parse("3")), cd(3, 0));
  EXPECT_THROW(decode_complex(Json::parse("[1, 2, 3]")), ParseError);
  EXPECT_THROW(decode_complex(Json::parse("\"x\"")), ParseError);
  EXPECT_THROW(decode_matrix(Json::parse("[[1, 2], [3]]")), ParseError);
  EXPECT_THROW(decode_matrix(Json::parse("{}")), ParseError);
  EXPECT_TRUE(std::isinf(decode_real(encode_real(std::numeric_limits<double>::infinity()))));
  EXPECT_TRUE(std::isnan(decode_real(encode_real(NAN))));
}

TEST(ProblemFile, ParsesCpMapAndGenerator) {
  const ProblemFile p = parse_problem(Json::parse(R"({
    "dim": 2, "kind": "cp_map",
    "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]],
    "masa": [[[1,0],[0,0]],[[0,0],[1,0]]],
    "tolerance": {"atol": 1e-8}
  })"));
  EXPECT_EQ(p.dim, 2);
  EXPECT_EQ(p.kind, ProblemKind::cp_map);
  EXPECT_TRUE(p.masa.has_value());
  EXPECT_EQ(p.tolerance->atol, 1e-8);
  EXPECT_EQ(p.tolerance->rtol, 1e-9);
  EXPECT_EQ((p.kraus_map().apply(Matrix::Identity(2, 2)) - Matrix::Identity(2, 2)).norm(), 0.0);

  const ProblemFile g = parse_problem(Json::parse(R"({
    "dim": 2, "kind": "generator",
    "kraus": [[[0,0],[1,0]],[[0,0],[0,0]]],
    "hamiltonian": [[0,1],[1,0]]
  })"));
  EXPECT_LE(g.generator().apply(Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(ProblemFile, RejectsMalformedInput) {
  EXPECT_THROW(parse_problem(Json::parse(R"({"kind": "cp_map", "kraus": [[[1]]]})")), ParseError);
  EXPECT_THROW(parse_problem(Json::parse(R"({"dim": 1, "kind": "x", "kraus": [[[1]]]})")),
               ParseError);
  EXPECT_THROW(parse_problem(Json::parse(R"({"dim": 1, "kind": "generator", "kraus": [[[1]]]})")),
               ParseError);
  EXPECT_THROW(parse_problem(Json::parse(
                   R"({"dim": 1, "kind": "generator", "kraus": [[[1]]], "beta": [[0]], "hamiltonian": [[0]]})")),
               ParseError);
  EXPECT_THROW(parse_problem(Json::parse(R"({"dim": 2, "kind": "cp_map", "kraus": [[[1]]]})")),
               DimensionMismatch);
  EXPECT_THROW(
      parse_problem(Json::parse(R"({"dim": 1, "kind": "cp_map", "kraus": [[[1]]], "tolerance": {"atol": -1}})")),
      ToleranceInvalid);
  EXPECT_THROW(parse_json_text("{not json"), ParseError);
  EXPECT_THROW(read_problem("/nonexistent/file.json"), ParseError);
}

TEST(ReportFormat, RoundTripIsIdentical) {
  Report r;
  r.command = "check-invariance";
  r.verdict("invariant", Verdict{true, 1e-17, 2e-9}, Tolerance{});
  r.verdict("other", Verdict{false, std::numeric_limits<double>::infinity(), 1e-9},
            Tolerance{1e-8, 0.0});
  Rng rng(3);
  r.witnesses["m"] = encode_matrix(random_ginibre(rng, 2, 2));
  r.results["x"] = 0.1;
  const std::string line = serialize(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  const Report back = parse_report(line);
  EXPECT_EQ(back, r);
  EXPECT_EQ(serialize(back), line);
  EXPECT_THROW(parse_report(R"({"command": "x"})"), ParseError);
}

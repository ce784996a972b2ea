#include "martlab/io.hpp"

#include "doctest.h"
#include "test_helpers.hpp"

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>

using namespace martlab;
using namespace martlab::testing;

namespace {

int runCli(const std::string& args, const std::string& stdoutPath = "/dev/null") {
  const std::string cmd = std::string(MARTLAB_CLI_PATH) + " " + args + " > " + stdoutPath + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string tmpPath(const std::string& name) {
  return std::string("martlab_test_") + name;
}

}  // namespace

TEST_CASE("JSON round trips preserve values exactly") {
  Rng rng(23);
  RandomGridParams gp;
  gp.rowFactorSizes = {2, 3};
  gp.colFactorSizes = {2};
  auto [space, grid] = randomGrid(rng.nextU64(), gp);

  SUBCASE("space") {
    const Json j = Json::parse(toJson(space).dump());
    CHECK(spaceFromJson(j) == space);
  }
  SUBCASE("partition") {
    const Partition p = randomPartition(rng, space.size(), 4);
    const Json j = Json::parse(toJson(p).dump());
    CHECK(partitionFromJson(j) == p);
  }
  SUBCASE("grid") {
    const Json j = Json::parse(toJson(grid).dump());
    CHECK(gridFromJson(j) == grid);
  }
  SUBCASE("adapted sequence") {
    const AdaptedSeq2D x = randomAdapted(rng, grid);
    const Json j = Json::parse(toJson(x).dump());
    const AdaptedSeq2D back = seqFromJson(j, grid);
    for (Index i = 0; i <= grid.rows(); ++i) {
      for (Index j2 = 0; j2 <= grid.cols(); ++j2) {
        CHECK((back[i][j2] - x[i][j2]).cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }
}

TEST_CASE("malformed JSON is rejected") {
  CHECK_THROWS(spaceFromJson(Json::parse("{\"weights\":[1.0]}")));
  CHECK_THROWS(partitionFromJson(Json::parse("{}")));
  CHECK_THROWS_AS(gridFromJson(Json::parse(
                      R"({"space":{"probs":[0.5,0.5]},"rows":0,"cols":0,"partitions":[]})")),
                  std::invalid_argument);
}

TEST_CASE("formatG17 round-trips doubles losslessly") {
  Rng rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const double v = rng.normal() * std::pow(10.0, static_cast<double>(rng.uniformInt(8)) - 4.0);
    const double back = std::strtod(formatG17(v).c_str(), nullptr);
    CHECK(back == v);
  }
}

TEST_CASE("cli check-f4 exit codes") {
  auto [space, grid] = twoRademacher();
  const std::string gridPath = tmpPath("grid.json");
  writeTextFile(gridPath, toJson(grid).dump());
  CHECK(runCli("check-f4 --in " + gridPath) == 0);
  CHECK(runCli("check-f4 --in " + gridPath + " --mode marginal") == 0);

  Vec probs(4);
  probs << 0.4, 0.2, 0.1, 0.3;
  const FiltrationGrid bad(FiniteProbSpace(probs),
                           {{Partition::trivial(4), Partition({0, 1, 1, 0})},
                            {Partition({0, 0, 1, 1}), Partition::singletons(4)}},
                           false);
  const std::string badPath = tmpPath("bad_grid.json");
  writeTextFile(badPath, toJson(bad).dump());
  CHECK(runCli("check-f4 --in " + badPath) == 2);

  CHECK(runCli("check-f4 --in no_such_file.json") == 1);
  CHECK(runCli("check-f4 --in " + gridPath + " --bogus-flag") == 64);
  CHECK(runCli("frobnicate") == 64);
  std::remove(gridPath.c_str());
  std::remove(badPath.c_str());
}

TEST_CASE("cli norms and solve-decomposition round trip") {
  auto [space, grid] = twoRademacher();

  Json normsInput;
  normsInput["grid"] = toJson(grid);
  normsInput["f"] = toJson(epsDelta());
  const std::string normsPath = tmpPath("norms.json");
  writeTextFile(normsPath, normsInput.dump());
  const std::string normsOut = tmpPath("norms_out.json");
  CHECK(runCli("norms --in " + normsPath, normsOut) == 0);
  const Json norms = Json::parse(readTextFile(normsOut));
  CHECK(norms.at("h1S").get<double>() == doctest::Approx(1.0));
  CHECK(norms.at("h1M").get<double>() == doctest::Approx(1.0));

  AdaptedSeq2D x = zeroSeq(grid);
  x[1][1] = epsDelta();
  Json solveInput;
  solveInput["grid"] = toJson(grid);
  solveInput["entries"] = toJson(x).at("entries");
  const std::string solvePath = tmpPath("instance.json");
  writeTextFile(solvePath, solveInput.dump());
  const std::string solveOut = tmpPath("solve_out.json");
  const int code = runCli("solve-decomposition --in " + solvePath + " --tol 1e-6", solveOut);
  CHECK(code == 0);
  const Json solved = Json::parse(readTextFile(solveOut));
  CHECK(solved.at("objective").get<double>() <= solved.at("lhsNorm").get<double>() + 1e-6);
  // emitted decomposition reloads to the same values
  const AdaptedSeq2D aBack = seqFromJson(Json{{"entries", solved.at("A").at("entries")}}, grid);
  CHECK(static_cast<Index>(aBack.size()) == grid.rows() + 1);

  std::remove(normsPath.c_str());
  std::remove(normsOut.c_str());
  std::remove(solvePath.c_str());
  std::remove(solveOut.c_str());
}

TEST_CASE("cli assemble-davis emits a verifiable chain") {
  auto [space, grid] = twoRademacher();
  Json input;
  input["grid"] = toJson(grid);
  input["f"] = toJson(epsDelta());
  const std::string inPath = tmpPath("davis.json");
  writeTextFile(inPath, input.dump());
  const std::string outPath = tmpPath("davis_out.json");
  CHECK(runCli("assemble-davis --in " + inPath, outPath) == 0);
  const Json out = Json::parse(readTextFile(outPath));
  CHECK(out.at("reconstructionResidual").get<double>() <= 1e-9);
  CHECK(out.at("chain").at("exactStepsOk").get<bool>());
  CHECK(out.at("chain").at("finalRatio").get<double>() == doctest::Approx(1.0));
  std::remove(inPath.c_str());
  std::remove(outPath.c_str());
}

TEST_CASE("cli reports nonconvergence with exit code 3") {
  CorpusParams cp;
  cp.seed = 1;
  const Instance inst = makeInstance(cp, 0);
  Json input;
  input["grid"] = toJson(inst.grid);
  input["entries"] = toJson(allDeltas(inst.grid, inst.f)).at("entries");
  const std::string inPath = tmpPath("hard_instance.json");
  writeTextFile(inPath, input.dump());
  const std::string outPath = tmpPath("hard_out.json");
  // tight cap: the subgradient loop cannot reach a convergence window
  CHECK(runCli("solve-decomposition --in " + inPath + " --max-iter 50", outPath) == 3);
  const Json out = Json::parse(readTextFile(outPath));
  CHECK_FALSE(out.at("converged").get<bool>());
  CHECK(out.at("objective").get<double>() > 0.0);  // best iterate still reported
  std::remove(inPath.c_str());
  std::remove(outPath.c_str());
}

TEST_CASE("cli honors the MARTLAB_THREADS fallback") {
  const std::string out1 = tmpPath("env1.csv");
  const std::string out2 = tmpPath("env2.csv");
  CHECK(runCli("ratio-search --seed 3 --corpus-size 8 --threads 1 --out " + out1) == 0);
  const std::string cmd = std::string("MARTLAB_THREADS=3 ") + MARTLAB_CLI_PATH +
                          " ratio-search --seed 3 --corpus-size 8 --out " + out2 +
                          " >/dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) != -1);
  CHECK(readTextFile(out1) == readTextFile(out2));
  std::remove(out1.c_str());
  std::remove(out2.c_str());
  std::remove((out1 + ".worst.json").c_str());
  std::remove((out2 + ".worst.json").c_str());
}

TEST_CASE("cli ratio-search determinism across runs and thread counts") {
  const std::string out1 = tmpPath("ratio1.csv");
  const std::string out2 = tmpPath("ratio2.csv");
  const std::string out3 = tmpPath("ratio3.csv");
  CHECK(runCli("ratio-search --seed 7 --corpus-size 10 --threads 1 --out " + out1) == 0);
  CHECK(runCli("ratio-search --seed 7 --corpus-size 10 --threads 1 --out " + out2) == 0);
  CHECK(runCli("ratio-search --seed 7 --corpus-size 10 --threads 8 --out " + out3) == 0);
  const std::string a = readTextFile(out1);
  CHECK(a == readTextFile(out2));
  CHECK(a == readTextFile(out3));
  // worst-case dump parses and names a corpus instance
  const Json worst = Json::parse(readTextFile(out1 + ".worst.json"));
  CHECK(worst.contains("grid"));
  CHECK(worst.contains("ratios"));
  for (const auto& p : {out1, out2, out3}) {
    std::remove(p.c_str());
    std::remove((p + ".worst.json").c_str());
  }
}

TEST_CASE("cli br-suite and verify-duality emit CSV") {
  const std::string brOut = tmpPath("br.csv");
  CHECK(runCli("br-suite --seed 5 --corpus-size 5 --out " + brOut) == 0);
  const std::string br = readTextFile(brOut);
  CHECK(br.find("tensorResidual") != std::string::npos);
  CHECK(std::count(br.begin(), br.end(), '\n') == 6);  // header + five rows

  const std::string dualOut = tmpPath("dual.csv");
  CHECK(runCli("verify-duality --seed 5 --corpus-size 5 --out " + dualOut) == 0);
  const std::string dual = readTextFile(dualOut);
  CHECK(dual.find("defectLower") != std::string::npos);
  CHECK(std::count(dual.begin(), dual.end(), '\n') == 6);
  std::remove(brOut.c_str());
  std::remove(dualOut.c_str());
}

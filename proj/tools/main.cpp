#include "martlab/io.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>
#include <thread>

namespace {

using namespace martlab;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNonconverged = 3;
constexpr int kExitUsage = 64;

Index resolveThreads(Index flagValue) {
  if (flagValue > 0) return flagValue;
  if (const char* env = std::getenv("MARTLAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<Index>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<Index>(hw) : 1;
}

void emit(const std::string& text, const std::string& outPath) {
  if (outPath.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    writeTextFile(outPath, text);
  }
}

Json loadJsonFile(const std::string& path) { return Json::parse(readTextFile(path)); }

FiltrationGrid certifiedGrid(const Json& input, int& exitCode) {
  FiltrationGrid grid = gridFromJson(input.at("grid"));
  if (!grid.certifiedF4()) {
    const F4Report report = checkF4(grid, grid.f4Tolerance(), F4Mode::Marginal);
    if (!report.pass) {
      std::cerr << "grid failed checkF4: worst defect " << formatG17(report.worstDefect) << "\n";
      exitCode = kExitValidation;
    }
    grid.setCertifiedF4(report.pass);
  }
  return grid;
}

int runCheckF4(const std::string& inPath, double tol, const std::string& mode,
               const std::string& outPath) {
  const Json input = loadJsonFile(inPath);
  const FiltrationGrid grid = gridFromJson(input.contains("grid") ? input.at("grid") : input);
  const F4Mode m = mode == "marginal" ? F4Mode::Marginal : F4Mode::AllPairs;
  const F4Report report = checkF4(grid, tol, m);
  emit(toJson(report).dump(2), outPath);
  return report.pass ? kExitOk : kExitValidation;
}

int runNorms(const std::string& inPath, const std::string& outPath) {
  const Json input = loadJsonFile(inPath);
  const FiltrationGrid grid = gridFromJson(input.at("grid"));
  const Vec f = vecFromJson(input.at("f"));
  Json out = toJson(hardyNorms(grid, f));
  out["l1"] = lpNorm(grid.space(), f, 1.0);
  out["l2"] = lpNorm(grid.space(), f, 2.0);
  emit(out.dump(2), outPath);
  return kExitOk;
}

int runSolve(const std::string& inPath, const DecompParams& params, const std::string& outPath) {
  const Json input = loadJsonFile(inPath);
  int exitCode = kExitOk;
  const FiltrationGrid grid = certifiedGrid(input, exitCode);
  if (exitCode != kExitOk) return exitCode;
  const AdaptedSeq2D x = seqFromJson(input, grid);
  const auto [decomp, report] = solveDecomposition(grid, x, params);
  Json out = toJson(grid, decomp, report);
  out["lhsNorm"] = lhsNorm(grid, x);
  emit(out.dump(2), outPath);
  return report.converged ? kExitOk : kExitNonconverged;
}

int runAssembleDavis(const std::string& inPath, const DecompParams& params,
                     const std::string& outPath) {
  const Json input = loadJsonFile(inPath);
  int exitCode = kExitOk;
  const FiltrationGrid grid = certifiedGrid(input, exitCode);
  if (exitCode != kExitOk) return exitCode;
  const Vec f = vecFromJson(input.at("f"));
  const DavisResult davis = assembleDavis(grid, f, params);
  Json out = toJson(davis, grid);
  out["chain"] = toJson(verifyCorollaryChain(grid, f, davis));
  emit(out.dump(2), outPath);
  return davis.solver.converged ? kExitOk : kExitNonconverged;
}

int runDuality(const CorpusParams& params, double p, double q, Index threads,
               const std::string& outPath) {
  const auto rows = dualitySuite(params, p, q, threads);
  emit(dualitySuiteCsv(rows), outPath);
  Scalar minDefect = 1.0, worstResidual = 0.0, worstSlack = 0.0;
  for (const auto& r : rows) {
    minDefect = std::min(minDefect, r.defectLower);
    worstResidual = std::max(worstResidual, r.witnessResidual);
    worstSlack = std::min(worstSlack, r.holderSlack);
  }
  std::cerr << "duality: instances=" << rows.size() << " minDefect=" << formatG17(minDefect)
            << " worstWitnessResidual=" << formatG17(worstResidual)
            << " minHolderSlack=" << formatG17(worstSlack) << "\n";
  return kExitOk;
}

int runBrSuite(const CorpusParams& params, double p, double q, Index threads,
               const std::string& outPath) {
  const auto rows = brSuite(params, p, q, threads);
  emit(brSuiteCsv(rows), outPath);
  Scalar lo = std::numeric_limits<Scalar>::infinity(), hi = 0.0;
  for (const auto& r : rows) {
    lo = std::min({lo, r.brRatio, r.adRatio, r.iterRatio});
    hi = std::max({hi, r.brRatio, r.adRatio, r.iterRatio});
  }
  std::cerr << "br-suite: instances=" << rows.size() << " ratioRange=[" << formatG17(lo) << ","
            << formatG17(hi) << "]\n";
  return kExitOk;
}

int runRatioSearch(const CorpusParams& params, Index threads, const std::string& outPath) {
  const RatioReport report = davisRatioSearch(params, threads);
  emit(ratioReportCsv(report), outPath);
  if (!outPath.empty() && report.worstId >= 0) {
    const auto& worst = report.rows[static_cast<std::size_t>(report.worstId)];
    writeTextFile(outPath + ".worst.json", worstInstanceJson(params, worst).dump(2));
  }
  std::cerr << "ratio-search: instances=" << report.rows.size() << " skipped=" << report.skipped
            << " maxMOverS=" << formatG17(report.maxMOverS)
            << " medianMOverS=" << formatG17(report.medianMOverS)
            << " p90MOverS=" << formatG17(report.p90MOverS)
            << " davisRange=[" << formatG17(report.minDavis) << "," << formatG17(report.maxDavis)
            << "]\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"martlab: two-parameter martingale Hardy-norm laboratory on finite spaces"};
  app.require_subcommand(1);

  std::string inPath, outPath, mode = "all";
  double tol = 1e-12;
  std::uint64_t seed = 1;
  Index corpusSize = 100;
  Index maxIter = 20000;
  double solveTol = 1e-6;
  double p = 4.0 / 3.0, q = 1.5;
  Index threads = 0;

  auto* checkF4Cmd = app.add_subcommand("check-f4", "verify the commutation condition of a grid");
  checkF4Cmd->add_option("--in", inPath, "grid JSON file")->required();
  checkF4Cmd->add_option("--tol", tol, "defect tolerance");
  checkF4Cmd->add_option("--mode", mode, "all | marginal")
      ->check(CLI::IsMember({"all", "marginal"}));
  checkF4Cmd->add_option("--out", outPath, "report output path");

  auto* normsCmd = app.add_subcommand("norms", "Hardy norms of {grid, f}");
  normsCmd->add_option("--in", inPath, "input JSON file")->required();
  normsCmd->add_option("--out", outPath, "output path");

  auto* solveCmd = app.add_subcommand("solve-decomposition",
                                      "four-term decomposition infimum of {grid, entries}");
  solveCmd->add_option("--in", inPath, "instance JSON file")->required();
  solveCmd->add_option("--tol", solveTol, "relative convergence tolerance")
      ->check(CLI::PositiveNumber);
  solveCmd->add_option("--max-iter", maxIter, "iteration cap")->check(CLI::PositiveNumber);
  solveCmd->add_option("--seed", seed, "solver seed");
  solveCmd->add_option("--out", outPath, "output path");

  auto* davisCmd = app.add_subcommand("assemble-davis", "full corollary pipeline on {grid, f}");
  davisCmd->add_option("--in", inPath, "input JSON file")->required();
  davisCmd->add_option("--tol", solveTol, "relative convergence tolerance")
      ->check(CLI::PositiveNumber);
  davisCmd->add_option("--max-iter", maxIter, "iteration cap")->check(CLI::PositiveNumber);
  davisCmd->add_option("--seed", seed, "solver seed");
  davisCmd->add_option("--out", outPath, "output path");

  auto* dualityCmd = app.add_subcommand("verify-duality", "dual-witness corpus report");
  dualityCmd->add_option("--seed", seed, "corpus seed");
  dualityCmd->add_option("--corpus-size", corpusSize, "instances")->check(CLI::PositiveNumber);
  dualityCmd->add_option("--p", p, "inner exponent");
  dualityCmd->add_option("--q", q, "outer exponent");
  dualityCmd->add_option("--threads", threads, "worker threads (0 = auto)");
  dualityCmd->add_option("--out", outPath, "CSV output path");

  auto* brCmd = app.add_subcommand("br-suite", "Burkholder-Rosenthal corpus report");
  brCmd->add_option("--seed", seed, "corpus seed");
  brCmd->add_option("--corpus-size", corpusSize, "instances")->check(CLI::PositiveNumber);
  brCmd->add_option("--p", p, "moment exponent for the martingale check (>= 2)");
  brCmd->add_option("--q", q, "exponent for the adapted/iterated checks (>= 1)");
  brCmd->add_option("--threads", threads, "worker threads (0 = auto)");
  brCmd->add_option("--out", outPath, "CSV output path");

  auto* ratioCmd = app.add_subcommand("ratio-search", "Hardy-norm ratio corpus report");
  ratioCmd->add_option("--seed", seed, "corpus seed");
  ratioCmd->add_option("--corpus-size", corpusSize, "instances")->check(CLI::PositiveNumber);
  ratioCmd->add_option("--threads", threads, "worker threads (0 = auto)");
  ratioCmd->add_option("--out", outPath, "CSV output path (worst case lands next to it)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CorpusParams corpus;
  corpus.seed = seed;
  corpus.instances = corpusSize;
  DecompParams decomp;
  decomp.maxIter = maxIter;
  decomp.tol = solveTol;
  decomp.seed = seed;

  try {
    if (app.got_subcommand(checkF4Cmd)) return runCheckF4(inPath, tol, mode, outPath);
    if (app.got_subcommand(normsCmd)) return runNorms(inPath, outPath);
    if (app.got_subcommand(solveCmd)) return runSolve(inPath, decomp, outPath);
    if (app.got_subcommand(davisCmd)) return runAssembleDavis(inPath, decomp, outPath);
    if (app.got_subcommand(dualityCmd)) {
      const double pp = dualityCmd->count("--p") ? p : 4.0 / 3.0;
      const double qq = dualityCmd->count("--q") ? q : 1.5;
      return runDuality(corpus, pp, qq, resolveThreads(threads), outPath);
    }
    if (app.got_subcommand(brCmd)) {
      const double pp = brCmd->count("--p") ? p : 3.0;
      const double qq = brCmd->count("--q") ? q : 1.5;
      return runBrSuite(corpus, pp, qq, resolveThreads(threads), outPath);
    }
    if (app.got_subcommand(ratioCmd)) {
      return runRatioSearch(corpus, resolveThreads(threads), outPath);
    }
  } catch (const Json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::runtime_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

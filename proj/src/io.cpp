#include "martlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace martlab {

std::string formatG17(Scalar value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

Json toJson(const Vec& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vec vecFromJson(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("vecFromJson: expected an array");
  Vec v(static_cast<Index>(j.size()));
  Index i = 0;
  for (const auto& x : j) v[i++] = x.get<Scalar>();
  return v;
}

Json toJson(const FiniteProbSpace& space) { return Json{{"probs", toJson(space.probs())}}; }

FiniteProbSpace spaceFromJson(const Json& j) {
  if (!j.contains("probs")) throw std::invalid_argument("space JSON: missing \"probs\"");
  return FiniteProbSpace(vecFromJson(j.at("probs")));
}

Json toJson(const Partition& p) { return Json{{"blocks", p.blockOf()}}; }

Partition partitionFromJson(const Json& j) {
  if (!j.contains("blocks")) throw std::invalid_argument("partition JSON: missing \"blocks\"");
  return Partition(j.at("blocks").get<std::vector<int>>());
}

Json toJson(const FiltrationGrid& grid) {
  Json parts = Json::array();
  for (Index i = 0; i <= grid.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j <= grid.cols(); ++j) row.push_back(toJson(grid.part(i, j)));
    parts.push_back(std::move(row));
  }
  return Json{{"space", toJson(grid.space())},
              {"rows", grid.rows()},
              {"cols", grid.cols()},
              {"partitions", std::move(parts)},
              {"certifiedF4", grid.certifiedF4()}};
}

FiltrationGrid gridFromJson(const Json& j) {
  FiniteProbSpace space = spaceFromJson(j.at("space"));
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const Json& parts = j.at("partitions");
  if (static_cast<Index>(parts.size()) != rows + 1) {
    throw std::invalid_argument("grid JSON: \"partitions\" must have rows+1 rows");
  }
  std::vector<std::vector<Partition>> grid;
  for (const auto& row : parts) {
    if (static_cast<Index>(row.size()) != cols + 1) {
      throw std::invalid_argument("grid JSON: each partition row must have cols+1 entries");
    }
    std::vector<Partition> out;
    for (const auto& p : row) out.push_back(partitionFromJson(p));
    grid.push_back(std::move(out));
  }
  const bool certified = j.value("certifiedF4", false);
  return FiltrationGrid(std::move(space), std::move(grid), certified);
}

Json toJson(const AdaptedSeq2D& seq) {
  Json entries = Json::array();
  for (const auto& row : seq) {
    Json r = Json::array();
    for (const auto& v : row) r.push_back(toJson(v));
    entries.push_back(std::move(r));
  }
  return Json{{"entries", std::move(entries)}};
}

AdaptedSeq2D seqFromJson(const Json& j, const FiltrationGrid& grid) {
  const Json& entries = j.at("entries");
  if (static_cast<Index>(entries.size()) != grid.rows() + 1) {
    throw std::invalid_argument("sequence JSON: row count mismatch");
  }
  AdaptedSeq2D out;
  for (const auto& row : entries) {
    if (static_cast<Index>(row.size()) != grid.cols() + 1) {
      throw std::invalid_argument("sequence JSON: column count mismatch");
    }
    std::vector<Vec> r;
    for (const auto& v : row) {
      r.push_back(vecFromJson(v));
      if (r.back().size() != grid.space().size()) {
        throw std::invalid_argument("sequence JSON: entry length mismatch");
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

Json toJson(const FiltrationGrid& grid, const FourTermDecomp& d, const SolverReport& report) {
  Json out;
  out["A"] = toJson(d.A);
  out["B"] = toJson(d.B);
  out["C"] = toJson(d.C);
  out["D"] = toJson(d.D);
  const RhsTerms terms = rhsTerms(grid, d);
  out["terms"] = Json{{"a", terms.a}, {"b", terms.b}, {"c", terms.c}, {"d", terms.d}};
  out["objective"] = report.objective;
  out["sumResidual"] = report.sumResidual;
  out["adaptednessResidual"] = report.adaptednessResidual;
  out["iterations"] = report.iterations;
  out["converged"] = report.converged;
  return out;
}

Json toJson(const F4Report& report) {
  return Json{{"pass", report.pass},
              {"worstDefect", report.worstDefect},
              {"witness", report.witness},
              {"mode", report.mode == F4Mode::AllPairs ? "all-pairs" : "marginal"}};
}

Json toJson(const HardyNorms& norms) {
  return Json{{"h1S", norms.h1S}, {"h1s", norms.h1s}, {"h1M", norms.h1M}};
}

namespace {

Json toJson(const ChainStep& step) {
  return Json{{"lhs", step.lhs}, {"rhs", step.rhs}, {"slack", step.slack}};
}

}  // namespace

Json toJson(const ChainReport& report) {
  Json out;
  out["aTelescoping"] = toJson(report.aTelescoping);
  out["bTerm"] = report.bTerm;
  out["bH1M"] = report.bH1M;
  out["bBrossardRatio"] = report.bBrossardRatio;
  out["cTerm"] = report.cTerm;
  out["cH1sSum"] = report.cH1sSum;
  out["cH1MSum"] = report.cH1MSum;
  out["cOneParamRatio"] = report.cOneParamRatio;
  out["cIdentityResidual"] = report.cIdentityResidual;
  out["cSupSwap"] = toJson(report.cSupSwap);
  out["cFinal"] = toJson(report.cFinal);
  out["dTerm"] = report.dTerm;
  out["dH1sSum"] = report.dH1sSum;
  out["dH1MSum"] = report.dH1MSum;
  out["dOneParamRatio"] = report.dOneParamRatio;
  out["dIdentityResidual"] = report.dIdentityResidual;
  out["dSupSwap"] = toJson(report.dSupSwap);
  out["dFinal"] = toJson(report.dFinal);
  out["h1S"] = report.h1S;
  out["h1M"] = report.h1M;
  out["finalRatio"] = report.finalRatio;
  out["minSlack"] = report.minSlack;
  out["exactStepsOk"] = report.exactStepsOk;
  return out;
}

Json toJson(const DavisResult& davis, const FiltrationGrid& grid) {
  Json out;
  out["A"] = toJson(davis.A);
  out["B"] = toJson(davis.B);
  out["C"] = toJson(davis.C);
  out["D"] = toJson(davis.D);
  out["terms"] = Json{{"a", davis.terms.a},
                      {"b", davis.terms.b},
                      {"c", davis.terms.c},
                      {"d", davis.terms.d},
                      {"total", davis.terms.total()}};
  out["objective"] = davis.solver.objective;
  out["iterations"] = davis.solver.iterations;
  out["converged"] = davis.solver.converged;
  out["reconstructionResidual"] = davis.reconstructionResidual;
  out["lhsNorm"] = lhsNorm(grid, allDeltas(grid, davis.A + davis.B + davis.C + davis.D));
  return out;
}

Json worstInstanceJson(const CorpusParams& params, const RatioRow& row) {
  const Instance inst = makeInstance(params, row.id);
  Json out;
  out["id"] = row.id;
  out["seed"] = row.seed;
  out["sampler"] = samplerName(row.sampler);
  out["grid"] = toJson(inst.grid);
  out["f"] = toJson(inst.f);
  out["norms"] = toJson(row.norms);
  out["ratios"] = Json{{"mOverS", row.mOverS},
                       {"sOverLittleS", row.sOverLittleS},
                       {"mOverLittleS", row.mOverLittleS},
                       {"davisRow", row.davisRow},
                       {"davisCol", row.davisCol}};
  return out;
}

namespace {

void appendCsvRow(std::ostringstream& os, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os << ',';
    os << c;
    first = false;
  }
  os << '\n';
}

std::string num(Scalar v) { return formatG17(v); }
std::string num(Index v) { return std::to_string(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }

}  // namespace

std::string ratioReportCsv(const RatioReport& report) {
  std::ostringstream os;
  os << "id,seed,atoms,rows,cols,sampler,degenerate,h1S,h1s,h1M,"
        "mOverS,sOverLittleS,mOverLittleS,davisRow,davisCol\n";
  for (const auto& r : report.rows) {
    appendCsvRow(os, {num(r.id), num(r.seed), num(r.atoms), num(r.rows), num(r.cols),
                      samplerName(r.sampler), r.degenerate ? "1" : "0", num(r.norms.h1S),
                      num(r.norms.h1s), num(r.norms.h1M), num(r.mOverS), num(r.sOverLittleS),
                      num(r.mOverLittleS), num(r.davisRow), num(r.davisCol)});
  }
  return os.str();
}

std::string brSuiteCsv(const std::vector<BrSuiteRow>& rows) {
  std::ostringstream os;
  os << "id,seed,p,q,brLhs,brDiag,brCond,brRatio,adLhs,adDiag,adCond,adRatio,"
        "iterLhs,iterRhs,iterRatio,tensorResidual\n";
  for (const auto& r : rows) {
    appendCsvRow(os, {num(r.id), num(r.seed), num(r.p), num(r.q), num(r.brLhs), num(r.brDiag),
                      num(r.brCond), num(r.brRatio), num(r.adLhs), num(r.adDiag), num(r.adCond),
                      num(r.adRatio), num(r.iterLhs), num(r.iterRhs), num(r.iterRatio),
                      num(r.tensorResidual)});
  }
  return os.str();
}

std::string dualitySuiteCsv(const std::vector<DualityRow>& rows) {
  std::ostringstream os;
  os << "id,seed,p,q,normV,normW,pairing,witnessResidual,defectLower,holderSlack,embeddingRatio\n";
  for (const auto& r : rows) {
    appendCsvRow(os, {num(r.id), num(r.seed), num(r.p), num(r.q), num(r.normV), num(r.normW),
                      num(r.pairingValue), num(r.witnessResidual), num(r.defectLower),
                      num(r.holderSlack), num(r.embeddingRatio)});
  }
  return os.str();
}

std::string readTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void writeTextFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
}

}  // namespace martlab

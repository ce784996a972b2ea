#pragma once

#include "martlab/experiments.hpp"

#include "json.hpp"

#include <string>

namespace martlab {

using Json = nlohmann::json;

/// 17 significant digits; enough for a lossless double round trip.
std::string formatG17(Scalar value);

Json toJson(const Vec& v);
Vec vecFromJson(const Json& j);

/// {"probs":[...]}
Json toJson(const FiniteProbSpace& space);
FiniteProbSpace spaceFromJson(const Json& j);

/// {"blocks":[label per atom]}
Json toJson(const Partition& p);
Partition partitionFromJson(const Json& j);

/// {"space":{...},"rows":N1,"cols":N2,"partitions":[[{...},...],...],"certifiedF4":bool}
Json toJson(const FiltrationGrid& grid);
FiltrationGrid gridFromJson(const Json& j);

/// {"entries":[[[...],...],...]}
Json toJson(const AdaptedSeq2D& seq);
AdaptedSeq2D seqFromJson(const Json& j, const FiltrationGrid& grid);

Json toJson(const FiltrationGrid& grid, const FourTermDecomp& d, const SolverReport& report);

Json toJson(const F4Report& report);
Json toJson(const HardyNorms& norms);
Json toJson(const ChainReport& report);
Json toJson(const DavisResult& davis, const FiltrationGrid& grid);

/// Worst-instance dump for regression hunting.
Json worstInstanceJson(const CorpusParams& params, const RatioRow& row);

std::string ratioReportCsv(const RatioReport& report);
std::string brSuiteCsv(const std::vector<BrSuiteRow>& rows);
std::string dualitySuiteCsv(const std::vector<DualityRow>& rows);

std::string readTextFile(const std::string& path);
void writeTextFile(const std::string& path, const std::string& contents);

}  // namespace martlab

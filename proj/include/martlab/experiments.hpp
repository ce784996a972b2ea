#pragma once

#include "martlab/decomposition.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace martlab {

struct BrTriple {
  Scalar lhs = 0.0;
  Scalar rhsDiag = 0.0;
  Scalar rhsCond = 0.0;
};

/// Burkholder-Rosenthal quantities for p >= 2:
/// lhs = ||f||_p, rhsDiag = (E sum |delta_k f|^p)^{1/p},
/// rhsCond = (E (sum E_{k-1}|delta_k f|^2)^{p/2})^{1/p}.
BrTriple brCheck(const FiniteProbSpace& space, const Filtration1D& filt, const VecRef& f,
                 Scalar p);

struct RademacherTensor {
  FiniteProbSpace space;   // base x {-1,+1}^n
  Filtration1D filt;       // F_k tensor sigma(r_1..r_k), F_k generated by Y_1..Y_k
  Vec f;                   // sum_k Y_k^{1/2} r_k
  std::vector<Vec> liftedY;
};

/// Tensor construction turning nonnegative Y_k into a martingale with
/// |delta_k f| = Y_k^{1/2}.
RademacherTensor rademacherTensor(const FiniteProbSpace& space, const std::vector<Vec>& y,
                                  Index atomCap = 4096);

/// Adapted Burkholder-Rosenthal for q >= 1 and nonnegative adapted Y:
/// lhs = E (sum Y_k)^q, rhsDiag = E sum Y_k^q, rhsCond = E (sum E_{k-1} Y_k)^q.
BrTriple brAdaptedCheck(const FiniteProbSpace& space, const Filtration1D& filt,
                        const std::vector<Vec>& y, Scalar q);

struct IterBrPair {
  Scalar lhs = 0.0;
  Scalar rhs = 0.0;
};

/// lhs = E (sum Z)^q against the four-term iterated bound.
IterBrPair iterBRCheck(const FiltrationGrid& grid, const AdaptedSeq2D& z, Scalar q);

enum class SamplerKind { Gaussian, Sparse, Adversarial };
const char* samplerName(SamplerKind kind);

/// Reproducible corpus description; every instance derives its own stream
/// from (seed, id).
struct CorpusParams {
  std::uint64_t seed = 1;
  Index instances = 1000;
  Index maxRowFactors = 2;
  Index maxColFactors = 2;
  Index minFactorSize = 2;
  Index maxFactorSize = 3;
  Scalar probDirichletAlpha = 1.0;
  Index atomCap = 4096;
};

struct Instance {
  Index id = 0;
  std::uint64_t seed = 0;
  FiniteProbSpace space;
  FiltrationGrid grid;
  Vec f;
  SamplerKind sampler = SamplerKind::Gaussian;
};

Instance makeInstance(const CorpusParams& params, Index id);

struct RatioRow {
  Index id = 0;
  std::uint64_t seed = 0;
  Index atoms = 0, rows = 0, cols = 0;
  SamplerKind sampler = SamplerKind::Gaussian;
  bool degenerate = false;
  HardyNorms norms;
  Scalar mOverS = 0.0;      // h1M / h1S
  Scalar sOverLittleS = 0.0;  // h1S / h1s
  Scalar mOverLittleS = 0.0;  // h1M / h1s
  Scalar davisRow = 0.0;    // 1D h1M/h1S on the row-marginal chain
  Scalar davisCol = 0.0;
};

struct RatioReport {
  std::vector<RatioRow> rows;
  Index skipped = 0;
  Scalar maxMOverS = 0.0;
  Index worstId = -1;
  Scalar maxSOverLittleS = 0.0;
  Scalar maxMOverLittleS = 0.0;
  Scalar minDavis = 0.0;
  Scalar maxDavis = 0.0;
  Scalar medianMOverS = 0.0;
  Scalar p90MOverS = 0.0;
};

/// Hardy-norm ratio survey over the corpus; deterministic in (params, and
/// independent of the thread count).
RatioReport davisRatioSearch(const CorpusParams& params, Index threads = 1);

struct BrSuiteRow {
  Index id = 0;
  std::uint64_t seed = 0;
  Scalar p = 0.0, q = 0.0;
  Scalar brLhs = 0.0, brDiag = 0.0, brCond = 0.0, brRatio = 0.0;
  Scalar adLhs = 0.0, adDiag = 0.0, adCond = 0.0, adRatio = 0.0;
  Scalar iterLhs = 0.0, iterRhs = 0.0, iterRatio = 0.0;
  Scalar tensorResidual = 0.0;  // relative residual of E(sum Y)^{p/2} = E(sum |delta f|^2)^{p/2}
};

std::vector<BrSuiteRow> brSuite(const CorpusParams& params, Scalar p, Scalar q, Index threads = 1);

struct DualityRow {
  Index id = 0;
  std::uint64_t seed = 0;
  Scalar p = 0.0, q = 0.0;
  Scalar normV = 0.0, normW = 0.0;
  Scalar pairingValue = 0.0;
  Scalar witnessResidual = 0.0;  // relative |<X,Y> - E s^q|
  Scalar defectLower = 0.0;      // achieved duality ratio
  Scalar holderSlack = 0.0;      // normV*normW - <X,Y>
  Scalar embeddingRatio = 0.0;   // mixedNorm / plain norm
};

std::vector<DualityRow> dualitySuite(const CorpusParams& params, Scalar p, Scalar q,
                                     Index threads = 1);

/// Runs fn(0..n-1) on up to `threads` workers; output slots are indexed, so
/// results do not depend on scheduling.
void parallelFor(Index n, Index threads, const std::function<void(Index)>& fn);

}  // namespace martlab

#pragma once

#include "martlab/prob_space.hpp"

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace martlab {

/// Flat indexed sequence of random variables (a flattened grid when it comes
/// from a two-parameter family).
using AdaptedSeq = std::vector<Vec>;

/// V-adapted sequence together with the conditioning family U; the duality
/// operations additionally need sigma(U_k) contained in sigma(V_k).
struct AdaptedFamily {
  FiniteProbSpace space;
  AdaptedSeq X;
  std::vector<Partition> U;
  std::vector<Partition> V;
};

/// Throws unless sizes line up and each X_k is V_k-measurable; with
/// requireNested also checks sigma(U_k) within sigma(V_k).
void validateFamily(const AdaptedFamily& fam, bool requireNested);

struct ExponentPair {
  Scalar p = 2.0;
  Scalar q = 2.0;
  Scalar pPrime = 2.0;
  Scalar qPrime = 2.0;

  ExponentPair(Scalar pIn, Scalar qIn);
};

/// ||X||_{L^q(V, l^p | U)} = (E (sum_k E_{U_k}|X_k|^p)^{q/p})^{1/q};
/// p or q may be infinite.
Scalar mixedNorm(const AdaptedFamily& fam, Scalar p, Scalar q);
Scalar mixedNorm(const AdaptedFamily& fam, const ExponentPair& e);

/// Plain norm (E (sum_k |X_k|^p)^{q/p})^{1/q} without the conditioning, the
/// right-hand side of the embedding bounds.
Scalar plainMixedNorm(const AdaptedFamily& fam, Scalar p, Scalar q);

/// Holder exponents (alpha, beta) with 1/alpha = q'p/(qp'), 1/beta = (q-p)q'/q;
/// requires 1 < p < q < inf.
std::pair<Scalar, Scalar> holderExponents(const ExponentPair& e);

/// Witness Y_k = |X_k|^{p-1} E_{U_k}(s^{q-p}) sgn X_k with
/// s = (sum_j E_{U_j}|X_j|^p)^{1/p}; requires p <= q and X not identically 0.
AdaptedFamily dualWitness(const AdaptedFamily& fam, const ExponentPair& e);

/// <X,Y> = sum_k E X_k Y_k.
Scalar pairing(const FiniteProbSpace& space, const AdaptedSeq& x, const AdaptedSeq& y);

struct DualityDefect {
  /// Achieved pairing ratio <X,Y> / (||X||_V ||Y||_W); certifies the lower
  /// duality bound.
  Scalar lower = 0.0;
  /// Normalized Holder headroom 1 - lower; certifies the upper bound.
  Scalar upper = 0.0;
  /// True when p > q and the two sides were swapped.
  bool swapped = false;
};

DualityDefect dualityDefect(const AdaptedFamily& fam, const ExponentPair& e);

/// Norm evaluator with a probability-metric subgradient; the building block
/// of interpolation sums.
struct SeqNorm {
  std::function<Scalar(const AdaptedSeq&)> value;
  std::function<AdaptedSeq(const AdaptedSeq&)> subgrad;
};

/// alpha-convexification ||f||^(alpha) = || |f|^alpha ||^{1/alpha} of an
/// evaluator, with the chained subgradient.
SeqNorm convexify(const SeqNorm& base, Scalar alpha);

/// Sum of evaluator values at X (the intersection-space norm).
Scalar intersectionNorm(const std::vector<SeqNorm>& norms, const AdaptedSeq& x);

struct SumNormParams {
  Index maxIter = 20000;
  Scalar tol = 1e-6;       // relative best-objective improvement per window
  Index window = 500;
  std::uint64_t seed = 0;  // reserved for randomized restarts; solve is deterministic
  Index initPart = -1;     // free part initialized to X; -1 puts X in the last part
  std::function<Vec(Index k, const Vec&)> project;  // per-entry feasibility projection
};

struct SumNormResult {
  Scalar value = 0.0;
  std::vector<AdaptedSeq> parts;
  Index iterations = 0;
  bool converged = false;
  Scalar residual = 0.0;  // last window's relative improvement
};

/// inf over X = sum_m parts_m of sum_m norms_m(parts_m), by projected
/// subgradient with a Polyak-style step and vanishing target gap. The last
/// part is eliminated (parts_last = X - sum of the free parts), so feasibility
/// of the sum constraint is exact throughout.
SumNormResult interpolationSumNorm(const FiniteProbSpace& space, const std::vector<SeqNorm>& norms,
                                   const AdaptedSeq& x, const SumNormParams& params);

}  // namespace martlab

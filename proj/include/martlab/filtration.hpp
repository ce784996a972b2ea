#pragma once

#include "martlab/prob_space.hpp"

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace martlab {

/// One-parameter filtration with the usual normalization: parts[0] is the
/// trivial sigma-algebra and the chain is nondecreasing.
class Filtration1D {
 public:
  explicit Filtration1D(std::vector<Partition> parts);

  Index length() const { return static_cast<Index>(parts_.size()) - 1; }
  const Partition& part(Index k) const { return parts_[static_cast<std::size_t>(k)]; }
  const std::vector<Partition>& parts() const { return parts_; }

 private:
  std::vector<Partition> parts_;
};

/// Two-parameter grid of sigma-algebras, nondecreasing in both directions.
/// The (F4) certificate is a flag: product constructions set it, loaded grids
/// earn it through checkF4.
class FiltrationGrid {
 public:
  FiltrationGrid(FiniteProbSpace space, std::vector<std::vector<Partition>> parts,
                 bool certifiedF4 = false, Scalar f4Tolerance = 1e-12);

  Index rows() const { return static_cast<Index>(parts_.size()) - 1; }
  Index cols() const { return static_cast<Index>(parts_[0].size()) - 1; }
  const Partition& part(Index i, Index j) const {
    return parts_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  const std::vector<std::vector<Partition>>& parts() const { return parts_; }
  const FiniteProbSpace& space() const { return space_; }
  bool certifiedF4() const { return certifiedF4_; }
  void setCertifiedF4(bool value) { certifiedF4_ = value; }
  Scalar f4Tolerance() const { return f4Tolerance_; }

  friend bool operator==(const FiltrationGrid& a, const FiltrationGrid& b) {
    return a.space_ == b.space_ && a.parts_ == b.parts_ && a.certifiedF4_ == b.certifiedF4_;
  }

 private:
  FiniteProbSpace space_;
  std::vector<std::vector<Partition>> parts_;
  bool certifiedF4_ = false;
  Scalar f4Tolerance_ = 1e-12;
};

/// Grid-indexed family of random variables, entry (i,j) measurable w.r.t.
/// the grid's (i,j) sigma-algebra.
using AdaptedSeq2D = std::vector<std::vector<Vec>>;

AdaptedSeq2D zeroSeq(const FiltrationGrid& grid);
bool isAdapted(const FiltrationGrid& grid, const AdaptedSeq2D& x, Scalar tol = 1e-9);

/// F_{i,inf}: join over row i; coincides with the last entry of the row on a
/// monotone finite grid.
Partition rowSigma(const FiltrationGrid& grid, Index i);
/// F_{inf,j}: join over column j.
Partition colSigma(const FiltrationGrid& grid, Index j);

enum class F4Mode { AllPairs, Marginal };

struct F4Report {
  bool pass = false;
  Scalar worstDefect = 0.0;
  /// Grid positions (i,j),(k,l) of the worst operator pair. In Marginal mode
  /// these are the row/column margins (i, cols) and (rows, j).
  std::array<Index, 4> witness{0, 0, 0, 0};
  F4Mode mode = F4Mode::AllPairs;
};

/// Verifies E_{i,j} E_{k,l} = E_{min(i,k),min(j,l)} = E_{k,l} E_{i,j} on the
/// averaging-operator matrices. AllPairs runs every index pair; Marginal runs
/// the sufficient margin identities E_{i,inf} E_{inf,j} = E_{i,j} = E_{inf,j} E_{i,inf}.
F4Report checkF4(const FiltrationGrid& grid, Scalar tol = 1e-12, F4Mode mode = F4Mode::AllPairs);

/// Max entrywise defect of E_F E_G = E_{F^G} = E_G E_F for a single pair;
/// zero (up to roundoff) iff F and G are conditionally independent given F^G.
Scalar condIndepDefect(const FiniteProbSpace& space, const Partition& f, const Partition& g);

/// Product space with F_{i,j} generated by the first i row coordinates and
/// first j column coordinates; the canonical (F4) example.
std::pair<FiniteProbSpace, FiltrationGrid> buildProductGrid(
    const std::vector<FiniteProbSpace>& rowFactors, const std::vector<FiniteProbSpace>& colFactors,
    Index atomCap = 4096);

/// Index shift with clamping at zero in both parameters.
FiltrationGrid prevShift(const FiltrationGrid& grid);
Filtration1D prevShift1D(const Filtration1D& filt);

struct RandomGridParams {
  std::vector<Index> rowFactorSizes;
  std::vector<Index> colFactorSizes;
  Scalar probDirichletAlpha = 1.0;
  Index atomCap = 4096;
};

/// Random product grid with factor probabilities from a symmetric Dirichlet,
/// floored at 1e-3 and renormalized. Deterministic in the seed.
std::pair<FiniteProbSpace, FiltrationGrid> randomGrid(std::uint64_t seed,
                                                      const RandomGridParams& params);

}  // namespace martlab

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace martlab {

using Scalar = double;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;
using VecRef = Eigen::Ref<const Vec>;

/// Finite probability space: strictly positive atom weights summing to one.
/// Every operator in the library acts on vectors of per-atom values over one
/// of these spaces.
class FiniteProbSpace {
 public:
  explicit FiniteProbSpace(Vec probs);

  Index size() const { return probs_.size(); }
  const Vec& probs() const { return probs_; }
  Scalar prob(Index atom) const { return probs_[atom]; }

  /// E X = sum_w P(w) X(w).
  Scalar expectation(const VecRef& x) const;

  static FiniteProbSpace uniform(Index atoms);

  friend bool operator==(const FiniteProbSpace& a, const FiniteProbSpace& b) {
    return a.probs_.size() == b.probs_.size() && a.probs_ == b.probs_;
  }

 private:
  Vec probs_;
};

/// A sigma-algebra on a finite space, stored as block labels per atom.
/// Labels are canonical (blocks numbered by first occurrence), so two
/// partitions are equal iff their label vectors are equal.
class Partition {
 public:
  explicit Partition(const std::vector<int>& blockOf);

  static Partition trivial(Index atoms);
  static Partition singletons(Index atoms);
  /// Partition generated by x: atoms with equal values share a block.
  static Partition levelSets(const VecRef& x);

  Index size() const { return static_cast<Index>(blockOf_.size()); }
  int blockCount() const { return blockCount_; }
  int block(Index atom) const { return blockOf_[atom]; }
  const std::vector<int>& blockOf() const { return blockOf_; }
  bool isTrivial() const { return blockCount_ == 1; }

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.blockOf_ == b.blockOf_;
  }
  friend bool operator!=(const Partition& a, const Partition& b) { return !(a == b); }

 private:
  Partition() = default;

  std::vector<int> blockOf_;
  int blockCount_ = 0;
};

/// E[x | P]: on each block, the probability-weighted average of x.
Vec condExpect(const FiniteProbSpace& space, const Partition& p, const VecRef& x);

/// Blockwise maximum of x; the conditional L^inf companion of condExpect.
Vec condMax(const FiniteProbSpace& space, const Partition& p, const VecRef& x);

/// Dense matrix of the averaging operator x -> E[x | P].
Mat condExpectMatrix(const FiniteProbSpace& space, const Partition& p);

/// True iff p is finer than or equal to q, i.e. sigma(q) is contained in sigma(p).
bool refines(const Partition& p, const Partition& q);

/// Finest common coarsening; realizes the intersection of the two sigma-algebras.
Partition meet(const Partition& p, const Partition& q);

/// Common refinement; realizes the sigma-algebra generated by both.
Partition join(const Partition& p, const Partition& q);

/// (sum_w P(w)|x(w)|^p)^{1/p}; p = inf gives max |x|. Requires p >= 1.
Scalar lpNorm(const FiniteProbSpace& space, const VecRef& x, Scalar p);

}  // namespace martlab

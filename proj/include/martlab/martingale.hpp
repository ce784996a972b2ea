#pragma once

#include "martlab/filtration.hpp"

namespace martlab {

/// One-parameter martingale difference over a monotone chain of partitions:
/// delta_0 = E_{chain[0]}, delta_k = E_k - E_{k-1} for k >= 1. The chain need
/// not start trivial (grid margins do not), Filtration1D chains do.
Vec delta1D(const FiniteProbSpace& space, const std::vector<Partition>& chain, Index k,
            const VecRef& f);
Vec delta1D(const FiniteProbSpace& space, const Filtration1D& filt, Index k, const VecRef& f);

std::vector<Vec> allDeltas1D(const FiniteProbSpace& space, const std::vector<Partition>& chain,
                             const VecRef& f);

Vec squareFn1D(const FiniteProbSpace& space, const std::vector<Partition>& chain, const VecRef& f);
/// Conditional square function; E_{k-1} clamps to E_0 at k = 0.
Vec condSquareFn1D(const FiniteProbSpace& space, const std::vector<Partition>& chain,
                   const VecRef& f);

/// Two-parameter difference via the product formula
/// delta_{i,j} = (E_{i,inf} - E_{i-1,inf})(E_{inf,j} - E_{inf,j-1}), with E_0
/// as the factor at index 0 in either parameter.
Vec delta2D(const FiltrationGrid& grid, Index i, Index j, const VecRef& f);

/// All differences at once (shares the marginal projections).
AdaptedSeq2D allDeltas(const FiltrationGrid& grid, const VecRef& f);

Vec squareFn2D(const FiltrationGrid& grid, const VecRef& f);
Vec condSquareFn2D(const FiltrationGrid& grid, const VecRef& f);

/// sup_k |E_{P_k} f| over an arbitrary nonempty family.
Vec maximalFn(const FiniteProbSpace& space, const std::vector<Partition>& family, const VecRef& f);
/// Maximal function over every grid entry.
Vec maximalFn(const FiltrationGrid& grid, const VecRef& f);

struct HardyNorms {
  Scalar h1S = 0.0;
  Scalar h1s = 0.0;
  Scalar h1M = 0.0;
};

HardyNorms hardyNorms(const FiltrationGrid& grid, const VecRef& f);
HardyNorms hardyNorms1D(const FiniteProbSpace& space, const std::vector<Partition>& chain,
                        const VecRef& f);

/// min over atoms of E_F (E_G x^2)^{1/2} - (E_G (E_F x)^2)^{1/2}; nonnegative
/// when F and G are conditionally independent.
Scalar fveegGap(const FiniteProbSpace& space, const Partition& f, const Partition& g,
                const VecRef& x);

/// ||M_family x||_p / ||x||_p for p in (1, inf).
Scalar doobRatio(const FiniteProbSpace& space, const std::vector<Partition>& family,
                 const VecRef& x, Scalar p);

}  // namespace martlab

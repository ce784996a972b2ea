#include "martlab/martingale.hpp"

#include <cmath>

namespace martlab {

namespace {

void checkChain(const FiniteProbSpace& space, const std::vector<Partition>& chain) {
  if (chain.empty()) throw std::invalid_argument("martingale: empty chain of sigma-algebras");
  for (const auto& p : chain) {
    if (p.size() != space.size()) {
      throw std::invalid_argument("martingale: partition size mismatch");
    }
  }
}

}  // namespace

Vec delta1D(const FiniteProbSpace& space, const std::vector<Partition>& chain, Index k,
            const VecRef& f) {
  checkChain(space, chain);
  if (k < 0 || k >= static_cast<Index>(chain.size())) {
    throw std::invalid_argument("delta1D: index out of range");
  }
  Vec out = condExpect(space, chain[static_cast<std::size_t>(k)], f);
  if (k > 0) out -= condExpect(space, chain[static_cast<std::size_t>(k - 1)], f);
  return out;
}

Vec delta1D(const FiniteProbSpace& space, const Filtration1D& filt, Index k, const VecRef& f) {
  return delta1D(space, filt.parts(), k, f);
}

std::vector<Vec> allDeltas1D(const FiniteProbSpace& space, const std::vector<Partition>& chain,
                             const VecRef& f) {
  checkChain(space, chain);
  std::vector<Vec> proj;
  proj.reserve(chain.size());
  for (const auto& p : chain) proj.push_back(condExpect(space, p, f));
  std::vector<Vec> deltas(chain.size());
  deltas[0] = proj[0];
  for (std::size_t k = 1; k < chain.size(); ++k) deltas[k] = proj[k] - proj[k - 1];
  return deltas;
}

Vec squareFn1D(const FiniteProbSpace& space, const std::vector<Partition>& chain, const VecRef& f) {
  const auto deltas = allDeltas1D(space, chain, f);
  Vec s2 = Vec::Zero(space.size());
  for (const auto& d : deltas) s2 += d.cwiseAbs2();
  return s2.cwiseSqrt();
}

Vec condSquareFn1D(const FiniteProbSpace& space, const std::vector<Partition>& chain,
                   const VecRef& f) {
  const auto deltas = allDeltas1D(space, chain, f);
  Vec s2 = Vec::Zero(space.size());
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    const Partition& prev = chain[k > 0 ? k - 1 : 0];
    s2 += condExpect(space, prev, deltas[k].cwiseAbs2());
  }
  return s2.cwiseSqrt();
}

Vec delta2D(const FiltrationGrid& grid, Index i, Index j, const VecRef& f) {
  if (i < 0 || i > grid.rows() || j < 0 || j > grid.cols()) {
    throw std::invalid_argument("delta2D: index out of range");
  }
  const FiniteProbSpace& space = grid.space();
  Vec colDelta = condExpect(space, colSigma(grid, j), f);
  if (j > 0) colDelta -= condExpect(space, colSigma(grid, j - 1), f);
  Vec out = condExpect(space, rowSigma(grid, i), colDelta);
  if (i > 0) out -= condExpect(space, rowSigma(grid, i - 1), colDelta);
  return out;
}

AdaptedSeq2D allDeltas(const FiltrationGrid& grid, const VecRef& f) {
  const FiniteProbSpace& space = grid.space();
  const Index rows = grid.rows();
  const Index cols = grid.cols();

  std::vector<Vec> colDelta(static_cast<std::size_t>(cols) + 1);
  Vec prev;
  for (Index j = 0; j <= cols; ++j) {
    Vec proj = condExpect(space, colSigma(grid, j), f);
    colDelta[static_cast<std::size_t>(j)] = (j == 0) ? proj : Vec(proj - prev);
    prev = std::move(proj);
  }

  AdaptedSeq2D deltas(static_cast<std::size_t>(rows) + 1,
                      std::vector<Vec>(static_cast<std::size_t>(cols) + 1));
  std::vector<Vec> prevRow(static_cast<std::size_t>(cols) + 1);
  for (Index i = 0; i <= rows; ++i) {
    const Partition rowPart = rowSigma(grid, i);
    for (Index j = 0; j <= cols; ++j) {
      Vec proj = condExpect(space, rowPart, colDelta[static_cast<std::size_t>(j)]);
      deltas[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          (i == 0) ? proj : Vec(proj - prevRow[static_cast<std::size_t>(j)]);
      prevRow[static_cast<std::size_t>(j)] = std::move(proj);
    }
  }
  return deltas;
}

Vec squareFn2D(const FiltrationGrid& grid, const VecRef& f) {
  const auto deltas = allDeltas(grid, f);
  Vec s2 = Vec::Zero(grid.space().size());
  for (const auto& row : deltas) {
    for (const auto& d : row) s2 += d.cwiseAbs2();
  }
  return s2.cwiseSqrt();
}

Vec condSquareFn2D(const FiltrationGrid& grid, const VecRef& f) {
  const auto deltas = allDeltas(grid, f);
  Vec s2 = Vec::Zero(grid.space().size());
  for (Index i = 0; i <= grid.rows(); ++i) {
    for (Index j = 0; j <= grid.cols(); ++j) {
      const Partition& prev = grid.part(std::max<Index>(i - 1, 0), std::max<Index>(j - 1, 0));
      s2 += condExpect(grid.space(), prev,
                       deltas[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].cwiseAbs2());
    }
  }
  return s2.cwiseSqrt();
}

Vec maximalFn(const FiniteProbSpace& space, const std::vector<Partition>& family,
              const VecRef& f) {
  if (family.empty()) throw std::invalid_argument("maximalFn: empty family");
  Vec best = Vec::Constant(space.size(), 0.0);
  bool first = true;
  for (const auto& p : family) {
    Vec v = condExpect(space, p, f).cwiseAbs();
    best = first ? v : Vec(best.cwiseMax(v));
    first = false;
  }
  return best;
}

Vec maximalFn(const FiltrationGrid& grid, const VecRef& f) {
  std::vector<Partition> family;
  family.reserve(static_cast<std::size_t>((grid.rows() + 1) * (grid.cols() + 1)));
  for (Index i = 0; i <= grid.rows(); ++i) {
    for (Index j = 0; j <= grid.cols(); ++j) family.push_back(grid.part(i, j));
  }
  return maximalFn(grid.space(), family, f);
}

HardyNorms hardyNorms(const FiltrationGrid& grid, const VecRef& f) {
  const FiniteProbSpace& space = grid.space();
  HardyNorms out;
  out.h1S = space.expectation(squareFn2D(grid, f));
  out.h1s = space.expectation(condSquareFn2D(grid, f));
  out.h1M = space.expectation(maximalFn(grid, f));
  return out;
}

HardyNorms hardyNorms1D(const FiniteProbSpace& space, const std::vector<Partition>& chain,
                        const VecRef& f) {
  HardyNorms out;
  out.h1S = space.expectation(squareFn1D(space, chain, f));
  out.h1s = space.expectation(condSquareFn1D(space, chain, f));
  out.h1M = space.expectation(maximalFn(space, chain, f));
  return out;
}

Scalar fveegGap(const FiniteProbSpace& space, const Partition& f, const Partition& g,
                const VecRef& x) {
  if (f.size() != space.size() || g.size() != space.size() || x.size() != space.size()) {
    throw std::invalid_argument("fveegGap: size mismatch");
  }
  const Vec lhs = condExpect(space, f, condExpect(space, g, x.cwiseAbs2()).cwiseSqrt());
  const Vec rhs = condExpect(space, g, condExpect(space, f, x).cwiseAbs2()).cwiseSqrt();
  return (lhs - rhs).minCoeff();
}

Scalar doobRatio(const FiniteProbSpace& space, const std::vector<Partition>& family,
                 const VecRef& x, Scalar p) {
  if (!(p > 1.0) || std::isinf(p)) {
    throw std::invalid_argument("doobRatio: exponent must lie in (1, inf)");
  }
  const Scalar denom = lpNorm(space, x, p);
  if (denom == 0.0) throw std::invalid_argument("doobRatio: x must not vanish");
  return lpNorm(space, maximalFn(space, family, x), p) / denom;
}

}  // namespace martlab

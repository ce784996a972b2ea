#include "martlab/filtration.hpp"

#include "martlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace martlab {

Filtration1D::Filtration1D(std::vector<Partition> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw std::invalid_argument("Filtration1D: empty chain");
  if (!parts_[0].isTrivial()) {
    throw std::invalid_argument("Filtration1D: parts[0] must be the trivial sigma-algebra");
  }
  for (std::size_t k = 0; k + 1 < parts_.size(); ++k) {
    if (parts_[k].size() != parts_[0].size()) {
      throw std::invalid_argument("Filtration1D: partitions live on different spaces");
    }
    if (!refines(parts_[k + 1], parts_[k])) {
      throw std::invalid_argument("Filtration1D: chain is not nondecreasing at index " +
                                  std::to_string(k + 1));
    }
  }
  if (parts_.back().size() != parts_[0].size()) {
    throw std::invalid_argument("Filtration1D: partitions live on different spaces");
  }
}

FiltrationGrid::FiltrationGrid(FiniteProbSpace space, std::vector<std::vector<Partition>> parts,
                               bool certifiedF4, Scalar f4Tolerance)
    : space_(std::move(space)),
      parts_(std::move(parts)),
      certifiedF4_(certifiedF4),
      f4Tolerance_(f4Tolerance) {
  if (parts_.empty() || parts_[0].empty()) {
    throw std::invalid_argument("FiltrationGrid: empty grid");
  }
  const std::size_t cols = parts_[0].size();
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i].size() != cols) {
      throw std::invalid_argument("FiltrationGrid: ragged grid");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (parts_[i][j].size() != space_.size()) {
        throw std::invalid_argument("FiltrationGrid: partition size mismatch");
      }
    }
  }
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (i + 1 < parts_.size() && !refines(parts_[i + 1][j], parts_[i][j])) {
        throw std::invalid_argument("FiltrationGrid: not monotone in the row direction at (" +
                                    std::to_string(i + 1) + "," + std::to_string(j) + ")");
      }
      if (j + 1 < cols && !refines(parts_[i][j + 1], parts_[i][j])) {
        throw std::invalid_argument("FiltrationGrid: not monotone in the column direction at (" +
                                    std::to_string(i) + "," + std::to_string(j + 1) + ")");
      }
    }
  }
}

AdaptedSeq2D zeroSeq(const FiltrationGrid& grid) {
  return AdaptedSeq2D(static_cast<std::size_t>(grid.rows() + 1),
                      std::vector<Vec>(static_cast<std::size_t>(grid.cols() + 1),
                                       Vec::Zero(grid.space().size())));
}

bool isAdapted(const FiltrationGrid& grid, const AdaptedSeq2D& x, Scalar tol) {
  if (static_cast<Index>(x.size()) != grid.rows() + 1) return false;
  for (Index i = 0; i <= grid.rows(); ++i) {
    const auto& row = x[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != grid.cols() + 1) return false;
    for (Index j = 0; j <= grid.cols(); ++j) {
      const Vec& v = row[static_cast<std::size_t>(j)];
      if (v.size() != grid.space().size()) return false;
      const Scalar scale = std::max(1.0, v.cwiseAbs().maxCoeff());
      if ((v - condExpect(grid.space(), grid.part(i, j), v)).cwiseAbs().maxCoeff() > tol * scale) {
        return false;
      }
    }
  }
  return true;
}

Partition rowSigma(const FiltrationGrid& grid, Index i) {
  if (i < 0 || i > grid.rows()) throw std::invalid_argument("rowSigma: index out of range");
  Partition acc = grid.part(i, 0);
  for (Index j = 1; j <= grid.cols(); ++j) acc = join(acc, grid.part(i, j));
  return acc;
}

Partition colSigma(const FiltrationGrid& grid, Index j) {
  if (j < 0 || j > grid.cols()) throw std::invalid_argument("colSigma: index out of range");
  Partition acc = grid.part(0, j);
  for (Index i = 1; i <= grid.rows(); ++i) acc = join(acc, grid.part(i, j));
  return acc;
}

F4Report checkF4(const FiltrationGrid& grid, Scalar tol, F4Mode mode) {
  const FiniteProbSpace& space = grid.space();
  const Index rows = grid.rows();
  const Index cols = grid.cols();

  std::vector<std::vector<Mat>> ops(static_cast<std::size_t>(rows + 1));
  for (Index i = 0; i <= rows; ++i) {
    for (Index j = 0; j <= cols; ++j) {
      ops[static_cast<std::size_t>(i)].push_back(condExpectMatrix(space, grid.part(i, j)));
    }
  }

  F4Report report;
  report.mode = mode;
  report.worstDefect = 0.0;

  auto consider = [&](Index i, Index j, Index k, Index l) {
    const Mat& a = ops[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    const Mat& b = ops[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
    const Mat& low = ops[static_cast<std::size_t>(std::min(i, k))][static_cast<std::size_t>(std::min(j, l))];
    const Scalar defect = std::max(((a * b) - low).cwiseAbs().maxCoeff(),
                                   ((b * a) - low).cwiseAbs().maxCoeff());
    if (defect > report.worstDefect) {
      report.worstDefect = defect;
      report.witness = {i, j, k, l};
    }
  };

  if (mode == F4Mode::AllPairs) {
    const Index cells = (rows + 1) * (cols + 1);
    for (Index a = 0; a < cells; ++a) {
      for (Index b = a; b < cells; ++b) {
        consider(a / (cols + 1), a % (cols + 1), b / (cols + 1), b % (cols + 1));
      }
    }
  } else {
    // E_{i,inf} = E_{i,cols} and E_{inf,j} = E_{rows,j} on a finite monotone grid.
    for (Index i = 0; i <= rows; ++i) {
      for (Index j = 0; j <= cols; ++j) {
        consider(i, cols, rows, j);
      }
    }
  }
  report.pass = report.worstDefect <= tol;
  return report;
}

Scalar condIndepDefect(const FiniteProbSpace& space, const Partition& f, const Partition& g) {
  if (f.size() != space.size() || g.size() != space.size()) {
    throw std::invalid_argument("condIndepDefect: size mismatch");
  }
  const Mat ef = condExpectMatrix(space, f);
  const Mat eg = condExpectMatrix(space, g);
  const Mat em = condExpectMatrix(space, meet(f, g));
  return std::max(((ef * eg) - em).cwiseAbs().maxCoeff(), ((eg * ef) - em).cwiseAbs().maxCoeff());
}

std::pair<FiniteProbSpace, FiltrationGrid> buildProductGrid(
    const std::vector<FiniteProbSpace>& rowFactors, const std::vector<FiniteProbSpace>& colFactors,
    Index atomCap) {
  const std::size_t nRow = rowFactors.size();
  const std::size_t nCol = colFactors.size();
  std::vector<const FiniteProbSpace*> dims;
  dims.reserve(nRow + nCol);
  for (const auto& f : rowFactors) dims.push_back(&f);
  for (const auto& f : colFactors) dims.push_back(&f);

  Index atoms = 1;
  for (const auto* d : dims) {
    atoms *= d->size();
    if (atoms > atomCap) {
      throw std::invalid_argument("buildProductGrid: atom count exceeds cap");
    }
  }

  const std::size_t nDim = dims.size();
  std::vector<Index> stride(nDim, 1);
  for (std::size_t d = nDim; d-- > 1;) {
    stride[d - 1] = stride[d] * dims[d]->size();
  }
  auto coord = [&](Index w, std::size_t d) { return (w / stride[d]) % dims[d]->size(); };

  Vec probs = Vec::Ones(atoms);
  for (Index w = 0; w < atoms; ++w) {
    for (std::size_t d = 0; d < nDim; ++d) probs[w] *= dims[d]->prob(coord(w, d));
  }
  // Normalize away roundoff so the space constructor's sum check is exact.
  probs /= probs.sum();
  FiniteProbSpace space(probs);

  auto cellPartition = [&](std::size_t i, std::size_t j) {
    std::vector<int> labels(static_cast<std::size_t>(atoms));
    for (Index w = 0; w < atoms; ++w) {
      Index key = 0;
      for (std::size_t d = 0; d < i; ++d) key = key * dims[d]->size() + coord(w, d);
      for (std::size_t d = nRow; d < nRow + j; ++d) key = key * dims[d]->size() + coord(w, d);
      labels[static_cast<std::size_t>(w)] = static_cast<int>(key);
    }
    return Partition(labels);
  };

  std::vector<std::vector<Partition>> parts;
  parts.reserve(nRow + 1);
  for (std::size_t i = 0; i <= nRow; ++i) {
    std::vector<Partition> row;
    row.reserve(nCol + 1);
    for (std::size_t j = 0; j <= nCol; ++j) row.push_back(cellPartition(i, j));
    parts.push_back(std::move(row));
  }
  FiltrationGrid grid(space, std::move(parts), /*certifiedF4=*/true);
  return {std::move(space), std::move(grid)};
}

FiltrationGrid prevShift(const FiltrationGrid& grid) {
  std::vector<std::vector<Partition>> parts;
  parts.reserve(static_cast<std::size_t>(grid.rows()) + 1);
  for (Index i = 0; i <= grid.rows(); ++i) {
    std::vector<Partition> row;
    row.reserve(static_cast<std::size_t>(grid.cols()) + 1);
    for (Index j = 0; j <= grid.cols(); ++j) {
      row.push_back(grid.part(std::max<Index>(i - 1, 0), std::max<Index>(j - 1, 0)));
    }
    parts.push_back(std::move(row));
  }
  return FiltrationGrid(grid.space(), std::move(parts), grid.certifiedF4());
}

Filtration1D prevShift1D(const Filtration1D& filt) {
  std::vector<Partition> parts;
  parts.reserve(filt.parts().size());
  for (Index k = 0; k <= filt.length(); ++k) {
    parts.push_back(filt.part(std::max<Index>(k - 1, 0)));
  }
  return Filtration1D(std::move(parts));
}

std::pair<FiniteProbSpace, FiltrationGrid> randomGrid(std::uint64_t seed,
                                                      const RandomGridParams& params) {
  Rng rng(seed);
  auto makeFactors = [&](const std::vector<Index>& sizes) {
    std::vector<FiniteProbSpace> factors;
    factors.reserve(sizes.size());
    for (Index n : sizes) {
      if (n < 1) throw std::invalid_argument("randomGrid: factor sizes must be >= 1");
      Vec w = rng.dirichlet(n, params.probDirichletAlpha);
      w = w.cwiseMax(1e-3);
      w /= w.sum();
      factors.emplace_back(w);
    }
    return factors;
  };
  const auto rowFactors = makeFactors(params.rowFactorSizes);
  const auto colFactors = makeFactors(params.colFactorSizes);
  return buildProductGrid(rowFactors, colFactors, params.atomCap);
}

}  // namespace martlab

#include "martlab/decomposition.hpp"

#include <cmath>
#include <memory>

namespace martlab {

namespace {

constexpr Scalar kGradEpsSq = 1e-24;  // sqrt regularization, gradients only

struct TermCache {
  FiniteProbSpace space;
  Index rows = 0;
  Index cols = 0;
  std::vector<Partition> cell;      // flattened grid partitions
  std::vector<Partition> prevCell;  // F_{max(i-1,0),max(j-1,0)}
  std::vector<Partition> rowPrev;   // rowSigma(max(i-1,0)), indexed by i
  std::vector<Partition> colPrev;   // colSigma(max(j-1,0)), indexed by j

  explicit TermCache(const FiltrationGrid& grid)
      : space(grid.space()), rows(grid.rows()), cols(grid.cols()) {
    for (Index i = 0; i <= rows; ++i) {
      for (Index j = 0; j <= cols; ++j) {
        cell.push_back(grid.part(i, j));
        prevCell.push_back(grid.part(std::max<Index>(i - 1, 0), std::max<Index>(j - 1, 0)));
      }
    }
    for (Index i = 0; i <= rows; ++i) rowPrev.push_back(rowSigma(grid, std::max<Index>(i - 1, 0)));
    for (Index j = 0; j <= cols; ++j) colPrev.push_back(colSigma(grid, std::max<Index>(j - 1, 0)));
  }

  std::size_t flat(Index i, Index j) const {
    return static_cast<std::size_t>(i * (cols + 1) + j);
  }
};

void checkSeqShape(const TermCache& c, const AdaptedSeq& x, const char* who) {
  if (x.size() != c.cell.size()) throw std::invalid_argument(std::string(who) + ": shape mismatch");
  for (const auto& v : x) {
    if (v.size() != c.space.size()) throw std::invalid_argument(std::string(who) + ": size mismatch");
  }
}

SeqNorm termNormA(std::shared_ptr<const TermCache> c) {
  SeqNorm norm;
  norm.value = [c](const AdaptedSeq& x) {
    checkSeqShape(*c, x, "termA");
    Scalar total = 0.0;
    for (const auto& v : x) total += c->space.probs().dot(v.cwiseAbs());
    return total;
  };
  norm.subgrad = [c](const AdaptedSeq& x) {
    AdaptedSeq g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) g[k] = x[k].array().sign().matrix();
    return g;
  };
  return norm;
}

SeqNorm termNormB(std::shared_ptr<const TermCache> c) {
  auto conditionalSquareSum = [c](const AdaptedSeq& x) {
    Vec t = Vec::Zero(c->space.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      t += condExpect(c->space, c->prevCell[k], x[k].cwiseAbs2());
    }
    return t;
  };
  SeqNorm norm;
  norm.value = [c, conditionalSquareSum](const AdaptedSeq& x) {
    checkSeqShape(*c, x, "termB");
    return c->space.probs().dot(conditionalSquareSum(x).cwiseSqrt());
  };
  norm.subgrad = [c, conditionalSquareSum](const AdaptedSeq& x) {
    const Vec t = conditionalSquareSum(x);
    const Vec u = (t.array() + kGradEpsSq).rsqrt().matrix();
    AdaptedSeq g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      g[k] = x[k].cwiseProduct(condExpect(c->space, c->prevCell[k], u));
    }
    return g;
  };
  return norm;
}

// The C and D terms share their structure: an outer sum over one parameter of
// E sqrt(inner conditional square sums over the other parameter).
SeqNorm termNormOneParam(std::shared_ptr<const TermCache> c, bool outerIsRow) {
  auto groupOf = [c, outerIsRow](std::size_t k) {
    const Index i = static_cast<Index>(k) / (c->cols + 1);
    const Index j = static_cast<Index>(k) % (c->cols + 1);
    return outerIsRow ? i : j;
  };
  auto condPart = [c, outerIsRow](std::size_t k) -> const Partition& {
    const Index i = static_cast<Index>(k) / (c->cols + 1);
    const Index j = static_cast<Index>(k) % (c->cols + 1);
    return outerIsRow ? c->colPrev[static_cast<std::size_t>(j)]
                      : c->rowPrev[static_cast<std::size_t>(i)];
  };
  auto groupCount = [c, outerIsRow]() {
    return static_cast<std::size_t>((outerIsRow ? c->rows : c->cols) + 1);
  };
  auto groupSums = [c, groupOf, condPart, groupCount](const AdaptedSeq& x) {
    std::vector<Vec> t(groupCount(), Vec::Zero(c->space.size()));
    for (std::size_t k = 0; k < x.size(); ++k) {
      t[static_cast<std::size_t>(groupOf(k))] += condExpect(c->space, condPart(k), x[k].cwiseAbs2());
    }
    return t;
  };
  SeqNorm norm;
  norm.value = [c, groupSums](const AdaptedSeq& x) {
    checkSeqShape(*c, x, "termCD");
    Scalar total = 0.0;
    for (const auto& t : groupSums(x)) total += c->space.probs().dot(t.cwiseSqrt());
    return total;
  };
  norm.subgrad = [c, groupOf, condPart, groupSums](const AdaptedSeq& x) {
    const auto t = groupSums(x);
    std::vector<Vec> u(t.size());
    for (std::size_t g = 0; g < t.size(); ++g) {
      u[g] = (t[g].array() + kGradEpsSq).rsqrt().matrix();
    }
    AdaptedSeq g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      g[k] = x[k].cwiseProduct(
          condExpect(c->space, condPart(k), u[static_cast<std::size_t>(groupOf(k))]));
    }
    return g;
  };
  return norm;
}

void requireAdapted(const FiltrationGrid& grid, const AdaptedSeq2D& x, const char* who) {
  if (!isAdapted(grid, x)) {
    throw std::invalid_argument(std::string(who) + ": sequence is not adapted to the grid");
  }
}

Scalar adaptednessResidual(const FiltrationGrid& grid, const AdaptedSeq2D& x) {
  Scalar worst = 0.0;
  for (Index i = 0; i <= grid.rows(); ++i) {
    for (Index j = 0; j <= grid.cols(); ++j) {
      const Vec& v = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      worst = std::max(worst,
                       (v - condExpect(grid.space(), grid.part(i, j), v)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace

AdaptedSeq flattenSeq(const AdaptedSeq2D& x) {
  AdaptedSeq out;
  for (const auto& row : x) {
    for (const auto& v : row) out.push_back(v);
  }
  return out;
}

AdaptedSeq2D unflattenSeq(const FiltrationGrid& grid, const AdaptedSeq& x) {
  const std::size_t cols = static_cast<std::size_t>(grid.cols()) + 1;
  if (x.size() != static_cast<std::size_t>(grid.rows() + 1) * cols) {
    throw std::invalid_argument("unflattenSeq: shape mismatch");
  }
  AdaptedSeq2D out(static_cast<std::size_t>(grid.rows()) + 1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].assign(x.begin() + static_cast<std::ptrdiff_t>(i * cols),
                  x.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
  }
  return out;
}

std::array<SeqNorm, 4> decompositionNorms(const FiltrationGrid& grid) {
  auto cache = std::make_shared<const TermCache>(grid);
  return {termNormA(cache), termNormB(cache), termNormOneParam(cache, /*outerIsRow=*/true),
          termNormOneParam(cache, /*outerIsRow=*/false)};
}

Scalar lhsNorm(const FiltrationGrid& grid, const AdaptedSeq2D& x) {
  Vec s2 = Vec::Zero(grid.space().size());
  for (const auto& row : x) {
    for (const auto& v : row) {
      if (v.size() != grid.space().size()) throw std::invalid_argument("lhsNorm: size mismatch");
      s2 += v.cwiseAbs2();
    }
  }
  return grid.space().probs().dot(s2.cwiseSqrt());
}

RhsTerms rhsTerms(const FiltrationGrid& grid, const FourTermDecomp& d) {
  requireAdapted(grid, d.A, "rhsObjective[A]");
  requireAdapted(grid, d.B, "rhsObjective[B]");
  requireAdapted(grid, d.C, "rhsObjective[C]");
  requireAdapted(grid, d.D, "rhsObjective[D]");
  const auto norms = decompositionNorms(grid);
  RhsTerms t;
  t.a = norms[0].value(flattenSeq(d.A));
  t.b = norms[1].value(flattenSeq(d.B));
  t.c = norms[2].value(flattenSeq(d.C));
  t.d = norms[3].value(flattenSeq(d.D));
  return t;
}

Scalar rhsObjective(const FiltrationGrid& grid, const FourTermDecomp& d) {
  return rhsTerms(grid, d).total();
}

Scalar rhsObjectiveConvexified(const FiltrationGrid& grid, const FourTermDecomp& d) {
  requireAdapted(grid, d.A, "rhsObjectiveConvexified[A]");
  requireAdapted(grid, d.B, "rhsObjectiveConvexified[B]");
  requireAdapted(grid, d.C, "rhsObjectiveConvexified[C]");
  requireAdapted(grid, d.D, "rhsObjectiveConvexified[D]");
  const auto norms = decompositionNorms(grid);
  Scalar total = 0.0;
  total += convexify(norms[0], 2.0).value(flattenSeq(d.A));
  total += convexify(norms[1], 2.0).value(flattenSeq(d.B));
  total += convexify(norms[2], 2.0).value(flattenSeq(d.C));
  total += convexify(norms[3], 2.0).value(flattenSeq(d.D));
  return total;
}

Scalar iterBRrhs(const FiltrationGrid& grid, const AdaptedSeq2D& z, Scalar q) {
  if (!(q >= 1.0)) throw std::invalid_argument("iterBRrhs: requires q >= 1");
  const FiniteProbSpace& space = grid.space();
  const TermCache cache(grid);
  auto powq = [q](const Vec& v) { return Vec(v.array().max(0.0).pow(q).matrix()); };

  Scalar diag = 0.0;
  Vec both = Vec::Zero(space.size());
  std::vector<Vec> rowGroups(static_cast<std::size_t>(grid.rows()) + 1, Vec::Zero(space.size()));
  std::vector<Vec> colGroups(static_cast<std::size_t>(grid.cols()) + 1, Vec::Zero(space.size()));
  for (Index i = 0; i <= grid.rows(); ++i) {
    for (Index j = 0; j <= grid.cols(); ++j) {
      const Vec& v = z[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (v.size() != space.size()) throw std::invalid_argument("iterBRrhs: size mismatch");
      if (v.minCoeff() < -1e-12) throw std::invalid_argument("iterBRrhs: entries must be nonnegative");
      const std::size_t k = cache.flat(i, j);
      diag += space.probs().dot(powq(v));
      both += condExpect(space, cache.prevCell[k], v);
      rowGroups[static_cast<std::size_t>(i)] +=
          condExpect(space, cache.colPrev[static_cast<std::size_t>(j)], v);
      colGroups[static_cast<std::size_t>(j)] +=
          condExpect(space, cache.rowPrev[static_cast<std::size_t>(i)], v);
    }
  }
  Scalar total = diag + space.probs().dot(powq(both));
  for (const auto& g : rowGroups) total += space.probs().dot(powq(g));
  for (const auto& g : colGroups) total += space.probs().dot(powq(g));
  return total;
}

std::pair<FourTermDecomp, SolverReport> solveDecomposition(const FiltrationGrid& grid,
                                                           const AdaptedSeq2D& x,
                                                           const DecompParams& params) {
  if (!grid.certifiedF4()) {
    throw std::invalid_argument("solveDecomposition: grid must be (F4)-certified");
  }
  requireAdapted(grid, x, "solveDecomposition");

  const auto norms = decompositionNorms(grid);
  const auto cache = std::make_shared<const TermCache>(grid);

  SumNormParams sp;
  sp.maxIter = params.maxIter;
  sp.tol = params.tol;
  sp.window = params.window;
  sp.seed = params.seed;
  sp.initPart = 1;  // B = X
  sp.project = [cache](Index k, const Vec& v) {
    return condExpect(cache->space, cache->cell[static_cast<std::size_t>(k)], v);
  };

  const SumNormResult res = interpolationSumNorm(
      grid.space(), {norms[0], norms[1], norms[2], norms[3]}, flattenSeq(x), sp);

  FourTermDecomp d;
  d.A = unflattenSeq(grid, res.parts[0]);
  d.B = unflattenSeq(grid, res.parts[1]);
  d.C = unflattenSeq(grid, res.parts[2]);
  d.D = unflattenSeq(grid, res.parts[3]);

  SolverReport report;
  report.objective = res.value;
  report.iterations = res.iterations;
  report.converged = res.converged;
  Scalar sumResidual = 0.0;
  for (Index i = 0; i <= grid.rows(); ++i) {
    for (Index j = 0; j <= grid.cols(); ++j) {
      const std::size_t si = static_cast<std::size_t>(i);
      const std::size_t sj = static_cast<std::size_t>(j);
      sumResidual = std::max(
          sumResidual, (d.A[si][sj] + d.B[si][sj] + d.C[si][sj] + d.D[si][sj] - x[si][sj])
                           .cwiseAbs()
                           .maxCoeff());
    }
  }
  report.sumResidual = sumResidual;
  report.adaptednessResidual =
      std::max(std::max(adaptednessResidual(grid, d.A), adaptednessResidual(grid, d.B)),
               std::max(adaptednessResidual(grid, d.C), adaptednessResidual(grid, d.D)));
  return {std::move(d), report};
}

FourTermDecomp deltaProject(const FiltrationGrid& grid, const FourTermDecomp& d) {
  auto projectPiece = [&grid](const AdaptedSeq2D& piece) {
    AdaptedSeq2D out = piece;
    for (Index i = 0; i <= grid.rows(); ++i) {
      for (Index j = 0; j <= grid.cols(); ++j) {
        out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            delta2D(grid, i, j, piece[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      }
    }
    return out;
  };
  return {projectPiece(d.A), projectPiece(d.B), projectPiece(d.C), projectPiece(d.D)};
}

DavisResult assembleDavis(const FiltrationGrid& grid, const VecRef& f, const DecompParams& params) {
  const FiniteProbSpace& space = grid.space();
  const Partition& top = grid.part(grid.rows(), grid.cols());
  const Scalar scale = std::max(1.0, f.cwiseAbs().maxCoeff());
  if ((f - condExpect(space, top, f)).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument(
        "assembleDavis: f must be measurable w.r.t. the top grid sigma-algebra");
  }

  const AdaptedSeq2D x = allDeltas(grid, f);
  auto [decomp, report] = solveDecomposition(grid, x, params);

  DavisResult out;
  out.projected = deltaProject(grid, decomp);
  out.solver = report;
  out.terms = rhsTerms(grid, out.projected);

  auto sumPiece = [&space](const AdaptedSeq2D& piece) {
    Vec total = Vec::Zero(space.size());
    for (const auto& row : piece) {
      for (const auto& v : row) total += v;
    }
    return total;
  };
  out.A = sumPiece(out.projected.A);
  out.B = sumPiece(out.projected.B);
  out.C = sumPiece(out.projected.C);
  out.D = sumPiece(out.projected.D);
  out.reconstructionResidual = (f - (out.A + out.B + out.C + out.D)).cwiseAbs().maxCoeff();
  return out;
}

ChainReport verifyCorollaryChain(const FiltrationGrid& grid, const VecRef& f,
                                 const DavisResult& davis) {
  const FiniteProbSpace& space = grid.space();
  const Index rows = grid.rows();
  const Index cols = grid.cols();
  const auto norms = decompositionNorms(grid);

  std::vector<Partition> rowChain, colChain;
  for (Index i = 0; i <= rows; ++i) rowChain.push_back(rowSigma(grid, i));
  for (Index j = 0; j <= cols; ++j) colChain.push_back(colSigma(grid, j));

  ChainReport rep;

  // A: telescoping maximal bound, exact.
  Scalar aSum = 0.0;
  for (const auto& row : davis.projected.A) {
    for (const auto& v : row) aSum += space.probs().dot(v.cwiseAbs());
  }
  const Scalar aH1M = space.expectation(maximalFn(grid, davis.A));
  rep.aTelescoping = {aSum, aH1M, aSum - aH1M};

  // B: the cited Brossard step; empirical ratio only.
  rep.bTerm = norms[1].value(flattenSeq(davis.projected.B));
  rep.bH1M = space.expectation(maximalFn(grid, davis.B));
  rep.bBrossardRatio = rep.bTerm > 0.0 ? rep.bH1M / rep.bTerm : 0.0;

  // One-parameter chains for C (rows outer) and D (columns outer).
  auto oneParamChain = [&](const Vec& assembled, bool outerIsRow, Scalar term, Scalar& h1sSum,
                           Scalar& h1mSum, Scalar& identityResidual, Scalar& ratio,
                           ChainStep& supSwap, ChainStep& final) {
    const auto& outerChain = outerIsRow ? rowChain : colChain;
    const auto& innerChain = outerIsRow ? colChain : rowChain;
    const Index outerCount = static_cast<Index>(outerChain.size());

    h1sSum = 0.0;
    h1mSum = 0.0;
    Vec supOfSums = Vec::Zero(space.size());   // sup over inner of sum over outer
    Vec sumOfSups = Vec::Zero(space.size());   // sum over outer of sup over inner
    std::vector<Vec> innerAbs(innerChain.size(), Vec::Zero(space.size()));

    for (Index o = 0; o < outerCount; ++o) {
      Vec marginalDelta = condExpect(space, outerChain[static_cast<std::size_t>(o)], assembled);
      if (o > 0) {
        marginalDelta -= condExpect(space, outerChain[static_cast<std::size_t>(o - 1)], assembled);
      }
      const HardyNorms h = hardyNorms1D(space, innerChain, marginalDelta);
      h1sSum += h.h1s;
      h1mSum += h.h1M;
      Vec sup = Vec::Zero(space.size());
      for (std::size_t n = 0; n < innerChain.size(); ++n) {
        const Vec proj = condExpect(space, innerChain[n], marginalDelta).cwiseAbs();
        sup = sup.cwiseMax(proj);
        innerAbs[n] += proj;
      }
      sumOfSups += sup;
    }
    for (const auto& v : innerAbs) supOfSums = supOfSums.cwiseMax(v);

    identityResidual = std::abs(term - h1sSum);
    ratio = h1sSum > 0.0 ? h1mSum / h1sSum : 0.0;
    const Scalar lhsSwap = space.expectation(sumOfSups);
    const Scalar rhsSwap = space.expectation(supOfSums);
    supSwap = {lhsSwap, rhsSwap, lhsSwap - rhsSwap};
    const Scalar h1mGrid = space.expectation(maximalFn(grid, assembled));
    final = {rhsSwap, h1mGrid, rhsSwap - h1mGrid};
  };

  rep.cTerm = norms[2].value(flattenSeq(davis.projected.C));
  oneParamChain(davis.C, /*outerIsRow=*/true, rep.cTerm, rep.cH1sSum, rep.cH1MSum,
                rep.cIdentityResidual, rep.cOneParamRatio, rep.cSupSwap, rep.cFinal);

  rep.dTerm = norms[3].value(flattenSeq(davis.projected.D));
  oneParamChain(davis.D, /*outerIsRow=*/false, rep.dTerm, rep.dH1sSum, rep.dH1MSum,
                rep.dIdentityResidual, rep.dOneParamRatio, rep.dSupSwap, rep.dFinal);

  const HardyNorms h = hardyNorms(grid, f);
  rep.h1S = h.h1S;
  rep.h1M = h.h1M;
  rep.finalRatio = h.h1S > 0.0 ? h.h1M / h.h1S : 0.0;

  rep.minSlack = std::min({rep.aTelescoping.slack, rep.cSupSwap.slack, rep.cFinal.slack,
                           rep.dSupSwap.slack, rep.dFinal.slack});
  rep.exactStepsOk = rep.minSlack >= -1e-10;
  return rep;
}

}  // namespace martlab

#include "martlab/experiments.hpp"

#include "martlab/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace martlab {

BrTriple brCheck(const FiniteProbSpace& space, const Filtration1D& filt, const VecRef& f,
                 Scalar p) {
  if (!(p >= 2.0)) throw std::invalid_argument("brCheck: requires p >= 2");
  const auto deltas = allDeltas1D(space, filt.parts(), f);
  BrTriple out;
  out.lhs = lpNorm(space, f, p);
  Scalar diag = 0.0;
  for (const auto& d : deltas) {
    diag += (space.probs().array() * d.array().abs().pow(p)).sum();
  }
  out.rhsDiag = std::pow(diag, 1.0 / p);
  out.rhsCond = lpNorm(space, condSquareFn1D(space, filt.parts(), f), p);
  return out;
}

RademacherTensor rademacherTensor(const FiniteProbSpace& space, const std::vector<Vec>& y,
                                  Index atomCap) {
  const std::size_t n = y.size();
  for (const auto& yk : y) {
    if (yk.size() != space.size()) throw std::invalid_argument("rademacherTensor: size mismatch");
    if (yk.minCoeff() < -1e-12) {
      throw std::invalid_argument("rademacherTensor: Y_k must be nonnegative");
    }
  }
  if (n >= 63 || space.size() > (atomCap >> n)) {
    throw std::invalid_argument("rademacherTensor: tensor atom count exceeds cap");
  }

  const Index base = space.size();
  const Index copies = Index{1} << n;
  const Index atoms = base * copies;

  Vec probs(atoms);
  for (Index w = 0; w < base; ++w) {
    for (Index t = 0; t < copies; ++t) {
      probs[w * copies + t] = space.prob(w) / static_cast<Scalar>(copies);
    }
  }
  FiniteProbSpace tensorSpace{probs / probs.sum()};

  // Base filtration F_k generated by Y_1..Y_k; keeps Y adapted by construction.
  std::vector<Partition> baseParts;
  baseParts.push_back(Partition::trivial(base));
  for (std::size_t k = 0; k < n; ++k) {
    baseParts.push_back(join(baseParts.back(), Partition::levelSets(y[k])));
  }

  std::vector<Partition> parts;
  for (std::size_t k = 0; k <= n; ++k) {
    const Index mask = (Index{1} << k) - 1;
    std::vector<int> labels(static_cast<std::size_t>(atoms));
    for (Index w = 0; w < base; ++w) {
      for (Index t = 0; t < copies; ++t) {
        labels[static_cast<std::size_t>(w * copies + t)] =
            static_cast<int>(baseParts[k].block(w) * copies + (t & mask));
      }
    }
    parts.emplace_back(labels);
  }

  Vec f = Vec::Zero(atoms);
  std::vector<Vec> lifted(n, Vec::Zero(atoms));
  for (Index w = 0; w < base; ++w) {
    for (Index t = 0; t < copies; ++t) {
      const Index atom = w * copies + t;
      for (std::size_t k = 0; k < n; ++k) {
        const Scalar r = ((t >> k) & 1) ? -1.0 : 1.0;
        const Scalar yk = std::max(y[k][w], 0.0);
        lifted[k][atom] = yk;
        f[atom] += std::sqrt(yk) * r;
      }
    }
  }

  return {std::move(tensorSpace), Filtration1D(std::move(parts)), std::move(f), std::move(lifted)};
}

BrTriple brAdaptedCheck(const FiniteProbSpace& space, const Filtration1D& filt,
                        const std::vector<Vec>& y, Scalar q) {
  if (!(q >= 1.0)) throw std::invalid_argument("brAdaptedCheck: requires q >= 1");
  if (y.size() != filt.parts().size()) {
    throw std::invalid_argument("brAdaptedCheck: Y must be indexed like the filtration");
  }
  Vec total = Vec::Zero(space.size());
  Vec condTotal = Vec::Zero(space.size());
  Scalar diag = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (y[k].size() != space.size()) throw std::invalid_argument("brAdaptedCheck: size mismatch");
    if (y[k].minCoeff() < -1e-12) {
      throw std::invalid_argument("brAdaptedCheck: Y_k must be nonnegative");
    }
    const Scalar scale = std::max(1.0, y[k].cwiseAbs().maxCoeff());
    if ((y[k] - condExpect(space, filt.part(static_cast<Index>(k)), y[k])).cwiseAbs().maxCoeff() >
        1e-9 * scale) {
      throw std::invalid_argument("brAdaptedCheck: Y_k is not adapted");
    }
    total += y[k];
    condTotal += condExpect(space, filt.part(static_cast<Index>(k > 0 ? k - 1 : 0)), y[k]);
    diag += (space.probs().array() * y[k].array().max(0.0).pow(q)).sum();
  }
  BrTriple out;
  out.lhs = (space.probs().array() * total.array().max(0.0).pow(q)).sum();
  out.rhsDiag = diag;
  out.rhsCond = (space.probs().array() * condTotal.array().max(0.0).pow(q)).sum();
  return out;
}

IterBrPair iterBRCheck(const FiltrationGrid& grid, const AdaptedSeq2D& z, Scalar q) {
  if (!isAdapted(grid, z)) throw std::invalid_argument("iterBRCheck: Z is not adapted");
  Vec total = Vec::Zero(grid.space().size());
  for (const auto& row : z) {
    for (const auto& v : row) {
      if (v.minCoeff() < -1e-12) {
        throw std::invalid_argument("iterBRCheck: entries must be nonnegative");
      }
      total += v;
    }
  }
  IterBrPair out;
  out.lhs = (grid.space().probs().array() * total.array().max(0.0).pow(q)).sum();
  out.rhs = iterBRrhs(grid, z, q);
  return out;
}

const char* samplerName(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Gaussian: return "gaussian";
    case SamplerKind::Sparse: return "sparse";
    case SamplerKind::Adversarial: return "adversarial";
  }
  return "unknown";
}

namespace {

std::vector<Index> drawSizes(Rng& rng, Index maxFactors, Index minSize, Index maxSize) {
  const Index count = 1 + rng.uniformInt(maxFactors);
  std::vector<Index> sizes(static_cast<std::size_t>(count));
  for (auto& s : sizes) s = minSize + rng.uniformInt(maxSize - minSize + 1);
  return sizes;
}

Vec gaussianCentered(Rng& rng, const FiniteProbSpace& space) {
  Vec f(space.size());
  for (Index w = 0; w < f.size(); ++w) f[w] = rng.normal();
  f.array() -= space.expectation(f);
  return f;
}

Vec sparseBumps(Rng& rng, const FiniteProbSpace& space) {
  Vec f = Vec::Zero(space.size());
  const Index bumps = 1 + rng.uniformInt(3);
  for (Index b = 0; b < bumps; ++b) {
    f[rng.uniformInt(space.size())] += 2.0 * rng.normal();
  }
  return f;
}

Vec adversarialSearch(Rng& rng, const FiltrationGrid& grid) {
  // Coordinate random search pushing the h1M/h1S ratio up; 50 accepted-or-not
  // steps from a Gaussian start.
  const FiniteProbSpace& space = grid.space();
  Vec f = gaussianCentered(rng, space);
  auto ratioOf = [&](const Vec& g) {
    const HardyNorms h = hardyNorms(grid, g);
    return h.h1S > 1e-12 ? h.h1M / h.h1S : 0.0;
  };
  Scalar best = ratioOf(f);
  for (int step = 0; step < 50; ++step) {
    const Index atom = rng.uniformInt(space.size());
    const Scalar bump = 0.5 * std::max(1.0, f.cwiseAbs().maxCoeff()) * rng.normal();
    Vec candidate = f;
    candidate[atom] += bump;
    const Scalar r = ratioOf(candidate);
    if (r > best) {
      best = r;
      f = std::move(candidate);
    }
  }
  return f;
}

}  // namespace

Instance makeInstance(const CorpusParams& params, Index id) {
  const std::uint64_t seed = deriveSeed(params.seed, static_cast<std::uint64_t>(id));
  Rng rng(seed);

  RandomGridParams gp;
  gp.rowFactorSizes = drawSizes(rng, params.maxRowFactors, params.minFactorSize, params.maxFactorSize);
  gp.colFactorSizes = drawSizes(rng, params.maxColFactors, params.minFactorSize, params.maxFactorSize);
  gp.probDirichletAlpha = params.probDirichletAlpha;
  gp.atomCap = params.atomCap;
  auto [space, grid] = randomGrid(rng.nextU64(), gp);

  const SamplerKind kind = (id % 5 <= 2)   ? SamplerKind::Gaussian
                           : (id % 5 == 3) ? SamplerKind::Sparse
                                           : SamplerKind::Adversarial;
  Vec f;
  switch (kind) {
    case SamplerKind::Gaussian: f = gaussianCentered(rng, space); break;
    case SamplerKind::Sparse: f = sparseBumps(rng, space); break;
    case SamplerKind::Adversarial: f = adversarialSearch(rng, grid); break;
  }
  return {id, seed, std::move(space), std::move(grid), std::move(f), kind};
}

void parallelFor(Index n, Index threads, const std::function<void(Index)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  const Index workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const Index i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

RatioReport davisRatioSearch(const CorpusParams& params, Index threads) {
  RatioReport report;
  report.rows.resize(static_cast<std::size_t>(params.instances));

  parallelFor(params.instances, threads, [&](Index id) {
    const Instance inst = makeInstance(params, id);
    RatioRow row;
    row.id = id;
    row.seed = inst.seed;
    row.atoms = inst.space.size();
    row.rows = inst.grid.rows();
    row.cols = inst.grid.cols();
    row.sampler = inst.sampler;

    if (lpNorm(inst.space, inst.f, 1.0) <= 1e-14) {
      row.degenerate = true;
      report.rows[static_cast<std::size_t>(id)] = row;
      return;
    }

    row.norms = hardyNorms(inst.grid, inst.f);
    row.mOverS = row.norms.h1M / row.norms.h1S;
    row.sOverLittleS = row.norms.h1S / row.norms.h1s;
    row.mOverLittleS = row.norms.h1M / row.norms.h1s;

    std::vector<Partition> rowChain, colChain;
    for (Index i = 0; i <= inst.grid.rows(); ++i) rowChain.push_back(rowSigma(inst.grid, i));
    for (Index j = 0; j <= inst.grid.cols(); ++j) colChain.push_back(colSigma(inst.grid, j));
    const HardyNorms hr = hardyNorms1D(inst.space, rowChain, inst.f);
    const HardyNorms hc = hardyNorms1D(inst.space, colChain, inst.f);
    row.davisRow = hr.h1M / hr.h1S;
    row.davisCol = hc.h1M / hc.h1S;

    report.rows[static_cast<std::size_t>(id)] = row;
  });

  report.maxMOverS = 0.0;
  report.worstId = -1;
  report.minDavis = std::numeric_limits<Scalar>::infinity();
  report.maxDavis = 0.0;
  for (const auto& row : report.rows) {
    if (row.degenerate) {
      ++report.skipped;
      continue;
    }
    if (row.mOverS > report.maxMOverS) {
      report.maxMOverS = row.mOverS;
      report.worstId = row.id;
    }
    report.maxSOverLittleS = std::max(report.maxSOverLittleS, row.sOverLittleS);
    report.maxMOverLittleS = std::max(report.maxMOverLittleS, row.mOverLittleS);
    report.minDavis = std::min({report.minDavis, row.davisRow, row.davisCol});
    report.maxDavis = std::max({report.maxDavis, row.davisRow, row.davisCol});
  }
  if (!std::isfinite(report.minDavis)) report.minDavis = 0.0;

  std::vector<Scalar> sorted;
  sorted.reserve(report.rows.size());
  for (const auto& row : report.rows) {
    if (!row.degenerate) sorted.push_back(row.mOverS);
  }
  std::sort(sorted.begin(), sorted.end());
  if (!sorted.empty()) {
    report.medianMOverS = sorted[sorted.size() / 2];
    report.p90MOverS = sorted[(sorted.size() * 9) / 10];
  }
  return report;
}

namespace {

/// Product one-parameter filtration plus its space, for the 1D suites.
std::pair<FiniteProbSpace, Filtration1D> random1DFiltration(Rng& rng, const CorpusParams& params) {
  RandomGridParams gp;
  gp.rowFactorSizes =
      drawSizes(rng, std::max<Index>(params.maxRowFactors, 2), params.minFactorSize, params.maxFactorSize);
  gp.probDirichletAlpha = params.probDirichletAlpha;
  gp.atomCap = params.atomCap;
  auto [space, grid] = randomGrid(rng.nextU64(), gp);
  std::vector<Partition> parts;
  for (Index i = 0; i <= grid.rows(); ++i) parts.push_back(grid.part(i, 0));
  return {std::move(space), Filtration1D(std::move(parts))};
}

}  // namespace

std::vector<BrSuiteRow> brSuite(const CorpusParams& params, Scalar p, Scalar q, Index threads) {
  std::vector<BrSuiteRow> rows(static_cast<std::size_t>(params.instances));
  parallelFor(params.instances, threads, [&](Index id) {
    const std::uint64_t seed = deriveSeed(params.seed ^ 0x6272u, static_cast<std::uint64_t>(id));
    Rng rng(seed);
    BrSuiteRow row;
    row.id = id;
    row.seed = seed;
    row.p = p;
    row.q = q;

    {
      auto [space, filt] = random1DFiltration(rng, params);
      const Vec f = gaussianCentered(rng, space);
      const BrTriple t = brCheck(space, filt, f, p);
      row.brLhs = t.lhs;
      row.brDiag = t.rhsDiag;
      row.brCond = t.rhsCond;
      row.brRatio = t.lhs / std::max(t.rhsDiag + t.rhsCond, 1e-300);
    }

    {
      auto [space, filt] = random1DFiltration(rng, params);
      std::vector<Vec> y(filt.parts().size());
      for (std::size_t k = 0; k < y.size(); ++k) {
        Vec raw(space.size());
        for (Index w = 0; w < space.size(); ++w) raw[w] = std::abs(rng.normal());
        y[k] = condExpect(space, filt.part(static_cast<Index>(k)), raw);
      }
      const BrTriple t = brAdaptedCheck(space, filt, y, q);
      row.adLhs = t.lhs;
      row.adDiag = t.rhsDiag;
      row.adCond = t.rhsCond;
      row.adRatio = t.lhs / std::max(t.rhsDiag + t.rhsCond, 1e-300);
    }

    {
      RandomGridParams gp;
      gp.rowFactorSizes = drawSizes(rng, params.maxRowFactors, params.minFactorSize, params.maxFactorSize);
      gp.colFactorSizes = drawSizes(rng, params.maxColFactors, params.minFactorSize, params.maxFactorSize);
      gp.probDirichletAlpha = params.probDirichletAlpha;
      gp.atomCap = params.atomCap;
      auto [space, grid] = randomGrid(rng.nextU64(), gp);
      AdaptedSeq2D z = zeroSeq(grid);
      for (Index i = 0; i <= grid.rows(); ++i) {
        for (Index j = 0; j <= grid.cols(); ++j) {
          Vec raw(space.size());
          for (Index w = 0; w < space.size(); ++w) raw[w] = std::abs(rng.normal());
          z[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
              condExpect(space, grid.part(i, j), raw);
        }
      }
      const IterBrPair pr = iterBRCheck(grid, z, q);
      row.iterLhs = pr.lhs;
      row.iterRhs = pr.rhs;
      row.iterRatio = pr.lhs / std::max(pr.rhs, 1e-300);
    }

    {
      // Tensor identity E (sum Y)^{p/2} = E (sum |delta f|^2)^{p/2} at p = 2q.
      const Index baseAtoms = 2 + rng.uniformInt(5);
      Vec w(baseAtoms);
      for (Index a = 0; a < baseAtoms; ++a) w[a] = 0.05 + rng.uniform();
      w /= w.sum();
      FiniteProbSpace base{w};
      const std::size_t n = 1 + static_cast<std::size_t>(rng.uniformInt(3));
      std::vector<Vec> y(n);
      for (auto& yk : y) {
        yk = Vec(baseAtoms);
        for (Index a = 0; a < baseAtoms; ++a) yk[a] = std::abs(rng.normal());
      }
      const RademacherTensor tensor = rademacherTensor(base, y);
      const Scalar pTensor = 2.0 * q;
      Vec sumY = Vec::Zero(baseAtoms);
      for (const auto& yk : y) sumY += yk;
      const Scalar lhs = (base.probs().array() * sumY.array().pow(pTensor / 2.0)).sum();
      const Vec sq = squareFn1D(tensor.space, tensor.filt.parts(), tensor.f);
      const Scalar rhs = (tensor.space.probs().array() * sq.array().pow(pTensor)).sum();
      row.tensorResidual = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
    }

    rows[static_cast<std::size_t>(id)] = row;
  });
  return rows;
}

std::vector<DualityRow> dualitySuite(const CorpusParams& params, Scalar p, Scalar q,
                                     Index threads) {
  std::vector<DualityRow> rows(static_cast<std::size_t>(params.instances));
  parallelFor(params.instances, threads, [&](Index id) {
    const std::uint64_t seed = deriveSeed(params.seed ^ 0xd41u, static_cast<std::uint64_t>(id));
    Rng rng(seed);
    DualityRow row;
    row.id = id;
    row.seed = seed;
    row.p = p;
    row.q = q;

    RandomGridParams gp;
    gp.rowFactorSizes = drawSizes(rng, params.maxRowFactors, params.minFactorSize, params.maxFactorSize);
    gp.colFactorSizes = drawSizes(rng, params.maxColFactors, params.minFactorSize, params.maxFactorSize);
    gp.probDirichletAlpha = params.probDirichletAlpha;
    gp.atomCap = params.atomCap;
    auto [space, grid] = randomGrid(rng.nextU64(), gp);

    AdaptedFamily fam{space, {}, {}, {}};
    for (Index i = 0; i <= grid.rows(); ++i) {
      for (Index j = 0; j <= grid.cols(); ++j) {
        Vec raw(space.size());
        for (Index w = 0; w < space.size(); ++w) raw[w] = rng.normal();
        fam.X.push_back(condExpect(space, grid.part(i, j), raw));
        fam.U.push_back(grid.part(std::max<Index>(i - 1, 0), std::max<Index>(j - 1, 0)));
        fam.V.push_back(grid.part(i, j));
      }
    }

    const ExponentPair e(p, q);
    const ExponentPair eff = e.p > e.q ? ExponentPair(e.pPrime, e.qPrime) : e;
    const AdaptedFamily witness = dualWitness(fam, eff);
    row.normV = mixedNorm(fam, eff.p, eff.q);
    row.normW = mixedNorm(witness, eff.pPrime, eff.qPrime);
    row.pairingValue = pairing(space, fam.X, witness.X);

    Vec sPow = Vec::Zero(space.size());
    for (std::size_t k = 0; k < fam.X.size(); ++k) {
      sPow += condExpect(space, fam.U[k], fam.X[k].array().abs().pow(eff.p).matrix());
    }
    const Scalar esq = (space.probs().array() * sPow.array().pow(eff.q / eff.p)).sum();
    row.witnessResidual = std::abs(row.pairingValue - esq) / std::max(std::abs(esq), 1e-300);

    row.defectLower = dualityDefect(fam, e).lower;
    row.holderSlack = row.normV * row.normW - row.pairingValue;
    row.embeddingRatio = row.normV / std::max(plainMixedNorm(fam, eff.p, eff.q), 1e-300);

    rows[static_cast<std::size_t>(id)] = row;
  });
  return rows;
}

}  // namespace martlab

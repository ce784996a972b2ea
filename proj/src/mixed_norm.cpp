#include "martlab/mixed_norm.hpp"

#include <cmath>

namespace martlab {

namespace {

Vec signOf(const Vec& x) {
  return x.array().sign().matrix();
}

bool measurable(const FiniteProbSpace& space, const Partition& p, const Vec& x, Scalar tol) {
  const Scalar scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  return (x - condExpect(space, p, x)).cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace

void validateFamily(const AdaptedFamily& fam, bool requireNested) {
  const std::size_t n = fam.X.size();
  if (n == 0) throw std::invalid_argument("AdaptedFamily: empty index set");
  if (fam.U.size() != n || fam.V.size() != n) {
    throw std::invalid_argument("AdaptedFamily: index sets of X, U, V differ");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (fam.X[k].size() != fam.space.size() || fam.U[k].size() != fam.space.size() ||
        fam.V[k].size() != fam.space.size()) {
      throw std::invalid_argument("AdaptedFamily: size mismatch");
    }
    if (!measurable(fam.space, fam.V[k], fam.X[k], 1e-9)) {
      throw std::invalid_argument("AdaptedFamily: X_k is not V_k-measurable");
    }
    if (requireNested && !refines(fam.V[k], fam.U[k])) {
      throw std::invalid_argument("AdaptedFamily: sigma(U_k) not contained in sigma(V_k)");
    }
  }
}

ExponentPair::ExponentPair(Scalar pIn, Scalar qIn) : p(pIn), q(qIn) {
  if (!(p > 1.0) || !(q > 1.0) || std::isinf(p) || std::isinf(q)) {
    throw std::invalid_argument("ExponentPair: exponents must lie in (1, inf)");
  }
  pPrime = p / (p - 1.0);
  qPrime = q / (q - 1.0);
}

namespace {

Scalar innerSum(const AdaptedFamily& fam, Scalar p, Vec& out) {
  // out = sum_k E_{U_k}|X_k|^p (or the sup-analogue at p = inf); returns p.
  const FiniteProbSpace& space = fam.space;
  if (std::isinf(p)) {
    out = Vec::Zero(space.size());
    bool first = true;
    for (std::size_t k = 0; k < fam.X.size(); ++k) {
      Vec v = condMax(space, fam.U[k], fam.X[k].cwiseAbs());
      out = first ? v : Vec(out.cwiseMax(v));
      first = false;
    }
    return p;
  }
  out = Vec::Zero(space.size());
  for (std::size_t k = 0; k < fam.X.size(); ++k) {
    out += condExpect(space, fam.U[k], fam.X[k].array().abs().pow(p).matrix());
  }
  return p;
}

}  // namespace

Scalar mixedNorm(const AdaptedFamily& fam, Scalar p, Scalar q) {
  validateFamily(fam, /*requireNested=*/false);
  if (std::isnan(p) || std::isnan(q) || p < 1.0 || q < 1.0) {
    throw std::invalid_argument("mixedNorm: exponents must satisfy p, q >= 1");
  }
  Vec inner;
  innerSum(fam, p, inner);
  const Vec perAtom = std::isinf(p) ? inner : Vec(inner.array().pow(1.0 / p).matrix());
  return lpNorm(fam.space, perAtom, q);
}

Scalar mixedNorm(const AdaptedFamily& fam, const ExponentPair& e) {
  return mixedNorm(fam, e.p, e.q);
}

Scalar plainMixedNorm(const AdaptedFamily& fam, Scalar p, Scalar q) {
  validateFamily(fam, /*requireNested=*/false);
  const FiniteProbSpace& space = fam.space;
  Vec inner = Vec::Zero(space.size());
  if (std::isinf(p)) {
    for (const auto& x : fam.X) inner = inner.cwiseMax(x.cwiseAbs());
    return lpNorm(space, inner, q);
  }
  for (const auto& x : fam.X) inner += x.array().abs().pow(p).matrix();
  return lpNorm(space, inner.array().pow(1.0 / p).matrix(), q);
}

std::pair<Scalar, Scalar> holderExponents(const ExponentPair& e) {
  if (!(e.p < e.q)) {
    throw std::invalid_argument("holderExponents: requires p < q");
  }
  const Scalar invAlpha = e.qPrime * e.p / (e.q * e.pPrime);
  const Scalar invBeta = (e.q - e.p) * e.qPrime / e.q;
  return {1.0 / invAlpha, 1.0 / invBeta};
}

AdaptedFamily dualWitness(const AdaptedFamily& fam, const ExponentPair& e) {
  validateFamily(fam, /*requireNested=*/true);
  if (e.p > e.q) {
    throw std::invalid_argument("dualWitness: requires p <= q (swap the roles for p > q)");
  }
  const FiniteProbSpace& space = fam.space;
  Vec sPow;  // s^p = sum_j E_{U_j}|X_j|^p
  innerSum(fam, e.p, sPow);
  if (sPow.maxCoeff() <= 0.0) {
    throw std::invalid_argument("dualWitness: X must not vanish identically");
  }
  const Vec s = sPow.array().pow(1.0 / e.p).matrix();
  const Vec sQmP = s.array().pow(e.q - e.p).matrix();

  AdaptedFamily out{fam.space, AdaptedSeq(fam.X.size()), fam.U, fam.V};
  for (std::size_t k = 0; k < fam.X.size(); ++k) {
    const Vec mod = fam.X[k].array().abs().pow(e.p - 1.0).matrix();
    out.X[k] = mod.cwiseProduct(condExpect(space, fam.U[k], sQmP)).cwiseProduct(signOf(fam.X[k]));
  }
  return out;
}

Scalar pairing(const FiniteProbSpace& space, const AdaptedSeq& x, const AdaptedSeq& y) {
  if (x.size() != y.size()) throw std::invalid_argument("pairing: index sets differ");
  Scalar total = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k].size() != space.size() || y[k].size() != space.size()) {
      throw std::invalid_argument("pairing: size mismatch");
    }
    total += space.expectation(x[k].cwiseProduct(y[k]));
  }
  return total;
}

DualityDefect dualityDefect(const AdaptedFamily& fam, const ExponentPair& e) {
  DualityDefect out;
  ExponentPair eff = e;
  if (e.p > e.q) {
    eff = ExponentPair(e.pPrime, e.qPrime);
    out.swapped = true;
  }
  const AdaptedFamily witness = dualWitness(fam, eff);
  const Scalar normV = mixedNorm(fam, eff.p, eff.q);
  const Scalar normW = mixedNorm(witness, eff.pPrime, eff.qPrime);
  const Scalar pair = pairing(fam.space, fam.X, witness.X);
  out.lower = pair / (normV * normW);
  out.upper = 1.0 - out.lower;
  return out;
}

SeqNorm convexify(const SeqNorm& base, Scalar alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("convexify: alpha must be positive");
  SeqNorm out;
  out.value = [base, alpha](const AdaptedSeq& x) {
    AdaptedSeq powed(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      powed[k] = x[k].array().abs().pow(alpha).matrix();
    }
    return std::pow(base.value(powed), 1.0 / alpha);
  };
  out.subgrad = [base, alpha](const AdaptedSeq& x) {
    AdaptedSeq powed(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      powed[k] = x[k].array().abs().pow(alpha).matrix();
    }
    const Scalar v = base.value(powed);
    AdaptedSeq g(x.size());
    if (v <= 0.0) {
      for (std::size_t k = 0; k < x.size(); ++k) g[k] = Vec::Zero(x[k].size());
      return g;
    }
    const Scalar outer = std::pow(v, 1.0 / alpha - 1.0);
    const AdaptedSeq inner = base.subgrad(powed);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const Vec chain =
          x[k].array().abs().pow(alpha - 1.0).matrix().cwiseProduct(signOf(x[k]));
      g[k] = outer * inner[k].cwiseProduct(chain);
    }
    return g;
  };
  return out;
}

Scalar intersectionNorm(const std::vector<SeqNorm>& norms, const AdaptedSeq& x) {
  if (norms.empty()) throw std::invalid_argument("intersectionNorm: no evaluators");
  Scalar total = 0.0;
  for (const auto& n : norms) total += n.value(x);
  return total;
}

namespace {

AdaptedSeq zerosLike(const AdaptedSeq& x) {
  AdaptedSeq out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = Vec::Zero(x[k].size());
  return out;
}

}  // namespace

SumNormResult interpolationSumNorm(const FiniteProbSpace& space, const std::vector<SeqNorm>& norms,
                                   const AdaptedSeq& x, const SumNormParams& params) {
  const std::size_t m = norms.size();
  if (m == 0) throw std::invalid_argument("interpolationSumNorm: no evaluators");

  SumNormResult result;
  if (m == 1) {
    result.value = norms[0].value(x);
    result.parts = {x};
    result.converged = true;
    return result;
  }

  auto project = [&](std::size_t /*part*/, AdaptedSeq& seq) {
    if (!params.project) return;
    for (std::size_t k = 0; k < seq.size(); ++k) {
      seq[k] = params.project(static_cast<Index>(k), seq[k]);
    }
  };

  // Single-term candidates: all of x carried by one evaluator. They are
  // feasible, so the result can never be worse than the best of them.
  Scalar bestObj = std::numeric_limits<Scalar>::infinity();
  std::size_t bestCandidate = 0;
  for (std::size_t c = 0; c < m; ++c) {
    const Scalar v = norms[c].value(x);
    if (v < bestObj) {
      bestObj = v;
      bestCandidate = c;
    }
  }
  std::vector<AdaptedSeq> bestParts(m, zerosLike(x));
  bestParts[bestCandidate] = x;

  // Free parts 0..m-2; the last is x minus their sum.
  std::vector<AdaptedSeq> parts(m - 1, zerosLike(x));
  const std::size_t init =
      params.initPart >= 0 && params.initPart < static_cast<Index>(m - 1)
          ? static_cast<std::size_t>(params.initPart)
          : m;  // m means: leave everything in the eliminated last part
  if (init < m - 1) {
    parts[init] = x;
    project(init, parts[init]);
  }

  auto lastPart = [&]() {
    AdaptedSeq last = x;
    for (const auto& part : parts) {
      for (std::size_t k = 0; k < last.size(); ++k) last[k] -= part[k];
    }
    return last;
  };

  auto objective = [&](const AdaptedSeq& last) {
    Scalar total = norms[m - 1].value(last);
    for (std::size_t c = 0; c + 1 < m; ++c) total += norms[c].value(parts[c]);
    return total;
  };

  AdaptedSeq last = lastPart();
  Scalar current = objective(last);
  if (current < bestObj) {
    bestObj = current;
    for (std::size_t c = 0; c + 1 < m; ++c) bestParts[c] = parts[c];
    bestParts[m - 1] = last;
  }

  const Scalar scale0 = std::max(bestObj, 1e-30);
  Scalar windowStart = bestObj;
  Index iter = 0;
  bool converged = false;
  Scalar residual = std::numeric_limits<Scalar>::infinity();

  for (iter = 1; iter <= params.maxIter; ++iter) {
    const AdaptedSeq gLast = norms[m - 1].subgrad(last);
    std::vector<AdaptedSeq> grads(m - 1);
    Scalar gNormSq = 0.0;
    for (std::size_t c = 0; c + 1 < m; ++c) {
      grads[c] = norms[c].subgrad(parts[c]);
      for (std::size_t k = 0; k < grads[c].size(); ++k) {
        grads[c][k] -= gLast[k];
        gNormSq += (space.probs().array() * grads[c][k].array().square()).sum();
      }
    }
    if (gNormSq <= 1e-28 * scale0 * scale0) {
      converged = true;
      residual = 0.0;
      break;
    }

    // Polyak step against the running best with a vanishing extra gap.
    const Scalar gap = 0.05 * scale0 / std::sqrt(static_cast<Scalar>(iter));
    const Scalar step = (current - bestObj + gap) / gNormSq;
    for (std::size_t c = 0; c + 1 < m; ++c) {
      for (std::size_t k = 0; k < parts[c].size(); ++k) {
        parts[c][k] -= step * grads[c][k];
      }
      project(c, parts[c]);
    }
    last = lastPart();
    current = objective(last);
    if (current < bestObj) {
      bestObj = current;
      for (std::size_t c = 0; c + 1 < m; ++c) bestParts[c] = parts[c];
      bestParts[m - 1] = last;
    }

    if (iter % params.window == 0) {
      residual = (windowStart - bestObj) / std::max(bestObj, 1e-30);
      if (residual < params.tol) {
        converged = true;
        break;
      }
      windowStart = bestObj;
    }
  }

  result.value = bestObj;
  result.parts = std::move(bestParts);
  result.iterations = std::min(iter, params.maxIter);
  result.converged = converged || bestObj <= 1e-30;
  result.residual = std::isinf(residual) ? 0.0 : residual;
  return result;
}

}  // namespace martlab

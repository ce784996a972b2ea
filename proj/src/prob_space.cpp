#include "martlab/prob_space.hpp"

#include <cmath>
#include <numeric>
#include <unordered_map>

namespace martlab {

FiniteProbSpace::FiniteProbSpace(Vec probs) : probs_(std::move(probs)) {
  if (probs_.size() < 1) {
    throw std::invalid_argument("FiniteProbSpace: at least one atom required");
  }
  if (!(probs_.minCoeff() > 0.0)) {
    throw std::invalid_argument("FiniteProbSpace: atom weights must be strictly positive");
  }
  if (std::abs(probs_.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("FiniteProbSpace: atom weights must sum to one");
  }
}

Scalar FiniteProbSpace::expectation(const VecRef& x) const {
  if (x.size() != probs_.size()) {
    throw std::invalid_argument("expectation: size mismatch");
  }
  return probs_.dot(x);
}

FiniteProbSpace FiniteProbSpace::uniform(Index atoms) {
  if (atoms < 1) throw std::invalid_argument("uniform: at least one atom required");
  return FiniteProbSpace(Vec::Constant(atoms, 1.0 / static_cast<Scalar>(atoms)));
}

Partition::Partition(const std::vector<int>& blockOf) {
  if (blockOf.empty()) {
    throw std::invalid_argument("Partition: at least one atom required");
  }
  // Relabel by first occurrence; input labels are treated as opaque keys.
  std::unordered_map<int, int> remap;
  remap.reserve(blockOf.size());
  blockOf_.resize(blockOf.size());
  int next = 0;
  for (std::size_t w = 0; w < blockOf.size(); ++w) {
    auto [it, inserted] = remap.try_emplace(blockOf[w], next);
    if (inserted) ++next;
    blockOf_[w] = it->second;
  }
  blockCount_ = next;
}

Partition Partition::trivial(Index atoms) {
  return Partition(std::vector<int>(static_cast<std::size_t>(atoms), 0));
}

Partition Partition::singletons(Index atoms) {
  std::vector<int> labels(static_cast<std::size_t>(atoms));
  std::iota(labels.begin(), labels.end(), 0);
  return Partition(labels);
}

Partition Partition::levelSets(const VecRef& x) {
  std::unordered_map<Scalar, int> seen;
  std::vector<int> labels(static_cast<std::size_t>(x.size()));
  int next = 0;
  for (Index w = 0; w < x.size(); ++w) {
    const Scalar key = x[w] == 0.0 ? 0.0 : x[w];  // merge signed zeros
    auto [it, inserted] = seen.try_emplace(key, next);
    if (inserted) ++next;
    labels[static_cast<std::size_t>(w)] = it->second;
  }
  return Partition(labels);
}

namespace {

void requireSameSpace(const FiniteProbSpace& space, const Partition& p, const VecRef& x,
                      const char* who) {
  if (p.size() != space.size() || x.size() != space.size()) {
    throw std::invalid_argument(std::string(who) + ": size mismatch");
  }
}

}  // namespace

Vec condExpect(const FiniteProbSpace& space, const Partition& p, const VecRef& x) {
  requireSameSpace(space, p, x, "condExpect");
  const Index n = space.size();
  Vec mass = Vec::Zero(p.blockCount());
  Vec sum = Vec::Zero(p.blockCount());
  for (Index w = 0; w < n; ++w) {
    const int b = p.block(w);
    mass[b] += space.prob(w);
    sum[b] += space.prob(w) * x[w];
  }
  Vec out(n);
  for (Index w = 0; w < n; ++w) {
    const int b = p.block(w);
    out[w] = sum[b] / mass[b];
  }
  return out;
}

Vec condMax(const FiniteProbSpace& space, const Partition& p, const VecRef& x) {
  requireSameSpace(space, p, x, "condMax");
  const Index n = space.size();
  Vec best = Vec::Constant(p.blockCount(), -std::numeric_limits<Scalar>::infinity());
  for (Index w = 0; w < n; ++w) {
    best[p.block(w)] = std::max(best[p.block(w)], x[w]);
  }
  Vec out(n);
  for (Index w = 0; w < n; ++w) out[w] = best[p.block(w)];
  return out;
}

Mat condExpectMatrix(const FiniteProbSpace& space, const Partition& p) {
  if (p.size() != space.size()) {
    throw std::invalid_argument("condExpectMatrix: size mismatch");
  }
  const Index n = space.size();
  Vec mass = Vec::Zero(p.blockCount());
  for (Index w = 0; w < n; ++w) mass[p.block(w)] += space.prob(w);
  Mat m = Mat::Zero(n, n);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      if (p.block(r) == p.block(c)) m(r, c) = space.prob(c) / mass[p.block(r)];
    }
  }
  return m;
}

bool refines(const Partition& p, const Partition& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("refines: partitions live on different spaces");
  }
  std::vector<int> qOfBlock(static_cast<std::size_t>(p.blockCount()), -1);
  for (Index w = 0; w < p.size(); ++w) {
    int& slot = qOfBlock[static_cast<std::size_t>(p.block(w))];
    if (slot < 0) {
      slot = q.block(w);
    } else if (slot != q.block(w)) {
      return false;
    }
  }
  return true;
}

namespace {

int findRoot(std::vector<int>& parent, int a) {
  while (parent[static_cast<std::size_t>(a)] != a) {
    parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
    a = parent[static_cast<std::size_t>(a)];
  }
  return a;
}

void unite(std::vector<int>& parent, int a, int b) {
  a = findRoot(parent, a);
  b = findRoot(parent, b);
  if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
}

}  // namespace

Partition meet(const Partition& p, const Partition& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("meet: partitions live on different spaces");
  }
  const Index n = p.size();
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<int> firstP(static_cast<std::size_t>(p.blockCount()), -1);
  std::vector<int> firstQ(static_cast<std::size_t>(q.blockCount()), -1);
  for (Index w = 0; w < n; ++w) {
    int& fp = firstP[static_cast<std::size_t>(p.block(w))];
    if (fp < 0) fp = static_cast<int>(w); else unite(parent, fp, static_cast<int>(w));
    int& fq = firstQ[static_cast<std::size_t>(q.block(w))];
    if (fq < 0) fq = static_cast<int>(w); else unite(parent, fq, static_cast<int>(w));
  }
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index w = 0; w < n; ++w) labels[static_cast<std::size_t>(w)] = findRoot(parent, static_cast<int>(w));
  return Partition(labels);
}

Partition join(const Partition& p, const Partition& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("join: partitions live on different spaces");
  }
  std::vector<int> labels(static_cast<std::size_t>(p.size()));
  for (Index w = 0; w < p.size(); ++w) {
    labels[static_cast<std::size_t>(w)] = p.block(w) * q.blockCount() + q.block(w);
  }
  return Partition(labels);
}

Scalar lpNorm(const FiniteProbSpace& space, const VecRef& x, Scalar p) {
  if (x.size() != space.size()) {
    throw std::invalid_argument("lpNorm: size mismatch");
  }
  if (std::isnan(p) || p < 1.0) {
    throw std::invalid_argument("lpNorm: exponent must satisfy p >= 1");
  }
  if (std::isinf(p)) return x.cwiseAbs().maxCoeff();
  if (p == 1.0) return space.probs().dot(x.cwiseAbs());
  if (p == 2.0) return std::sqrt(space.probs().dot(x.cwiseAbs2()));
  const Scalar s = (space.probs().array() * x.array().abs().pow(p)).sum();
  return std::pow(s, 1.0 / p);
}

}  // namespace martlab

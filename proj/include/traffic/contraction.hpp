#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "linear_graph.hpp"
#include "numeric.hpp"
#include "operand.hpp"

namespace traffic {

// Vertex elimination order and the largest number of neighbours met along it.
struct ContractionPlan {
  std::vector<std::size_t> order;
  std::size_t width = 0;
};

// Greedy minimum degree; ties go to the smallest vertex id.
inline ContractionPlan contraction_plan(const LinearGraph& T) {
  const std::size_t n = T.vertex_count();
  std::vector<std::set<std::size_t>> nb(n);
  for (auto& e : T.edges())
    if (e.source != e.target) {
      nb[e.source].insert(e.target);
      nb[e.target].insert(e.source);
    }
  std::vector<bool> gone(n, false);
  ContractionPlan plan;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n;
    for (std::size_t v = 0; v < n; ++v)
      if (!gone[v] && (best == n || nb[v].size() < nb[best].size())) best = v;
    plan.order.push_back(best);
    plan.width = std::max(plan.width, nb[best].size());
    gone[best] = true;
    std::vector<std::size_t> around(nb[best].begin(), nb[best].end());
    for (auto a : around) {
      nb[a].erase(best);
      for (auto b : around)
        if (a != b) nb[a].insert(b);
    }
    nb[best].clear();
  }
  return plan;
}

// Largest intermediate tensor (entries) the evaluator will allocate.
inline constexpr std::size_t kMaxIntermediateEntries = std::size_t(1) << 26;

namespace detail {

using Buffer = std::shared_ptr<const std::vector<cplx>>;
using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense tensor over sorted vertex ids, row-major with the first id slowest.
struct Factor {
  std::vector<std::size_t> vars;
  Buffer data;
  std::string key;
};

}  // namespace detail

// Reuses intermediate tensors between contractions that share an operand (e.g. all quotients of one graph).
class ContractionCache {
 public:
  explicit ContractionCache(std::size_t budget_entries = std::size_t(1) << 24) : budget_(budget_entries) {}
  detail::Buffer find(const std::string& key) const {
    auto it = map_.find(key);
    return it == map_.end() ? nullptr : it->second;
  }
  void put(const std::string& key, const detail::Buffer& b) {
    if (used_ + b->size() > budget_) return;
    used_ += b->size();
    map_.emplace(key, b);
  }

 private:
  std::unordered_map<std::string, detail::Buffer> map_;
  std::size_t budget_;
  std::size_t used_ = 0;
};

namespace detail {

inline Factor edge_factor(const Edge& e, const Mat& A, const std::string& akey, std::size_t N, ContractionCache* cache) {
  Factor f;
  const auto n = static_cast<Eigen::Index>(N);
  if (e.source == e.target) {
    f.vars = {e.source};
    f.key = akey + "d";
  } else if (e.target < e.source) {
    f.vars = {e.target, e.source};
    f.key = akey + "n";
  } else {
    f.vars = {e.source, e.target};
    f.key = akey + "t";
  }
  if (cache && !akey.empty())
    if (auto hit = cache->find(f.key)) {
      f.data = hit;
      return f;
    }
  auto buf = std::make_shared<std::vector<cplx>>();
  if (e.source == e.target) {
    buf->resize(N);
    for (Eigen::Index i = 0; i < n; ++i) (*buf)[i] = A(i, i);
  } else {
    buf->resize(N * N);
    Eigen::Map<RowMat> m(buf->data(), n, n);
    if (e.target < e.source) m = A;
    else m = A.transpose();
  }
  f.data = buf;
  if (cache && !akey.empty()) cache->put(f.key, f.data);
  return f;
}

inline Factor eliminate(std::vector<Factor>& pool, std::size_t v, std::size_t N, ContractionCache* cache) {
  std::vector<Factor> part;
  std::vector<Factor> rest;
  for (auto& f : pool) {
    if (std::find(f.vars.begin(), f.vars.end(), v) != f.vars.end()) part.push_back(std::move(f));
    else rest.push_back(std::move(f));
  }
  pool = std::move(rest);

  std::vector<std::size_t> rvars;
  for (auto& f : part)
    for (auto x : f.vars)
      if (x != v) rvars.push_back(x);
  std::sort(rvars.begin(), rvars.end());
  rvars.erase(std::unique(rvars.begin(), rvars.end()), rvars.end());
  const std::size_t r = rvars.size();
  if (int_pow(N, r) > kMaxIntermediateEntries)
    throw ResourceLimit("contraction needs an intermediate tensor with N^" + std::to_string(r) + " entries");

  Factor out;
  out.vars = rvars;
  bool keyed = cache != nullptr;
  std::vector<std::string> desc;
  for (auto& f : part) {
    if (f.key.empty()) keyed = false;
    std::string d = f.key + "[";
    for (auto x : f.vars) {
      if (x == v) d += '*';
      else d += std::to_string(std::lower_bound(rvars.begin(), rvars.end(), x) - rvars.begin());
      d += ',';
    }
    desc.push_back(d + "]");
  }
  if (keyed) {
    std::sort(desc.begin(), desc.end());
    out.key = "E" + std::to_string(r) + "(";
    for (auto& d : desc) out.key += d + ";";
    out.key += ")";
    if (auto hit = cache->find(out.key)) {
      out.data = hit;
      return out;
    }
  }

  const auto n = static_cast<Eigen::Index>(N);
  auto buf = std::make_shared<std::vector<cplx>>(int_pow(N, r));
  bool small = r <= 2;
  for (auto& f : part) small = small && f.vars.size() <= 2;
  if (small) {
    Vec d = Vec::Ones(n);
    std::vector<Mat> G(r);
    std::vector<bool> have(r, false);
    for (auto& f : part) {
      if (f.vars.size() == 1) {
        d.array() *= Eigen::Map<const Vec>(f.data->data(), n).array();
        continue;
      }
      std::size_t x = f.vars[0] == v ? f.vars[1] : f.vars[0];
      std::size_t slot = static_cast<std::size_t>(std::lower_bound(rvars.begin(), rvars.end(), x) - rvars.begin());
      Eigen::Map<const RowMat> R(f.data->data(), n, n);
      // G(i_x, i_v)
      Mat g = f.vars[0] == x ? Mat(R) : Mat(R.transpose());
      if (!have[slot]) {
        G[slot] = std::move(g);
        have[slot] = true;
      } else {
        G[slot].array() *= g.array();
      }
    }
    if (r == 0) {
      (*buf)[0] = d.sum();
    } else if (r == 1) {
      Eigen::Map<Vec>(buf->data(), n) = G[0] * d;
    } else {
      Mat left = G[0] * d.asDiagonal();
      Eigen::Map<RowMat>(buf->data(), n, n).noalias() = left * G[1].transpose();
    }
  } else {
    struct Access {
      const cplx* data;
      std::vector<std::size_t> rstride;
      std::size_t vstride;
    };
    std::vector<Access> acc;
    for (auto& f : part) {
      Access a{f.data->data(), std::vector<std::size_t>(r, 0), 0};
      for (std::size_t p = 0; p < f.vars.size(); ++p) {
        std::size_t stride = int_pow(N, f.vars.size() - 1 - p);
        if (f.vars[p] == v) a.vstride = stride;
        else a.rstride[std::lower_bound(rvars.begin(), rvars.end(), f.vars[p]) - rvars.begin()] = stride;
      }
      acc.push_back(std::move(a));
    }
    std::vector<std::size_t> idx(r, 0), base(acc.size(), 0);
    for (std::size_t flat = 0; flat < buf->size(); ++flat) {
      for (std::size_t a = 0; a < acc.size(); ++a) {
        std::size_t o = 0;
        for (std::size_t j = 0; j < r; ++j) o += idx[j] * acc[a].rstride[j];
        base[a] = o;
      }
      cplx s = 0;
      for (std::size_t iv = 0; iv < N; ++iv) {
        cplx p = 1;
        for (std::size_t a = 0; a < acc.size(); ++a) p *= acc[a].data[base[a] + iv * acc[a].vstride];
        s += p;
      }
      (*buf)[flat] = s;
      for (std::size_t j = r; j-- > 0;) {
        if (++idx[j] < N) break;
        idx[j] = 0;
      }
    }
  }
  out.data = buf;
  if (keyed) cache->put(out.key, out.data);
  return out;
}

}  // namespace detail

// Sum over phi of prod_e mats[e](phi(target), phi(source)) along a plan.
// keys[e] names the matrix of edge e for caching; empty keys disable caching.
inline cplx contract_graph(const LinearGraph& T, const std::vector<const Mat*>& mats, std::size_t N,
                           const ContractionPlan& plan, ContractionCache* cache = nullptr,
                           const std::vector<std::string>* keys = nullptr) {
  std::vector<detail::Factor> pool;
  for (std::size_t k = 0; k < T.order(); ++k)
    pool.push_back(detail::edge_factor(T.edge(k), *mats[k], keys ? (*keys)[k] : std::string(), N,
                                       keys ? cache : nullptr));
  cplx result = 1;
  for (auto v : plan.order) {
    auto f = detail::eliminate(pool, v, N, keys ? cache : nullptr);
    if (f.vars.empty()) result *= (*f.data)[0];
    else pool.push_back(std::move(f));
  }
  for (auto& f : pool) result *= (*f.data)[0];
  return result;
}

}  // namespace traffic

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace traffic {

inline constexpr std::size_t kMaxEnumeratedGround = 12;

// Bell numbers by the Bell triangle; exact for n <= 25.
inline std::uint64_t bell_number(std::size_t n) {
  if (n > 25) throw InvalidArgument("bell_number: n > 25 overflows 64 bits");
  std::vector<std::uint64_t> row{1};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (auto x : row) next.push_back(next.back() + x);
    row = std::move(next);
  }
  return row.front();
}

// Partition of {0,..,n-1} held as a restricted growth string.
class SetPartition {
 public:
  SetPartition() = default;

  // Accepts any labelling; equal labels share a block.
  explicit SetPartition(const std::vector<int>& labels) : rgs_(labels.size()) {
    std::vector<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      int b = -1;
      for (auto& [lab, id] : seen)
        if (lab == labels[i]) { b = id; break; }
      if (b < 0) {
        b = static_cast<int>(seen.size());
        seen.emplace_back(labels[i], b);
      }
      rgs_[i] = b;
    }
    blocks_ = seen.size();
  }

  static SetPartition discrete(std::size_t n) {
    std::vector<int> l(n);
    std::iota(l.begin(), l.end(), 0);
    return SetPartition(l);
  }
  static SetPartition full(std::size_t n) { return SetPartition(std::vector<int>(n, 0)); }

  // Parses "0,0,1,0"; the string must already be in normal form.
  static SetPartition parse(const std::string& s) {
    std::vector<int> l;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        l.push_back(std::stoi(tok));
      } catch (...) {
        throw InvalidArgument("bad partition string '" + s + "'");
      }
    }
    SetPartition p(l);
    if (p.rgs_ != l) throw InvalidArgument("partition string '" + s + "' is not a restricted growth string");
    return p;
  }

  std::size_t size() const { return rgs_.size(); }
  std::size_t block_count() const { return blocks_; }
  int block_of(std::size_t i) const { return rgs_[i]; }
  const std::vector<int>& labels() const { return rgs_; }

  std::vector<std::vector<std::size_t>> blocks() const {
    std::vector<std::vector<std::size_t>> out(blocks_);
    for (std::size_t i = 0; i < rgs_.size(); ++i) out[rgs_[i]].push_back(i);
    return out;
  }
  std::vector<std::size_t> block_sizes() const {
    std::vector<std::size_t> s(blocks_, 0);
    for (int b : rgs_) ++s[b];
    return s;
  }

  bool is_discrete() const { return blocks_ == rgs_.size(); }
  bool is_full() const { return blocks_ <= 1; }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < rgs_.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(rgs_[i]);
    }
    return out;
  }
  // Block notation with 1-based elements, e.g. {{1,2,4},{3}}.
  std::string pretty() const {
    std::string out = "{";
    auto bl = blocks();
    for (std::size_t b = 0; b < bl.size(); ++b) {
      out += b ? ",{" : "{";
      for (std::size_t j = 0; j < bl[b].size(); ++j) {
        if (j) out += ',';
        out += std::to_string(bl[b][j] + 1);
      }
      out += '}';
    }
    return out + "}";
  }

  friend bool operator==(const SetPartition& a, const SetPartition& b) { return a.rgs_ == b.rgs_; }
  friend bool operator<(const SetPartition& a, const SetPartition& b) { return a.rgs_ < b.rgs_; }

 private:
  std::vector<int> rgs_;
  std::size_t blocks_ = 0;
};

namespace detail {
inline void check_enumerable(std::size_t n) {
  if (n == 0) throw InvalidArgument("partition enumeration needs n >= 1");
  if (n > kMaxEnumeratedGround)
    throw ResourceLimit("enumerating P(" + std::to_string(n) + ") would produce Bell(" + std::to_string(n) +
                        ") = " + std::to_string(bell_number(n)) + " partitions; the limit is n <= " +
                        std::to_string(kMaxEnumeratedGround));
}
inline void check_same_ground(const SetPartition& a, const SetPartition& b) {
  if (a.size() != b.size())
    throw InvalidArgument("partitions over different ground sets (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
}
}  // namespace detail

// Visits P(n) in lexicographic order of restricted growth strings.
template <class F>
void for_each_partition(std::size_t n, F&& f) {
  detail::check_enumerable(n);
  std::vector<int> a(n, 0), mx(n, 0);
  while (true) {
    f(SetPartition(a));
    std::size_t i = n - 1;
    while (i > 0 && a[i] == mx[i - 1] + 1) --i;
    if (i == 0) return;
    ++a[i];
    for (std::size_t j = i; j < n; ++j) {
      if (j > i) a[j] = 0;
      mx[j] = std::max(mx[j - 1], a[j]);
    }
  }
}

inline std::vector<SetPartition> enumerate_partitions(std::size_t n) {
  std::vector<SetPartition> out;
  out.reserve(bell_number(std::min<std::size_t>(n, kMaxEnumeratedGround)));
  for_each_partition(n, [&](const SetPartition& p) { out.push_back(p); });
  return out;
}

// Every block of a lies inside a block of b.
inline bool leq(const SetPartition& a, const SetPartition& b) {
  detail::check_same_ground(a, b);
  std::vector<int> image(a.block_count(), -1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    int& m = image[a.block_of(i)];
    if (m < 0) m = b.block_of(i);
    else if (m != b.block_of(i)) return false;
  }
  return true;
}

inline SetPartition join(const SetPartition& a, const SetPartition& b) {
  detail::check_same_ground(a, b);
  std::size_t n = a.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<long> first_a(a.block_count(), -1), first_b(b.block_count(), -1);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto [first, blk] : {std::pair{&first_a, a.block_of(i)}, std::pair{&first_b, b.block_of(i)}}) {
      long& f = (*first)[blk];
      if (f < 0) f = static_cast<long>(i);
      else parent[find(i)] = find(static_cast<std::size_t>(f));
    }
  }
  std::vector<int> lab(n);
  for (std::size_t i = 0; i < n; ++i) lab[i] = static_cast<int>(find(i));
  return SetPartition(lab);
}

inline SetPartition meet(const SetPartition& a, const SetPartition& b) {
  detail::check_same_ground(a, b);
  std::vector<int> lab(a.size());
  int stride = static_cast<int>(b.block_count()) + 1;
  for (std::size_t i = 0; i < a.size(); ++i) lab[i] = a.block_of(i) * stride + b.block_of(i);
  return SetPartition(lab);
}

// Partition of the blocks of a induced by a coarser b.
inline SetPartition induced_on_blocks(const SetPartition& a, const SetPartition& b) {
  if (!leq(a, b)) throw InvalidArgument("induced_on_blocks requires a <= b");
  std::vector<int> lab(a.block_count());
  for (std::size_t i = 0; i < a.size(); ++i) lab[a.block_of(i)] = b.block_of(i);
  return SetPartition(lab);
}

// Möbius function of the interval [a, b]: prod over blocks B of b of (-1)^{n_B-1}(n_B-1)!.
inline std::int64_t mobius(const SetPartition& a, const SetPartition& b) {
  if (!leq(a, b)) throw InvalidArgument("mobius(" + a.pretty() + ", " + b.pretty() + "): arguments not comparable");
  auto counts = induced_on_blocks(a, b).block_sizes();
  std::int64_t mu = 1;
  for (auto nb : counts) {
    for (std::size_t j = 2; j < nb; ++j) mu *= static_cast<std::int64_t>(j);
    if (nb % 2 == 0) mu = -mu;
  }
  return mu;
}

inline std::int64_t mobius_from_discrete(const SetPartition& p) { return mobius(SetPartition::discrete(p.size()), p); }

// Partition of positions by equal values; values are 1-based indices in [N].
template <class Int>
SetPartition kernel(const std::vector<Int>& entries) {
  if (entries.empty()) throw InvalidArgument("kernel of an empty multi-index");
  std::vector<std::pair<Int, int>> seen;
  std::vector<int> lab(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto it = std::find_if(seen.begin(), seen.end(), [&](const auto& s) { return s.first == entries[i]; });
    if (it == seen.end()) {
      seen.emplace_back(entries[i], static_cast<int>(seen.size()));
      lab[i] = seen.back().second;
    } else {
      lab[i] = it->second;
    }
  }
  return SetPartition(lab);
}

}  // namespace traffic

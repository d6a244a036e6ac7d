#pragma once

#include <algorithm>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace traffic {

struct Letter {
  int index;  // 0-based
  bool star;
  friend bool operator==(const Letter&, const Letter&) = default;
  Letter inverse() const { return {index, !star}; }
};

// *-monomial X_{d(1)}^{e(1)} ... X_{d(p)}^{e(p)}.
class StarWord {
 public:
  StarWord() = default;
  explicit StarWord(std::vector<Letter> letters) : letters_(std::move(letters)) {
    for (auto& l : letters_)
      if (l.index < 0) throw InvalidArgument("letter indices are 1-based positive integers");
  }

  // "1,2,1*,2*" with 1-based letters; the empty string is the empty word.
  static StarWord parse(const std::string& s) {
    std::vector<Letter> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok.erase(std::remove_if(tok.begin(), tok.end(), [](unsigned char c) { return std::isspace(c); }), tok.end());
      if (tok.empty()) continue;
      bool star = tok.back() == '*';
      if (star) tok.pop_back();
      int v = 0;
      try {
        std::size_t used = 0;
        v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (...) {
        throw InvalidArgument("bad letter '" + tok + "' in word '" + s + "'");
      }
      if (v < 1) throw InvalidArgument("letters are 1-based, got " + std::to_string(v));
      out.push_back({v - 1, star});
    }
    return StarWord(out);
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < letters_.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(letters_[i].index + 1);
      if (letters_[i].star) out += '*';
    }
    return out;
  }

  const std::vector<Letter>& letters() const { return letters_; }
  std::size_t length() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  // Smallest alphabet containing every letter.
  int alphabet() const {
    int m = 0;
    for (auto& l : letters_) m = std::max(m, l.index + 1);
    return m;
  }

  StarWord mirrored() const { return StarWord({letters_.rbegin(), letters_.rend()}); }
  StarWord inverse() const {
    std::vector<Letter> out;
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) out.push_back(it->inverse());
    return StarWord(out);
  }
  StarWord operator*(const StarWord& o) const {
    auto l = letters_;
    l.insert(l.end(), o.letters_.begin(), o.letters_.end());
    return StarWord(l);
  }

  friend bool operator==(const StarWord&, const StarWord&) = default;

 private:
  std::vector<Letter> letters_;
};

// Free reduction with a stack; the result is the normal form in the free group.
inline StarWord free_reduce(const StarWord& w) {
  std::vector<Letter> st;
  for (auto& l : w.letters()) {
    if (!st.empty() && st.back() == l.inverse()) st.pop_back();
    else st.push_back(l);
  }
  return StarWord(st);
}

inline bool is_trivial(const StarWord& w) { return free_reduce(w).empty(); }

inline bool commute_in_free_group(const StarWord& a, const StarWord& b) {
  return free_reduce(a * b) == free_reduce(b * a);
}

// Rank of the subgroup generated by a and b: 0, 1 or 2.
inline int subgroup_rank(const StarWord& a, const StarWord& b) {
  bool ta = is_trivial(a), tb = is_trivial(b);
  if (ta && tb) return 0;
  if (ta || tb) return 1;
  return commute_in_free_group(a, b) ? 1 : 2;
}

}  // namespace traffic

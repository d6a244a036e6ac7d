#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "errors.hpp"
#include "graph_invariants.hpp"
#include "linear_graph.hpp"
#include "numeric.hpp"
#include "operand.hpp"

namespace traffic {

using json = nlohmann::json;

// Graph file: {"vertices": n, "edges": [[src, tgt], ...], "labels": {"delta": [...], "eps": ["u"|"s", ...]}}.
// Vertex ids are 0-based; letters in "delta" are 1-based like the letters of a word.
struct GraphFile {
  LinearGraph graph;
  std::optional<EdgeLabels> labels;
};

inline GraphFile graph_from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("vertices") || !j.contains("edges"))
      throw InvalidArgument("graph JSON needs \"vertices\" and \"edges\"");
    const auto n = j.at("vertices").get<std::int64_t>();
    if (n < 0) throw InvalidArgument("negative vertex count");
    std::vector<Edge> edges;
    for (auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw InvalidArgument("every edge must be a [source, target] pair");
      auto s = e[0].get<std::int64_t>(), t = e[1].get<std::int64_t>();
      if (s < 0 || t < 0) throw InvalidArgument("negative vertex id");
      edges.push_back({static_cast<std::size_t>(s), static_cast<std::size_t>(t)});
    }
    GraphFile g{LinearGraph(static_cast<std::size_t>(n), std::move(edges)), std::nullopt};
    if (j.contains("labels")) {
      const auto& l = j.at("labels");
      EdgeLabels lab;
      for (auto& d : l.at("delta")) {
        auto v = d.get<std::int64_t>();
        if (v < 1) throw InvalidArgument("letters in \"delta\" are 1-based");
        lab.delta.push_back(static_cast<int>(v - 1));
      }
      for (auto& e : l.at("eps")) {
        auto s = e.get<std::string>();
        if (s != "u" && s != "s") throw InvalidArgument("\"eps\" entries must be \"u\" or \"s\"");
        lab.star.push_back(s == "s");
      }
      if (lab.delta.size() != g.graph.order() || lab.star.size() != g.graph.order())
        throw InvalidArgument("labels need one entry per edge");
      g.labels = std::move(lab);
    }
    return g;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed graph JSON: ") + e.what());
  }
}

inline json graph_to_json(const LinearGraph& T, const EdgeLabels* lab = nullptr) {
  json j;
  j["vertices"] = T.vertex_count();
  j["edges"] = json::array();
  for (auto& e : T.edges()) j["edges"].push_back({e.source, e.target});
  if (lab) {
    json d = json::array(), s = json::array();
    for (auto x : lab->delta) d.push_back(x + 1);
    for (bool b : lab->star) s.push_back(b ? "s" : "u");
    j["labels"] = {{"delta", d}, {"eps", s}};
  }
  return j;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline GraphFile read_graph_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
  }
  return graph_from_json(j);
}

// ---------------------------------------------------------------------------
// Operands. JSON: a list of matrices, one per leg, each either flat row-major or a list of rows; entries are numbers
// or [re, im]. A sum of elementary tensors is {"terms": [{"weight": w, "factors": [...]}, ...]}.

namespace detail {

inline cplx complex_from_json(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
  throw InvalidArgument("complex entries must be numbers or [re, im]");
}

inline Mat matrix_from_json(const json& m) {
  if (!m.is_array() || m.empty()) throw InvalidArgument("a matrix must be a non-empty array");
  std::vector<cplx> flat;
  // rows are arrays of length N; a flat list holds N^2 numbers or [re, im] pairs
  const bool nested = m[0].is_array() && !m[0].empty() && (m[0][0].is_array() || m[0].size() == m.size());
  if (nested) {
    for (auto& row : m) {
      if (!row.is_array() || row.size() != m.size()) throw InvalidArgument("matrix rows must all have length N");
      for (auto& v : row) flat.push_back(complex_from_json(v));
    }
  } else {
    for (auto& v : m) flat.push_back(complex_from_json(v));
  }
  const auto N = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
  if (static_cast<std::size_t>(N * N) != flat.size()) throw InvalidArgument("matrix entry count is not a square");
  Mat A(N, N);
  for (Eigen::Index r = 0; r < N; ++r)
    for (Eigen::Index c = 0; c < N; ++c) A(r, c) = flat[static_cast<std::size_t>(r * N + c)];
  return A;
}

inline std::vector<Mat> factors_from_json(const json& f) {
  if (!f.is_array() || f.empty()) throw InvalidArgument("an elementary tensor needs at least one leg");
  std::vector<Mat> out;
  for (auto& m : f) out.push_back(matrix_from_json(m));
  return out;
}

inline json matrix_to_json(const Mat& A) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < A.cols(); ++c) row.push_back({A(r, c).real(), A(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

}  // namespace detail

inline TensorOperand operand_from_json(const json& j) {
  try {
    if (j.is_object()) {
      std::vector<TensorOperand::Term> terms;
      for (auto& t : j.at("terms")) {
        cplx w = t.contains("weight") ? detail::complex_from_json(t.at("weight")) : cplx(1.0);
        terms.push_back({w, detail::factors_from_json(t.at("factors"))});
      }
      return TensorOperand::sum(std::move(terms));
    }
    return TensorOperand::factored(detail::factors_from_json(j));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed operand JSON: ") + e.what());
  }
}

inline json operand_to_json(const TensorOperand& A) {
  if (A.is_dense()) throw InvalidArgument("dense operands have no factor form");
  auto factors = [](const std::vector<Mat>& f) {
    json a = json::array();
    for (auto& m : f) a.push_back(detail::matrix_to_json(m));
    return a;
  };
  if (A.is_elementary() && A.terms().front().weight == cplx(1.0)) return factors(A.factors());
  json terms = json::array();
  for (auto& t : A.terms()) terms.push_back({{"weight", {t.weight.real(), t.weight.imag()}}, {"factors", factors(t.factors)}});
  return {{"terms", terms}};
}

// Binary: the 8 bytes "TRFOPRD1", then uint64 N, uint64 K, then K row-major N x N blocks of (re, im) doubles,
// all little-endian. Elementary tensors only.
inline constexpr char kOperandMagic[8] = {'T', 'R', 'F', 'O', 'P', 'R', 'D', '1'};

inline std::string operand_to_binary(const TensorOperand& A) {
  const auto& f = A.factors();
  std::string out(kOperandMagic, 8);
  auto put = [&](const void* p, std::size_t n) { out.append(static_cast<const char*>(p), n); };
  std::uint64_t N = A.N(), K = A.legs();
  put(&N, 8);
  put(&K, 8);
  for (auto& m : f)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        double re = m(r, c).real(), im = m(r, c).imag();
        put(&re, 8);
        put(&im, 8);
      }
  return out;
}

inline TensorOperand operand_from_binary(const std::string& bytes) {
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kOperandMagic, 8) != 0)
    throw InvalidArgument("not a binary operand file");
  std::uint64_t N = 0, K = 0;
  std::memcpy(&N, bytes.data() + 8, 8);
  std::memcpy(&K, bytes.data() + 16, 8);
  if (N == 0 || K == 0 || N > 100000 || K > 1000) throw InvalidArgument("binary operand header out of range");
  if (bytes.size() != 24 + K * N * N * 16) throw InvalidArgument("binary operand has the wrong length");
  std::vector<Mat> f;
  std::size_t pos = 24;
  for (std::uint64_t k = 0; k < K; ++k) {
    Mat m(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        double re, im;
        std::memcpy(&re, bytes.data() + pos, 8);
        std::memcpy(&im, bytes.data() + pos + 8, 8);
        pos += 16;
        m(r, c) = {re, im};
      }
    f.push_back(std::move(m));
  }
  return TensorOperand::factored(std::move(f));
}

inline TensorOperand read_operand_file(const std::string& path) {
  auto bytes = read_text_file(path);
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kOperandMagic, 8) == 0) return operand_from_binary(bytes);
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception& e) {
    throw InvalidArgument("'" + path + "' is neither a binary operand nor JSON: " + e.what());
  }
  return operand_from_json(j);
}

}  // namespace traffic

// traffic: command-line front end for graph traces, Haar limits and character experiments.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "traffic/traffic.hpp"

using namespace traffic;

namespace {

enum ExitCode { kOk = 0, kInvalid = 2, kResource = 3, kNumerical = 4 };

struct Common {
  std::string format = "json";
  std::size_t threads = 0;
  std::uint64_t seed = 1;
  std::string out;
};

void add_format(CLI::App* c, Common& o, const std::string& fallback = "json") {
  o.format = fallback;
  c->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  c->add_option("--out", o.out, "Write the primary output to this file instead of standard output");
}

void add_threads(CLI::App* c, Common& o) {
  c->add_option("--threads", o.threads, "Worker threads (0 = available cores); results do not depend on it")
      ->capture_default_str();
}

void add_seed(CLI::App* c, Common& o) {
  c->add_option("--seed", o.seed, "Seed for every random stream")->capture_default_str();
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string s;
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + csv_field(r[i]);
      s += "\n";
    };
    line(header);
    for (auto& r : rows) line(r);
    return s;
  }
};

void emit(const Common& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write '" + o.out + "'");
  f << text;
}

void emit(const Common& o, const json& j, const Table& t) {
  emit(o, o.format == "csv" ? t.csv() : j.dump(2) + "\n");
}

std::vector<std::size_t> checked_dims(const std::vector<std::size_t>& dims) {
  require(!dims.empty(), "--dims needs at least one value");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    require(dims[i] >= 1, "dimensions must be positive");
    require(i == 0 || dims[i] > dims[i - 1], "--dims must be strictly increasing");
  }
  return dims;
}

std::vector<std::size_t> checked_blocks(const std::vector<std::size_t>& b) {
  require(b.size() == 3, "--blocks takes K1,K2,K3");
  require(b[0] >= 1, "K1 must be at least 1");
  return b;
}

std::string rational_string(const Rational& r) {
  return r.denominator() == 1 ? std::to_string(r.numerator())
                              : std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

StateSpec make_state(const std::string& s, std::size_t N, std::size_t K) {
  if (s == "tracial") return StateSpec::tracial(N, K);
  if (s == "entangled") return StateSpec::max_entangled(N, K);
  if (s == "diagonal") return StateSpec::diagonal_uniform(N, K);
  json j;
  try {
    j = json::parse(read_text_file(s));
  } catch (const json::exception& e) {
    throw InvalidArgument("state '" + s + "' is not a kind or a coefficient file: " + e.what());
  }
  try {
    auto k = j.at("K").get<std::size_t>();
    require(k == K, "coefficient file is for K = " + std::to_string(k) + " but the blocks give K = " + std::to_string(K));
    std::vector<cplx> c;
    for (auto& v : j.at("coefficients")) c.push_back(detail::complex_from_json(v));
    return StateSpec::elementary_combination(N, K, std::move(c));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed coefficient file: ") + e.what());
  }
}

json report_json(const MCReport& r) {
  return {{"N", r.N},
          {"estimate_re", r.estimate.real()},
          {"estimate_im", r.estimate.imag()},
          {"stderr", r.std_error},
          {"variance", r.variance},
          {"samples", r.samples}};
}

// ---------------------------------------------------------------------------

struct TraceArgs {
  Common c;
  std::string graph, operand;
  bool injective = false, zeta = false, tau = false;
};

void run_trace(const TraceArgs& a) {
  auto g = read_graph_file(a.graph);
  auto A = read_operand_file(a.operand);
  require(!(a.zeta && a.tau), "--zeta and --tau are exclusive");
  const auto& T = g.graph;
  cplx v = a.injective ? injective_graph_trace(T, A) : graph_trace(T, A);
  const std::size_t L = leaf_count(T), comps = T.component_count();
  std::string norm = "none";
  if (a.zeta) {
    v /= pow_half(static_cast<double>(A.N()), static_cast<long>(L));
    norm = "zeta";
  } else if (a.tau) {
    v /= std::pow(static_cast<double>(A.N()), static_cast<double>(comps));
    norm = "tau";
  }
  const std::size_t width = contraction_plan(T).width;
  json j{{"value_re", v.real()}, {"value_im", v.imag()}, {"L", L}, {"c", comps}, {"plan_width", width},
         {"injective", a.injective}, {"normalization", norm}};
  Table t{{"value_re", "value_im", "L", "c", "plan_width"},
          {{num(v.real()), num(v.imag()), std::to_string(L), std::to_string(comps), std::to_string(width)}}};
  emit(a.c, j, t);
}

struct InvariantsArgs {
  Common c;
  std::string graph;
};

void run_invariants(const InvariantsArgs& a) {
  auto g = read_graph_file(a.graph);
  const auto& T = g.graph;
  auto f = forest_of_tec(T);
  auto info = cactus_decomposition(T);
  json bridges = json::array(), comps = json::array();
  for (auto& fe : f.forest_edges) bridges.push_back(fe.edge);
  for (auto& c : f.components) comps.push_back(c);
  json j{{"vertices", T.vertex_count()},
         {"edges", T.order()},
         {"L", f.leaf_count()},
         {"components", T.component_count()},
         {"bridges", bridges},
         {"tec_components", comps},
         {"cactus", info.cactus},
         {"well_oriented", info.cactus && info.well_oriented}};
  std::string validity_str;
  if (g.labels) {
    auto v = validity(T, *g.labels, info);
    validity_str = to_string(v);
    j["valid"] = v == Validity::Valid;
    j["validity"] = validity_str;
  }
  Table t{{"vertices", "edges", "L", "components", "bridges", "cactus", "well_oriented", "validity"},
          {{std::to_string(T.vertex_count()), std::to_string(T.order()), std::to_string(f.leaf_count()),
            std::to_string(T.component_count()), std::to_string(bridges.size()), info.cactus ? "true" : "false",
            info.cactus && info.well_oriented ? "true" : "false", validity_str}}};
  emit(a.c, j, t);
}

struct MobiusArgs {
  Common c;
  std::size_t n = 4;
};

void run_mobius(const MobiusArgs& a) {
  detail::check_enumerable(a.n);
  json rows = json::array();
  Table t{{"partition", "blocks", "mobius"}, {}};
  for (auto& p : enumerate_partitions(a.n)) {
    auto m = mobius_from_discrete(p);
    rows.push_back({{"partition", p.pretty()}, {"rgs", p.to_string()}, {"blocks", p.block_count()}, {"mobius", m}});
    t.rows.push_back({p.pretty(), std::to_string(p.block_count()), std::to_string(m)});
  }
  emit(a.c, json{{"n", a.n}, {"partitions", rows}}, t);
}

struct DecomposeArgs {
  Common c;
  std::string state = "tracial";
  std::size_t K = 1, N = 4, invariance_samples = 32;
};

void run_decompose(const DecomposeArgs& a) {
  auto psi = make_state(a.state, a.N, a.K);
  auto coeffs = decompose_invariant_state(as_functional(psi), a.K, a.N, a.invariance_samples, a.c.seed);
  auto parts = enumerate_partitions(2 * a.K);
  json rows = json::array();
  Table t{{"partition", "re", "im"}, {}};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    rows.push_back({{"partition", parts[i].pretty()}, {"re", coeffs[i].real()}, {"im", coeffs[i].imag()}});
    t.rows.push_back({parts[i].pretty(), num(coeffs[i].real()), num(coeffs[i].imag())});
  }
  emit(a.c, json{{"state", a.state}, {"K", a.K}, {"N", a.N}, {"coefficients", rows}}, t);
}

struct PredictArgs {
  Common c;
  std::string word, graph;
  std::vector<std::size_t> blocks{1, 0, 0};
  bool variance = false;
};

void run_predict(const PredictArgs& a) {
  auto M = StarWord::parse(a.word);
  auto b = checked_blocks(a.blocks);
  LinearGraph T = a.graph.empty() ? loop_graph(b[0] + b[1] + b[2]) : read_graph_file(a.graph).graph;
  auto cert = predict_freeness_limit(M, T, b[0], b[1], b[2], a.variance, a.c.threads);
  json q = json::array();
  Table t{{"partition", "multiplicity", "eta", "valid", "leaves_t1", "leaves_t2", "leaves_tp"}, {}};
  for (auto& e : cert.quotients) {
    bool valid = e.t1_validity == Validity::Valid;
    q.push_back({{"partition", e.partition.to_string()},
                 {"multiplicity", e.multiplicity},
                 {"eta", rational_string(e.eta)},
                 {"valid", valid},
                 {"t1_validity", to_string(e.t1_validity)},
                 {"leaf_counts", {e.leaves_t1, e.leaves_t2, e.leaves_tp}}});
    t.rows.push_back({e.partition.to_string(), std::to_string(e.multiplicity), rational_string(e.eta),
                      valid ? "true" : "false", std::to_string(e.leaves_t1), std::to_string(e.leaves_t2),
                      std::to_string(e.leaves_tp)});
  }
  json j{{"verdict", cert.verdict},
         {"word", cert.word.to_string()},
         {"blocks", {cert.K1, cert.K2, cert.K3}},
         {"variance", cert.variance},
         {"partitions", cert.partitions},
         {"mirror_subgroup_rank", cert.mirror_subgroup_rank},
         {"max_eta", rational_string(cert.max_eta)},
         {"quotients", q}};
  emit(a.c, j, t);
}

struct McArgs {
  Common c;
  std::string state = "tracial", word, vkind = "haar";
  std::vector<std::size_t> blocks{1, 1, 0}, dims{16, 32, 64, 128};
  std::size_t samples = 1000;
};

void run_mc(const McArgs& a) {
  auto M = StarWord::parse(a.word);
  auto b = checked_blocks(a.blocks);
  WSpec spec{b[0], b[1], b[2], a.vkind == "shift" ? VKind::CyclicShift : VKind::Haar};
  json rows = json::array();
  Table t{{"N", "estimate_re", "estimate_im", "stderr", "variance", "samples"}, {}};
  for (auto N : checked_dims(a.dims)) {
    auto r = mc_expectation(make_state(a.state, N, spec.legs()), spec, M, a.samples, a.c.seed, a.c.threads);
    rows.push_back(report_json(r));
    t.rows.push_back({std::to_string(N), num(r.estimate.real()), num(r.estimate.imag()), num(r.std_error),
                      num(r.variance), std::to_string(r.samples)});
  }
  emit(a.c, json{{"state", a.state}, {"word", M.to_string()}, {"blocks", b}, {"rows", rows}}, t);
}

struct LimitArgs {
  Common c;
  std::string graph;
  std::vector<std::size_t> dims{25, 50, 100};
  std::size_t samples = 2000;
};

void run_limit(const LimitArgs& a) {
  auto g = read_graph_file(a.graph);
  require(g.labels.has_value(), "limit needs a graph with \"labels\"");
  auto lim = haar_limit_injective(g.graph, *g.labels);
  json rows = json::array();
  Table t{{"N", "estimate_re", "estimate_im", "stderr", "limit"}, {}};
  for (auto N : checked_dims(a.dims)) {
    auto r = haar_limit_mc(g.graph, *g.labels, N, a.samples, a.c.seed, a.c.threads);
    rows.push_back(report_json(r));
    t.rows.push_back({std::to_string(N), num(r.estimate.real()), num(r.estimate.imag()), num(r.std_error),
                      rational_string(lim)});
  }
  emit(a.c, json{{"limit", rational_string(lim)}, {"validity", to_string(validity(g.graph, *g.labels))}, {"rows", rows}},
       t);
}

struct CharacterArgs {
  Common c;
  std::string lambda, mu, word = "1";
  std::size_t K = 1, samples = 200;
  std::vector<std::size_t> dims{16, 32, 64};
};

void run_character(const CharacterArgs& a) {
  auto sig = Signature::parse(a.lambda, a.mu);
  auto M = StarWord::parse(a.word);
  json rows = json::array();
  Table t{{"N", "estimate_re", "estimate_im", "stderr", "asymptotic_error", "asymptotic_error_stderr"}, {}};
  for (auto N : checked_dims(a.dims)) {
    auto r = character_word_mc(sig, M, a.K, N, a.samples, a.c.seed, a.c.threads);
    auto e = character_asymptotic_error(sig, N, a.samples, a.c.seed, a.c.threads);
    auto j = report_json(r);
    j["asymptotic_error"] = e.estimate.real();
    j["asymptotic_error_stderr"] = e.std_error;
    rows.push_back(j);
    t.rows.push_back({std::to_string(N), num(r.estimate.real()), num(r.estimate.imag()), num(r.std_error),
                      num(e.estimate.real()), num(e.std_error)});
  }
  emit(a.c, json{{"signature", sig.to_string()}, {"word", M.to_string()}, {"rows", rows}}, t);
}

struct AmalgamArgs {
  Common c;
  std::size_t d = 2, K = 2, samples = 400;
  std::string word, perm;
  std::vector<std::size_t> dims{8, 16, 32};
};

void run_amalgam(const AmalgamArgs& a) {
  require(a.d >= 1 && a.d <= kMaxAmalgamLegs, "--d must be between 1 and " + std::to_string(kMaxAmalgamLegs));
  PermutationWord w{StarWord::parse(a.word), a.perm.empty() ? identity_permutation(a.d) : parse_permutation(a.perm)};
  require(w.sigma.size() == a.d, "--perm must be a permutation of 1.." + std::to_string(a.d));
  json rows = json::array();
  Table t{{"N", "estimate_re", "estimate_im", "stderr", "samples"}, {}};
  for (auto N : checked_dims(a.dims)) {
    auto r = left_regular_check(w, a.K, N, a.samples, a.c.seed, a.c.threads);
    rows.push_back(report_json(r));
    t.rows.push_back({std::to_string(N), num(r.estimate.real()), num(r.estimate.imag()), num(r.std_error),
                      std::to_string(r.samples)});
  }
  emit(a.c, json{{"word", w.free.to_string()}, {"perm", permutation_to_string(w.sigma)}, {"rows", rows}}, t);
}

struct NormArgs {
  Common c;
  std::size_t L = 3, N = 30, seeds = 10;
  std::string mode = "conjugate";
};

void run_normdemo(const NormArgs& a) {
  json rows = json::array();
  Table t{{"run", "norm", "target", "method"}, {}};
  for (std::size_t s = 0; s < a.seeds; ++s) {
    RngStream rng(a.c.seed, {0x40e, s});
    auto r = norm_absorption_demo(a.L, a.N, a.mode == "haar" ? NormMode::HaarPair : NormMode::ConjugatePair, rng);
    rows.push_back({{"run", s}, {"norm", r.norm}, {"target", r.target}, {"method", r.method}});
    t.rows.push_back({std::to_string(s), num(r.norm), num(r.target), r.method});
  }
  emit(a.c, json{{"mode", a.mode}, {"L", a.L}, {"N", a.N}, {"rows", rows}}, t);
}

// ---------------------------------------------------------------------------
// selftest: exact identities on seeded inputs.

struct SelfCheck {
  std::string name;
  double residual;
  double tolerance;
};

TensorOperand seeded_operand(std::size_t N, std::size_t K, RngStream& rng) {
  std::vector<Mat> f;
  for (std::size_t k = 0; k < K; ++k) {
    Mat m(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.complex_normal();
    f.push_back(m);
  }
  return TensorOperand::factored(std::move(f));
}

std::vector<SelfCheck> selftest_checks(std::uint64_t seed) {
  std::vector<SelfCheck> out;
  RngStream rng(seed, {0x5e1f});

  double mob = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    double f = 1;
    for (std::size_t k = 2; k < n; ++k) f *= static_cast<double>(k);
    double want = (n % 2 ? 1.0 : -1.0) * f;
    mob = std::max(mob, std::abs(double(mobius(SetPartition::discrete(n), SetPartition::full(n))) - want));
  }
  out.push_back({"mobius_top_interval", mob, 0});

  {
    auto A = seeded_operand(4, 2, rng);
    auto T0 = minimal_graph(2);
    cplx plain = graph_trace(T0, A), sum = 0;
    for (auto& p : enumerate_partitions(4)) sum += injective_graph_trace(quotient(T0, p), A);
    out.push_back({"trace_injective_identity", std::abs(plain - sum) / std::max(1.0, std::abs(plain)), 1e-10});
  }

  {
    double worst = 0;
    Mat A = seeded_operand(4, 1, rng).factors()[0] / 2.0;
    for (std::size_t d = 1; d <= 4; ++d)
      for (auto& s : all_permutations(d)) worst = std::max(worst, cycle_factorization_check(A, s).residual);
    out.push_back({"cycle_factorization", worst, 1e-10});
  }

  {
    double worst = 0;
    for (auto& s : all_permutations(3))
      for (auto& t : all_permutations(3)) {
        Mat l = leg_permutation(compose(s, t), 3).dense();
        Mat r = leg_permutation(s, 3).dense() * leg_permutation(t, 3).dense();
        worst = std::max(worst, (l - r).cwiseAbs().maxCoeff());
      }
    out.push_back({"leg_permutation_homomorphism", worst, 0});
  }

  {
    Mat U = sample_haar_unitary(7, rng);
    cplx T = U.trace();
    cplx want = (std::norm(T) - 1) / 48.0;
    out.push_back({"adjoint_character", std::abs(normalized_character(Signature::make({1}, {1}), U) - want), 1e-12});
  }

  {
    LinearGraph Tp(3, {{1, 0}, {0, 1}, {2, 0}, {2, 2}});
    auto r = splitting_identity_check(Tp, seeded_operand(4, 2, rng), symmetrize_operand_exact(seeded_operand(4, 2, rng)));
    out.push_back({"splitting_identity", r.residual / std::max(1.0, std::abs(r.lhs)), 1e-9});
  }

  {
    EdgeLabels lab{{0, 0, 0, 0, 0, 0}, {false, true, false, true, false, true}};
    out.push_back({"six_cycle_limit", std::abs(to_double(haar_limit_injective(cycle_graph(6), lab)) - 2.0), 0});
  }
  return out;
}

int run_selftest(const Common& c) {
  auto checks = selftest_checks(c.seed);
  bool ok = true;
  json rows = json::array();
  Table t{{"check", "residual", "tolerance", "pass"}, {}};
  for (auto& k : checks) {
    bool pass = k.residual <= k.tolerance;
    ok = ok && pass;
    rows.push_back({{"check", k.name}, {"residual", k.residual}, {"tolerance", k.tolerance}, {"pass", pass}});
    t.rows.push_back({k.name, num(k.residual), num(k.tolerance), pass ? "true" : "false"});
  }
  emit(c, json{{"pass", ok}, {"checks", rows}}, t);
  if (!ok) std::cerr << "selftest: an identity exceeded its tolerance\n";
  return ok ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph traces, Haar unitary limits and character experiments"};
  app.require_subcommand(1);
  app.get_formatter()->column_width(44);
  app.set_version_flag("--version", "1.0.0");

  TraceArgs trace;
  auto* c_trace = app.add_subcommand("trace", "Graph trace of an operand file");
  c_trace->add_option("--graph", trace.graph, "Graph JSON file")->required()->check(CLI::ExistingFile);
  c_trace->add_option("--operand", trace.operand, "Operand file (binary or JSON list of matrices)")
      ->required()
      ->check(CLI::ExistingFile);
  c_trace->add_flag("--injective", trace.injective, "Sum over injective labellings only");
  c_trace->add_flag("--zeta", trace.zeta, "Divide by N^{L/2}");
  c_trace->add_flag("--tau", trace.tau, "Divide by N^{c}, c the number of components");
  add_format(c_trace, trace.c);

  InvariantsArgs inv;
  auto* c_inv = app.add_subcommand("invariants", "Bridges, two-edge connected components, leaf count, cactus flags");
  c_inv->add_option("--graph", inv.graph, "Graph JSON file")->required()->check(CLI::ExistingFile);
  add_format(c_inv, inv.c);

  MobiusArgs mob;
  auto* c_mob = app.add_subcommand("mobius", "Partitions of [n] with the Moebius value from the discrete partition");
  c_mob->add_option("--n", mob.n, "Ground set size")->capture_default_str();
  add_format(c_mob, mob.c);

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "Coefficients of an invariant state over the partitions of [2K]");
  c_dec->add_option("--state", dec.state, "tracial, entangled, diagonal or a coefficient JSON file")->capture_default_str();
  c_dec->add_option("--K", dec.K, "Number of legs")->capture_default_str();
  c_dec->add_option("--N", dec.N, "Matrix size (at least 2K)")->capture_default_str();
  c_dec->add_option("--invariance-samples", dec.invariance_samples, "Random invariance probes")->capture_default_str();
  add_format(c_dec, dec.c);
  add_seed(c_dec, dec.c);

  PredictArgs pred;
  auto* c_pred = app.add_subcommand("predict", "Certificate for the vanishing of a normalized Haar limit");
  c_pred->add_option("--word", pred.word, "Star word such as 1,2,1*,2*")->required();
  c_pred->add_option("--graph", pred.graph, "Base graph JSON file (default: loops)")->check(CLI::ExistingFile);
  c_pred->add_option("--blocks", pred.blocks, "K1,K2,K3")->delimiter(',')->expected(3)->capture_default_str();
  c_pred->add_flag("--variance", pred.variance, "Use the graph T_M with its adjoint copy");
  add_format(c_pred, pred.c);
  add_threads(c_pred, pred.c);

  McArgs mc;
  auto* c_mc = app.add_subcommand("mc", "Monte-Carlo moments of a word in W_1, ..., W_L");
  c_mc->add_option("--state", mc.state, "tracial, entangled, diagonal or a coefficient JSON file")->capture_default_str();
  c_mc->add_option("--word", mc.word, "Star word")->required();
  c_mc->add_option("--blocks", mc.blocks, "K1,K2,K3")->delimiter(',')->expected(3)->capture_default_str();
  c_mc->add_option("--dims", mc.dims, "Strictly increasing matrix sizes")->delimiter(',')->capture_default_str();
  c_mc->add_option("--samples", mc.samples, "Samples per size")->capture_default_str();
  c_mc->add_option("--vkind", mc.vkind, "Third block: haar or shift")
      ->check(CLI::IsMember({"haar", "shift"}))
      ->capture_default_str();
  add_format(c_mc, mc.c, "csv");
  add_seed(c_mc, mc.c);
  add_threads(c_mc, mc.c);

  LimitArgs lim;
  auto* c_lim = app.add_subcommand("limit", "Exact Haar limit of an injective trace against Monte-Carlo");
  c_lim->add_option("--graph", lim.graph, "Labelled graph JSON file")->required()->check(CLI::ExistingFile);
  c_lim->add_option("--dims", lim.dims, "Strictly increasing matrix sizes")->delimiter(',')->capture_default_str();
  c_lim->add_option("--samples", lim.samples, "Samples per size")->capture_default_str();
  add_format(c_lim, lim.c, "csv");
  add_seed(c_lim, lim.c);
  add_threads(c_lim, lim.c);

  CharacterArgs chr;
  auto* c_chr = app.add_subcommand("character", "Normalized rational characters on words in U and conj(U)");
  c_chr->add_option("--lambda", chr.lambda, "Positive part, e.g. 2,1");
  c_chr->add_option("--mu", chr.mu, "Negative part, e.g. 1");
  c_chr->add_option("--word", chr.word, "Word; letters 1..K are U_k, K+1..2K their conjugates")->capture_default_str();
  c_chr->add_option("--K", chr.K, "Number of independent unitaries")->capture_default_str();
  c_chr->add_option("--dims", chr.dims, "Strictly increasing matrix sizes")->delimiter(',')->capture_default_str();
  c_chr->add_option("--samples", chr.samples, "Samples per size")->capture_default_str();
  add_format(c_chr, chr.c, "csv");
  add_seed(c_chr, chr.c);
  add_threads(c_chr, chr.c);

  AmalgamArgs am;
  auto* c_am = app.add_subcommand("amalgam", "Normalized trace of W^{(x)d} rho(sigma) for a word in F_2K x S_d");
  c_am->add_option("--d", am.d, "Tensor power")->capture_default_str();
  c_am->add_option("--word", am.word, "Free part; letters 1..K are U_k, K+1..2K their transposes")->required();
  c_am->add_option("--perm", am.perm, "Permutation part in 1-based one-line notation (default identity)");
  c_am->add_option("--K", am.K, "Number of independent unitaries")->capture_default_str();
  c_am->add_option("--dims", am.dims, "Strictly increasing matrix sizes")->delimiter(',')->capture_default_str();
  c_am->add_option("--samples", am.samples, "Samples per size")->capture_default_str();
  add_format(c_am, am.c, "csv");
  add_seed(c_am, am.c);
  add_threads(c_am, am.c);

  NormArgs nd;
  auto* c_nd = app.add_subcommand("normdemo", "Operator norm of sum_l U_l (x) V_l");
  c_nd->add_option("--L", nd.L, "Number of pairs")->capture_default_str();
  c_nd->add_option("--N", nd.N, "Matrix size (N^2 <= 4096)")->capture_default_str();
  c_nd->add_option("--mode", nd.mode, "haar or conjugate")->check(CLI::IsMember({"haar", "conjugate"}))->capture_default_str();
  c_nd->add_option("--seeds", nd.seeds, "Number of runs")->capture_default_str();
  add_format(c_nd, nd.c, "csv");
  add_seed(c_nd, nd.c);

  Common self;
  auto* c_self = app.add_subcommand("selftest", "Check the exact identities on seeded inputs");
  add_format(c_self, self);
  add_seed(c_self, self);

  std::string format = "json";
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  auto fail = [&](int code, const std::string& kind, const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    if (format == "json") std::cout << json{{"error", kind}, {"message", msg}, {"exit_code", code}}.dump() << "\n";
    return code;
  };
  try {
    if (c_trace->parsed()) format = trace.c.format, run_trace(trace);
    else if (c_inv->parsed()) format = inv.c.format, run_invariants(inv);
    else if (c_mob->parsed()) format = mob.c.format, run_mobius(mob);
    else if (c_dec->parsed()) format = dec.c.format, run_decompose(dec);
    else if (c_pred->parsed()) format = pred.c.format, run_predict(pred);
    else if (c_mc->parsed()) format = mc.c.format, run_mc(mc);
    else if (c_lim->parsed()) format = lim.c.format, run_limit(lim);
    else if (c_chr->parsed()) format = chr.c.format, run_character(chr);
    else if (c_am->parsed()) format = am.c.format, run_amalgam(am);
    else if (c_nd->parsed()) format = nd.c.format, run_normdemo(nd);
    else if (c_self->parsed()) return format = self.format, run_selftest(self);
  } catch (const InvalidArgument& e) {
    return fail(kInvalid, "invalid_argument", e.what());
  } catch (const ResourceLimit& e) {
    return fail(kResource, "resource_limit", e.what());
  } catch (const NumericalFailure& e) {
    return fail(kNumerical, "numerical_failure", e.what());
  } catch (const std::exception& e) {
    return fail(kNumerical, "numerical_failure", e.what());
  }
  return kOk;
}

// Copyright 2026 The qdb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qdb: detailed-balance analysis of quantum channels from spec files.
// Exit status: 0 check passed, 1 check failed, 2 bad input.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdb/factories.hpp"
#include "qdb/io.hpp"
#include "qdb/qdb.hpp"

using namespace qdb;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kInputError = 2;

struct Common {
  std::string spec;
  bool json = false;
  std::optional<double> rank_tol;
  std::optional<double> residual_tol;

  void attach(CLI::App* app, bool spec_required = true) {
    auto* opt = app->add_option("spec", spec, "channel spec file");
    if (spec_required) opt->required();
    app->add_flag("--json", json, "machine-readable output");
    app->add_option("--rank-tol", rank_tol, "rank tolerance (default 1e-9)");
    app->add_option("--residual-tol", residual_tol, "residual tolerance (default 1e-8)");
  }

  Tolerances tolerances(const ChannelSpec& s) const {
    Tolerances t = s.options.tolerances();
    if (rank_tol) t.rank = *rank_tol;
    if (residual_tol) t.residual = *residual_tol;
    return t;
  }
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::parse_error, "cannot write " + path);
  out << text;
}

json tolerances_json(const Tolerances& t) { return {{"rank", t.rank}, {"residual", t.residual}}; }

std::string tolerance_line(const Tolerances& t) {
  return "tolerances: rank " + format_double(t.rank) + ", residual " + format_double(t.residual) + "\n";
}

// ---------------------------------------------------------------------------

int cmd_analyze(const Common& c, std::optional<int> max_level) {
  const ChannelSpec spec = load_spec(c.spec);
  const KrausSet k = spec_kraus(spec);
  const StateDensity rho = spec_state(spec, k);
  VerdictOptions opt;
  opt.tol = c.tolerances(spec);
  opt.max_level = max_level.value_or(spec.options.max_level);
  const auto r = detailed_balance_verdict(k, rho, opt);
  if (c.json)
    std::cout << report_to_json(r.report).dump(2) << "\n";
  else
    std::cout << render_text(r.report);
  return r.report.verdict() ? kPass : kFail;
}

int cmd_reverse(const Common& c, const std::string& mode, int depth, const std::string& output) {
  const ChannelSpec spec = load_spec(c.spec);
  const Tolerances tol = c.tolerances(spec);
  const KrausSet k = spec_kraus(spec);
  const StateDensity rho = spec_state(spec, k);

  KrausSet forward = k;
  KrausSet reversed = k;
  std::string classification;
  if (mode == "crooks") {
    reversed = crooks_dual(k, rho, tol);
    classification = to_string(classify(reversed, tol.residual));
  } else {
    const auto orth = orthogonalize_kraus(k, rho, Normalization::first_entry, tol);
    forward = orth.kraus;
    const auto rk = reversed_kraus(forward, orth.correlation, tol);
    reversed = rk.kraus;
    classification = to_string(rk.classification);
    if (!is_channel(rk.classification))
      std::cerr << "warning: reversed map is " << classification << ", not a channel\n";
  }
  const double crooks = crooks_check(forward, reversed, rho, depth, tol);
  const bool ok = crooks < tol.residual;

  ChannelSpec out;
  out.dimension = k.d();
  out.kraus = reversed.ops();
  out.rho0 = rho.rho();
  out.options = spec.options;
  write_text(output, dump_spec(out));

  // Report goes to stderr when the reversed channel went to stdout.
  std::ostream& os = (output.empty() || output == "-") ? std::cerr : std::cout;
  if (c.json) {
    os << json{{"mode", mode}, {"depth", depth}, {"classification", classification}, {"crooks_residual", crooks},
               {"verdict", ok}, {"tolerances", tolerances_json(tol)}}
              .dump(2)
       << "\n";
  } else {
    os << "reverse mode " << mode << ": " << classification << "\n"
       << "crooks check m<=" << depth << ": " << format_double(crooks) << (ok ? " ok" : " FAIL") << "\n"
       << tolerance_line(tol);
  }
  return ok ? kPass : kFail;
}

// Deterministic Hermitian probe for the power-dilation check.
ComplexMatrix probe(Eigen::Index d) {
  ComplexMatrix a(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = 0; k < d; ++k) {
      const double s = 1.0 + static_cast<double>(j + k);
      a(j, k) = cplx(1.0 / s, static_cast<double>(j - k) / (s * s));
    }
  return a;
}

int cmd_stinespring(const Common& c, std::optional<int> max_level) {
  const ChannelSpec spec = load_spec(c.spec);
  const Tolerances tol = c.tolerances(spec);
  const KrausSet k = spec_kraus(spec);
  const int levels = max_level.value_or(spec.options.max_level);
  const SubproductSystem s = build_subproduct(k, levels, tol);
  const ComplexMatrix a = probe(k.d());
  bool ok = true;
  json rows = json::array();
  std::string text = "subproduct system, n = " + std::to_string(k.n()) + ", d = " + std::to_string(k.d()) + "\n";
  for (int m = 1; m <= levels; ++m) {
    double inclusion = 0.0;
    for (int l = 1; l < m; ++l) inclusion = std::max(inclusion, check_subproduct_inclusion(s, l, m - l));
    const auto pd = verify_power_dilation(k, s, m, a, tol);
    const bool level_ok = inclusion < tol.residual && pd.residual < tol.residual;
    ok = ok && level_ok;
    rows.push_back({{"level", m},
                    {"rank", s.rank(m)},
                    {"inclusion_residual", inclusion},
                    {"power_dilation_residual", pd.residual},
                    {"isometry_residual", pd.isometry_residual},
                    {"first_word_defect", pd.first_word_defect},
                    {"hypothesis_ok", pd.hypothesis_ok}});
    text += "  m=" + std::to_string(m) + "  rank=" + std::to_string(s.rank(m)) + "  inclusion=" +
            format_double(inclusion) + "  dilation=" + format_double(pd.residual) + "  isometry=" +
            format_double(pd.isometry_residual) + (pd.hypothesis_ok ? "" : "  (e_1^m not in H_m)") + "\n";
  }
  if (c.json)
    std::cout << json{{"levels", rows}, {"verdict", ok}, {"tolerances", tolerances_json(tol)}}.dump(2) << "\n";
  else
    std::cout << text << tolerance_line(tol);
  return ok ? kPass : kFail;
}

ComplexMatrix load_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
  if (j.is_object() && j.contains("F")) return matrix_from_json(j["F"], path + ":F");
  return matrix_from_json(j, path);
}

int cmd_qgroup(const Common& c, const std::string& relation, const std::string& f_path) {
  const ChannelSpec spec = load_spec(c.spec);
  const Tolerances tol = c.tolerances(spec);
  ComplexMatrix w;
  Eigen::Index n = 0;
  if (spec.dilation) {
    w = *spec.dilation;
    detail::require(!spec.kraus.empty() && w.rows() % spec.dimension == 0, ErrorCode::dimension_mismatch,
                    "dilation does not match the declared dimension");
    n = w.rows() / spec.dimension;
  } else {
    const KrausSet k = spec_kraus(spec);
    w = dilation_from_kraus(k, tol.residual).W;
    n = k.n();
  }
  ComplexMatrix f = identity(n);
  if (!f_path.empty())
    f = load_matrix_file(f_path);
  else if (spec.F)
    f = *spec.F;
  const RelationReport rep = relation == "bu" ? bu_relations_check(w, f, tol.residual) : au_relations_check(w, f, tol.residual);
  if (c.json) {
    json rs = json::array();
    for (const auto& r : rep.residuals)
      rs.push_back({{"name", r.name}, {"norm", r.norm}, {"defect_rank", r.defect_rank}, {"off_defect", r.off_defect}});
    std::cout << json{{"relation", relation}, {"verdict", rep.verdict}, {"residuals", rs},
                      {"tolerances", tolerances_json(tol)}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << relation << " relations: " << (rep.verdict ? "satisfied" : "violated") << "\n";
    for (const auto& r : rep.residuals)
      std::cout << "  " << r.name << "  norm=" << format_double(r.norm) << "  defect_rank=" << r.defect_rank
                << "  off_defect=" << format_double(r.off_defect) << "\n";
    std::cout << tolerance_line(tol);
  }
  return rep.verdict ? kPass : kFail;
}

int cmd_classical(const Common& c, bool reverse) {
  const ChannelSpec spec = load_spec(c.spec);
  const Tolerances tol = c.tolerances(spec);
  detail::parse_require(spec.classical.has_value(), "spec has no \"classical\" section");
  const ClassicalChain chain(spec.classical->M, spec.classical->pi);
  const auto r = classical_reverse(chain, tol.residual);
  if (c.json) {
    json j{{"detailed_balance", r.db}, {"residual", r.residual}, {"tolerances", tolerances_json(tol)}};
    if (reverse) j["Mhat"] = real_matrix_to_json(r.Mhat);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "classical detailed balance: " << (r.db ? "yes" : "no") << "  residual=" << format_double(r.residual)
              << "\n";
    if (reverse) {
      std::cout << "reversed chain:\n";
      for (Eigen::Index i = 0; i < r.Mhat.rows(); ++i) {
        std::cout << " ";
        for (Eigen::Index j = 0; j < r.Mhat.cols(); ++j) std::cout << " " << format_double(r.Mhat(i, j));
        std::cout << "\n";
      }
    }
    std::cout << tolerance_line(tol);
  }
  return r.db ? kPass : kFail;
}

// ---------------------------------------------------------------------------
// gen-example

std::map<std::string, double> parse_params(const std::vector<std::string>& items,
                                           const std::map<std::string, double>& defaults) {
  std::map<std::string, double> out = defaults;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    detail::parse_require(eq != std::string::npos, "parameter '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    detail::parse_require(defaults.count(key) == 1, "unknown parameter '" + key + "'");
    try {
      std::size_t used = 0;
      out[key] = std::stod(item.substr(eq + 1), &used);
      detail::parse_require(used == item.size() - eq - 1, "bad number in '" + item + "'");
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::parse_error, "bad number in '" + item + "'");
    }
  }
  return out;
}

ChannelSpec gen_example(const std::string& name, const std::vector<std::string>& items) {
  ChannelSpec s;
  if (name == "commuting_db") {
    const auto p = parse_params(items, {{"theta", M_PI / 6}});
    const auto ex = commuting_db_channel(p.at("theta"));
    s.dimension = 2;
    s.kraus = ex.kraus.ops();
    s.rho0 = ex.rho0.rho();
  } else if (name == "gad") {
    const auto p = parse_params(items, {{"p", 0.75}, {"gamma", 0.5}});
    const auto ex = gad_channel(p.at("p"), p.at("gamma"));
    s.dimension = 2;
    s.kraus = ex.kraus.ops();
    s.rho0 = ex.rho0.rho();
  } else if (name == "measurement") {
    // A = sigma_z on the system, B = t [[b0, 1], [1, b1]] on the bath.
    const auto p = parse_params(items, {{"t", 0.7}, {"b0", 0.4}, {"b1", -0.3}});
    ComplexMatrix a = identity(2), b(2, 2);
    a(1, 1) = -1.0;
    b << p.at("b0"), 1.0, 1.0, p.at("b1");
    b *= p.at("t");
    const KrausSet k = measurement_channel(a, b);
    detail::require(commutation_residual(k) < 1e-10, ErrorCode::invalid_kraus, "measurement Kraus operators do not commute");
    s.dimension = 2;
    s.kraus = k.ops();
    s.rho0 = identity(2) / 2.0;
    s.dilation = unitary_exp(tensor_product(b, a));
  } else if (name == "suq2") {
    const auto p = parse_params(items, {{"q", 0.5}, {"N", 6}});
    const double levels = p.at("N");
    detail::parse_require(levels == std::floor(levels) && levels >= 2, "N must be an integer >= 2");
    const auto g = suq2_generators(p.at("q"), static_cast<Eigen::Index>(levels));
    s.dimension = g.a.rows();
    s.kraus = g.kraus.ops();
    s.F = g.F;
    s.Q = g.F.adjoint() * g.F;
    s.q_normalization = Normalization::first_entry;
    s.dilation = g.W;
  } else if (name == "classical") {
    // Two-state chain with flip rates a (0 -> 1) and b (1 -> 0).
    const auto p = parse_params(items, {{"a", 0.3}, {"b", 0.2}});
    const double a = p.at("a"), b = p.at("b");
    ClassicalSpec c;
    c.M.resize(2, 2);
    c.M << 1 - a, b, a, 1 - b;
    c.pi.resize(2);
    c.pi << b / (a + b), a / (a + b);
    ClassicalChain(c.M, c.pi);  // validates
    s.classical = c;
  } else {
    throw Error(ErrorCode::unknown_example, "unknown example '" + name + "'");
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qdb: quantum detailed balance checks"};
  app.require_subcommand(1);

  Common analyze_c, reverse_c, stine_c, qgroup_c, classical_c;
  std::optional<int> analyze_level, stine_level;
  std::string mode = "qsphere", output, relation = "au", f_path, example;
  int depth = 2;
  bool reverse_chain = false;
  std::vector<std::string> params;

  auto* analyze = app.add_subcommand("analyze", "full detailed-balance pipeline");
  analyze_c.attach(analyze);
  analyze->add_option("--max-level", analyze_level, "highest level M")->check(CLI::PositiveNumber);

  auto* reverse = app.add_subcommand("reverse", "emit the reversed channel");
  reverse_c.attach(reverse);
  reverse->add_option("--mode", mode, "qsphere or crooks")->check(CLI::IsMember({"qsphere", "crooks"}));
  reverse->add_option("--depth", depth, "Crooks check depth m")->check(CLI::PositiveNumber);
  reverse->add_option("-o,--output", output, "output spec file (default stdout)");

  auto* stine = app.add_subcommand("stinespring", "subproduct system and power dilations");
  stine_c.attach(stine);
  stine->add_option("--max-level", stine_level, "highest level M")->check(CLI::PositiveNumber);

  auto* qgroup = app.add_subcommand("qgroup-check", "A_u / B_u relations on the dilation");
  qgroup_c.attach(qgroup);
  qgroup->add_option("--relation", relation, "au or bu")->check(CLI::IsMember({"au", "bu"}));
  qgroup->add_option("--F", f_path, "file holding F as a matrix or a spec with an F field");

  auto* classical = app.add_subcommand("classical", "classical chain reversal");
  classical_c.attach(classical);
  classical->add_flag("--reverse", reverse_chain, "print the reversed chain");

  auto* gen = app.add_subcommand("gen-example", "write an example spec");
  gen->add_option("--name", example, "measurement, gad, commuting_db, suq2 or classical")->required();
  gen->add_option("--params", params, "key=value overrides")->delimiter(',');
  gen->add_option("-o,--output", output, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(analyze_c, analyze_level);
    if (reverse->parsed()) return cmd_reverse(reverse_c, mode, depth, output);
    if (stine->parsed()) return cmd_stinespring(stine_c, stine_level);
    if (qgroup->parsed()) return cmd_qgroup(qgroup_c, relation, f_path);
    if (classical->parsed()) return cmd_classical(classical_c, reverse_chain);
    if (gen->parsed()) {
      write_text(output, dump_spec(gen_example(example, params)));
      return kPass;
    }
  } catch (const Error& e) {
    std::cerr << "qdb: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "qdb: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

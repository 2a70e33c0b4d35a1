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

#pragma once

// JSON channel spec files and report serialization.
//
//   {
//     "format": "qdb-channel", "version": 1, "dimension": 2,
//     "kraus": [ [[[re,im],[re,im]], [[re,im],[re,im]]], ... ],
//     "rho0": [[[re,im], ...], ...],                        (optional)
//     "Q": {"matrix": ..., "normalization": "first_entry"}, (optional)
//     "F": ..., "dilation": ...,                            (optional)
//     "classical": {"M": [[..]], "pi": [..]},               (optional)
//     "options": {"max_level": 4, "rank_tol": 1e-9, "residual_tol": 1e-8}
//   }
//
// Matrix entries are [re, im] pairs; a bare number is read as a real entry.

#include "qdb/equilibrium.hpp"
#include "qdb/reversal.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

namespace qdb {

using json = nlohmann::json;

inline constexpr const char* kSpecFormat = "qdb-channel";
inline constexpr int kSpecVersion = 1;

struct SpecOptions {
  int max_level = 4;
  double rank_tol = Tolerances{}.rank;
  double residual_tol = Tolerances{}.residual;

  Tolerances tolerances() const {
    Tolerances t;
    t.rank = rank_tol;
    t.residual = residual_tol;
    return t;
  }
};

struct ClassicalSpec {
  Eigen::MatrixXd M;
  Eigen::VectorXd pi;
};

struct ChannelSpec {
  Eigen::Index dimension = 0;
  std::vector<ComplexMatrix> kraus;
  std::optional<ComplexMatrix> rho0;
  std::optional<ComplexMatrix> Q;
  Normalization q_normalization = Normalization::trace_balanced;
  std::optional<ComplexMatrix> F;
  std::optional<ComplexMatrix> dilation;
  std::optional<ClassicalSpec> classical;
  SpecOptions options;
};

// ---------------------------------------------------------------------------
// Matrices

inline json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json real_matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

inline void parse_require(bool cond, const std::string& msg) {
  if (!cond) throw Error(ErrorCode::parse_error, msg);
}

inline cplx entry_from_json(const json& e, const std::string& where) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  parse_require(e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number(),
                where + ": entries must be numbers or [re, im] pairs");
  return {e[0].get<double>(), e[1].get<double>()};
}

}  // namespace detail

inline ComplexMatrix matrix_from_json(const json& j, const std::string& where) {
  detail::parse_require(j.is_array() && !j.empty(), where + ": expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  detail::parse_require(j[0].is_array() && !j[0].empty(), where + ": rows must be nonempty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    detail::parse_require(row.is_array() && static_cast<Eigen::Index>(row.size()) == cols, where + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = detail::entry_from_json(row[static_cast<std::size_t>(c)], where);
  }
  detail::parse_require(all_finite(m), where + ": non-finite entry");
  return m;
}

inline Eigen::MatrixXd real_matrix_from_json(const json& j, const std::string& where) {
  const ComplexMatrix m = matrix_from_json(j, where);
  detail::parse_require(m.imag().cwiseAbs().maxCoeff() == 0.0, where + ": expected a real matrix");
  return m.real();
}

inline Normalization normalization_from_string(const std::string& s) {
  if (s == "trace_balanced") return Normalization::trace_balanced;
  if (s == "first_entry") return Normalization::first_entry;
  if (s == "raw") return Normalization::raw;
  throw Error(ErrorCode::parse_error, "unknown normalization '" + s + "'");
}

// ---------------------------------------------------------------------------
// Spec files

inline json spec_to_json(const ChannelSpec& s) {
  json j;
  j["format"] = kSpecFormat;
  j["version"] = kSpecVersion;
  if (!s.kraus.empty()) {
    j["dimension"] = s.dimension;
    json ks = json::array();
    for (const auto& k : s.kraus) ks.push_back(matrix_to_json(k));
    j["kraus"] = ks;
  }
  if (s.rho0) j["rho0"] = matrix_to_json(*s.rho0);
  if (s.Q) j["Q"] = {{"matrix", matrix_to_json(*s.Q)}, {"normalization", to_string(s.q_normalization)}};
  if (s.F) j["F"] = matrix_to_json(*s.F);
  if (s.dilation) j["dilation"] = matrix_to_json(*s.dilation);
  if (s.classical) {
    json pi = json::array();
    for (Eigen::Index i = 0; i < s.classical->pi.size(); ++i) pi.push_back(s.classical->pi(i));
    j["classical"] = {{"M", real_matrix_to_json(s.classical->M)}, {"pi", pi}};
  }
  j["options"] = {{"max_level", s.options.max_level},
                  {"rank_tol", s.options.rank_tol},
                  {"residual_tol", s.options.residual_tol}};
  return j;
}

inline ChannelSpec spec_from_json(const json& j) {
  using detail::parse_require;
  parse_require(j.is_object(), "spec must be a JSON object");
  parse_require(j.value("format", std::string()) == kSpecFormat, "missing or wrong \"format\" field");
  parse_require(j.contains("version") && j["version"].is_number_integer(), "missing \"version\"");
  parse_require(j["version"].get<int>() == kSpecVersion,
                "unsupported version " + std::to_string(j["version"].get<int>()));
  ChannelSpec s;
  if (j.contains("options")) {
    const json& o = j["options"];
    parse_require(o.is_object(), "\"options\" must be an object");
    s.options.max_level = o.value("max_level", s.options.max_level);
    s.options.rank_tol = o.value("rank_tol", s.options.rank_tol);
    s.options.residual_tol = o.value("residual_tol", s.options.residual_tol);
    parse_require(s.options.max_level >= 1, "options.max_level must be at least 1");
  }
  if (j.contains("classical")) {
    const json& c = j["classical"];
    parse_require(c.is_object() && c.contains("M") && c.contains("pi"), "\"classical\" needs M and pi");
    ClassicalSpec cs;
    cs.M = real_matrix_from_json(c["M"], "classical.M");
    parse_require(c["pi"].is_array(), "classical.pi must be an array");
    cs.pi.resize(static_cast<Eigen::Index>(c["pi"].size()));
    for (std::size_t i = 0; i < c["pi"].size(); ++i) {
      parse_require(c["pi"][i].is_number(), "classical.pi entries must be numbers");
      cs.pi(static_cast<Eigen::Index>(i)) = c["pi"][i].get<double>();
    }
    s.classical = std::move(cs);
  }
  if (j.contains("kraus")) {
    parse_require(j.contains("dimension") && j["dimension"].is_number_integer(), "missing \"dimension\"");
    s.dimension = j["dimension"].get<Eigen::Index>();
    parse_require(s.dimension > 0, "dimension must be positive");
    parse_require(j["kraus"].is_array(), "\"kraus\" must be an array");
    for (std::size_t k = 0; k < j["kraus"].size(); ++k) {
      ComplexMatrix op = matrix_from_json(j["kraus"][k], "kraus[" + std::to_string(k) + "]");
      parse_require(op.rows() == s.dimension && op.cols() == s.dimension,
                    "kraus[" + std::to_string(k) + "] does not match the declared dimension");
      s.kraus.push_back(std::move(op));
    }
  } else {
    parse_require(s.classical.has_value(), "spec has neither \"kraus\" nor \"classical\"");
  }
  if (j.contains("rho0")) s.rho0 = matrix_from_json(j["rho0"], "rho0");
  if (j.contains("Q")) {
    const json& q = j["Q"];
    parse_require(q.is_object() && q.contains("matrix"), "\"Q\" needs a \"matrix\"");
    s.Q = matrix_from_json(q["matrix"], "Q.matrix");
    s.q_normalization = normalization_from_string(q.value("normalization", std::string("trace_balanced")));
  }
  if (j.contains("F")) s.F = matrix_from_json(j["F"], "F");
  if (j.contains("dilation")) s.dilation = matrix_from_json(j["dilation"], "dilation");
  return s;
}

inline ChannelSpec parse_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, e.what());
  } catch (const json::type_error& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
  try {
    return spec_from_json(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
}

inline ChannelSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

inline std::string dump_spec(const ChannelSpec& s) { return spec_to_json(s).dump(2) + "\n"; }

inline KrausSet spec_kraus(const ChannelSpec& s) {
  detail::parse_require(!s.kraus.empty(), "spec has no Kraus operators");
  return KrausSet(s.kraus);
}

// The declared rho0, or the channel's fixed point when none is given.
inline StateDensity spec_state(const ChannelSpec& s, const KrausSet& k) {
  if (s.rho0) return StateDensity(*s.rho0, 1e-10);
  return stationary_state(k);
}

// ---------------------------------------------------------------------------
// Reports

inline json report_to_json(const AnalysisReport& r) {
  json j;
  j["verdict"] = r.verdict();
  j["reason"] = r.reason();
  j["classification"] = r.classification;
  j["tolerances"] = {{"rank", r.tolerances.rank}, {"residual", r.tolerances.residual}, {"max_dim", r.tolerances.max_dim}};
  j["max_level"] = r.max_level;
  j["lambdas"] = r.lambdas;
  j["Q_trace_balanced"] = r.q_trace_balanced;
  j["Q_first_entry"] = r.q_first_entry;
  j["trace_balance_scale"] = r.trace_balance_scale;
  j["subproduct_ranks"] = r.ranks;
  json checks = json::array();
  for (const auto& c : r.checks) {
    json cj;
    cj["name"] = c.name;
    cj["level"] = c.level;
    json res = json::object();
    for (const auto& [name, value] : c.residuals) res[name] = value;
    cj["residuals"] = res;
    cj["tolerance"] = c.tolerance;
    cj["verdict"] = c.verdict;
    cj["defect_rank"] = c.defect_rank;
    json hyp = json::object();
    for (const auto& [name, ok] : c.hypotheses) hyp[name] = ok;
    cj["hypotheses"] = hyp;
    if (!c.reason.empty()) cj["reason"] = c.reason;
    if (!c.note.empty()) cj["note"] = c.note;
    if (c.informational) cj["informational"] = true;
    checks.push_back(std::move(cj));
  }
  j["checks"] = checks;
  return j;
}

}  // namespace qdb

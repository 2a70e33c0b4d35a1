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

#include "qdb/matcore.hpp"

#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace qdb {

struct CheckRecord {
  std::string name;
  int level = 0;
  std::vector<std::pair<std::string, double>> residuals;
  double tolerance = 0.0;
  bool verdict = false;
  Eigen::Index defect_rank = 0;
  std::vector<std::pair<std::string, bool>> hypotheses;
  std::string reason;  // set whenever verdict is false
  std::string note;
  bool informational = false;  // reported but not part of the overall verdict
};

struct AnalysisReport {
  std::vector<CheckRecord> checks;
  Tolerances tolerances;
  int max_level = 0;
  std::string classification;
  std::vector<double> lambdas;
  std::vector<std::vector<double>> q_trace_balanced;
  std::vector<std::vector<double>> q_first_entry;
  double trace_balance_scale = 0.0;
  std::vector<Eigen::Index> ranks;  // n_1 .. n_M

  void add(CheckRecord rec) { checks.push_back(std::move(rec)); }

  bool verdict() const {
    bool any = false;
    for (const auto& c : checks) {
      if (c.informational) continue;
      any = true;
      if (!c.verdict) return false;
    }
    return any;
  }

  // Reason of the first failing check in pipeline order, empty on success.
  std::string reason() const {
    for (const auto& c : checks)
      if (!c.informational && !c.verdict) return c.reason;
    return {};
  }

  const CheckRecord* find(const std::string& name, int level) const {
    for (const auto& c : checks)
      if (c.name == name && c.level == level) return &c;
    return nullptr;
  }
};

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", x);
  return buf;
}

inline std::string render_text(const AnalysisReport& r) {
  std::ostringstream os;
  os << "detailed balance: " << (r.verdict() ? "yes" : "no");
  if (!r.verdict()) os << " (" << r.reason() << ")";
  os << "\nclassification: " << r.classification << "\n";
  os << "tolerances: rank " << format_double(r.tolerances.rank) << ", residual "
     << format_double(r.tolerances.residual) << ", max level " << r.max_level << "\n";
  if (!r.lambdas.empty()) {
    os << "correlation spectrum:";
    for (double l : r.lambdas) os << " " << format_double(l);
    os << "\ntrace-balance scale: " << format_double(r.trace_balance_scale) << "\n";
  }
  if (!r.ranks.empty()) {
    os << "subproduct ranks:";
    for (auto n : r.ranks) os << " " << n;
    os << "\n";
  }
  for (const auto& c : r.checks) {
    os << "  [" << (c.verdict ? "ok  " : "FAIL") << "] " << c.name;
    if (c.level > 0) os << " m=" << c.level;
    for (const auto& [name, value] : c.residuals) os << "  " << name << "=" << format_double(value);
    if (c.defect_rank > 0) os << "  defect_rank=" << c.defect_rank;
    for (const auto& [name, ok] : c.hypotheses)
      if (!ok) os << "  (" << name << " not satisfied)";
    if (c.informational) os << "  (info)";
    if (!c.note.empty()) os << "  " << c.note;
    os << "\n";
  }
  return os.str();
}

}  // namespace qdb

// Copyright 2026 The dpvote Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPVOTE_IO_H_
#define DPVOTE_IO_H_

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dpvote/accountant.hpp"
#include "dpvote/ballots.hpp"
#include "dpvote/mechanisms.hpp"
#include "dpvote/metrics.hpp"
#include "dpvote/simulation.hpp"

namespace dpvote {

using Json = nlohmann::ordered_json;

// Input-format violations carry the offending 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// ---------------------------------------------------------------------------
// Ballot CSV. Header: query_id,teacher_id,l0,...,l{k-1}; one row per
// (query, teacher) pair; bits are 0/1; rows of one query need not be
// contiguous. Voters within a query are ordered by teacher_id.
// ---------------------------------------------------------------------------

struct BallotDataset {
  std::vector<std::int64_t> query_ids;  // ascending
  std::vector<BallotMatrix> ballots;    // aligned with query_ids
};

namespace internal {

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

inline std::int64_t parse_int_field(const std::string& field,
                                    std::size_t line_no,
                                    const char* what) {
  try {
    std::size_t consumed = 0;
    const long long value = std::stoll(field, &consumed);
    if (consumed != field.size()) throw std::invalid_argument(field);
    return value;
  } catch (const std::exception&) {
    throw ParseError(line_no,
                     std::string("expected integer ") + what + ", got '" +
                         field + "'");
  }
}

}  // namespace internal

inline BallotDataset read_ballot_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    return BallotDataset{};  // empty input: zero queries
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = internal::split_csv_row(line);
  if (header.size() < 3 || header[0] != "query_id" ||
      header[1] != "teacher_id") {
    throw ParseError(line_no,
                     "header must be query_id,teacher_id,l0,...,l{k-1}");
  }
  const int k = static_cast<int>(header.size()) - 2;
  for (int i = 0; i < k; ++i) {
    if (header[2 + i] != "l" + std::to_string(i)) {
      throw ParseError(line_no, "label column " + std::to_string(i) +
                                    " must be named l" + std::to_string(i));
    }
  }

  // teacher_id -> ballot bits, grouped per query; maps keep both orderings
  // deterministic regardless of row order in the file.
  std::map<std::int64_t, std::map<std::int64_t, std::vector<std::uint8_t>>>
      rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = internal::split_csv_row(line);
    if (static_cast<int>(fields.size()) != k + 2) {
      throw ParseError(line_no, "expected " + std::to_string(k + 2) +
                                    " fields, got " +
                                    std::to_string(fields.size()));
    }
    const std::int64_t qid =
        internal::parse_int_field(fields[0], line_no, "query_id");
    const std::int64_t tid =
        internal::parse_int_field(fields[1], line_no, "teacher_id");
    std::vector<std::uint8_t> bits(k);
    for (int i = 0; i < k; ++i) {
      const std::string& f = fields[2 + i];
      if (f == "0") {
        bits[i] = 0;
      } else if (f == "1") {
        bits[i] = 1;
      } else {
        throw ParseError(line_no, "ballot bits must be 0 or 1, got '" + f +
                                      "' in column l" + std::to_string(i));
      }
    }
    auto [it, inserted] = rows[qid].emplace(tid, std::move(bits));
    if (!inserted) {
      throw ParseError(line_no, "duplicate teacher_id " + std::to_string(tid) +
                                    " for query_id " + std::to_string(qid));
    }
  }

  BallotDataset dataset;
  for (const auto& [qid, voters] : rows) {
    std::vector<std::vector<int>> matrix_rows;
    matrix_rows.reserve(voters.size());
    for (const auto& [tid, bits] : voters) {
      matrix_rows.emplace_back(bits.begin(), bits.end());
    }
    dataset.query_ids.push_back(qid);
    dataset.ballots.push_back(BallotMatrix::from_rows(matrix_rows));
  }
  return dataset;
}

inline BallotDataset read_ballot_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ballot CSV: " + path);
  return read_ballot_csv(in);
}

inline void write_ballot_csv(std::ostream& out, const BallotDataset& data) {
  if (data.ballots.empty()) {
    out << "query_id,teacher_id,l0\n";
    return;
  }
  const int k = data.ballots.front().labels();
  out << "query_id,teacher_id";
  for (int i = 0; i < k; ++i) out << ",l" << i;
  out << "\n";
  for (std::size_t q = 0; q < data.ballots.size(); ++q) {
    const BallotMatrix& m = data.ballots[q];
    for (int j = 0; j < m.voters(); ++j) {
      out << data.query_ids[q] << "," << j;
      for (int i = 0; i < k; ++i) out << "," << static_cast<int>(m.at(j, i));
      out << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Outcome JSONL: one object per query, keys in fixed order so identical runs
// serialize to identical bytes.
// ---------------------------------------------------------------------------

inline Json outcome_json(std::int64_t query_id, const QueryOutcome& outcome,
                         double eps_dp_so_far) {
  Json labels = Json::array();
  for (std::int8_t r : outcome.released) {
    if (r < 0) {
      labels.push_back(nullptr);
    } else {
      labels.push_back(static_cast<int>(r));
    }
  }
  Json j;
  j["query_id"] = query_id;
  j["answered"] = outcome.answered;
  j["labels"] = std::move(labels);
  j["gap"] = outcome.gaps;
  j["eps_dp_so_far"] = eps_dp_so_far;
  return j;
}

// ---------------------------------------------------------------------------
// Ledger JSON: per-order accumulated RDP plus the budget it is tracked
// against. Round-trips through BudgetLedger::restore.
// ---------------------------------------------------------------------------

inline Json ledger_json(const BudgetLedger& ledger) {
  Json j;
  j["orders"] = ledger.grid().orders();
  j["eps"] = ledger.accumulated().eps;
  j["budget"] = {{"epsilon", ledger.budget().epsilon},
                 {"delta", ledger.budget().delta}};
  return j;
}

inline BudgetLedger ledger_from_json(const Json& j) {
  try {
    OrderGrid grid(j.at("orders").get<std::vector<double>>());
    Budget budget{j.at("budget").at("epsilon").get<double>(),
                  j.at("budget").at("delta").get<double>()};
    return BudgetLedger::restore(std::move(grid), budget,
                                 j.at("eps").get<std::vector<double>>());
  } catch (const Json::exception& e) {
    throw std::runtime_error(std::string("corrupt ledger JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Metric report JSON: {per_label: {acc,bac,auc,map}, macro: {...},
// answered_fraction}; undefined metrics serialize as null.
// ---------------------------------------------------------------------------

namespace internal {

inline Json metric_or_null(const Metric& m) {
  if (m) return *m;
  return nullptr;
}

}  // namespace internal

inline Json metric_report_json(const MetricReport& report) {
  Json per_label;
  Json acc = Json::array(), bac = Json::array(), auc = Json::array(),
       map = Json::array();
  for (const LabelMetrics& m : report.per_label) {
    acc.push_back(internal::metric_or_null(m.acc));
    bac.push_back(internal::metric_or_null(m.bac));
    auc.push_back(internal::metric_or_null(m.auc));
    map.push_back(internal::metric_or_null(m.ap));
  }
  per_label["acc"] = std::move(acc);
  per_label["bac"] = std::move(bac);
  per_label["auc"] = std::move(auc);
  per_label["map"] = std::move(map);
  Json j;
  j["per_label"] = std::move(per_label);
  j["macro"] = {{"acc", internal::metric_or_null(report.macro.acc)},
                {"bac", internal::metric_or_null(report.macro.bac)},
                {"auc", internal::metric_or_null(report.macro.auc)},
                {"map", internal::metric_or_null(report.macro.ap)}};
  j["answered_fraction"] = report.answered_fraction;
  return j;
}

// ---------------------------------------------------------------------------
// Plot-ready CSV artifacts.
// ---------------------------------------------------------------------------

inline void write_gap_cdf_csv(std::ostream& out, const EmpiricalCdf& cdf) {
  out << "gap,cdf\n";
  const std::vector<double>& v = cdf.values();
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    out << v[i] << ","
        << static_cast<double>(j) / static_cast<double>(v.size()) << "\n";
    i = j;
  }
}

inline void write_dependency_csv(std::ostream& out,
                                 const DependencyMatrix& matrix) {
  out << "label";
  for (int j = 0; j < matrix.k; ++j) out << ",l" << j;
  out << "\n";
  for (int i = 0; i < matrix.k; ++i) {
    out << "l" << i;
    for (int j = 0; j < matrix.k; ++j) {
      out << ",";
      const std::optional<double> e = matrix.at(i, j);
      if (e) out << *e;  // undefined conditionals stay blank, not 0
    }
    out << "\n";
  }
}

inline void write_sweep_csv(std::ostream& out,
                            const std::vector<SweepPoint>& points) {
  out << "epsilon,answered\n";
  for (const SweepPoint& p : points) {
    out << p.epsilon << "," << p.answered << "\n";
  }
}

// ---------------------------------------------------------------------------
// FNV-1a artifact hashing for run manifests.
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string file_hash_hex(const std::string& path) {
  return hex64(fnv1a64(read_file(path)));
}

// ---------------------------------------------------------------------------
// Run manifest: the full resolved configuration of a run plus hashes of
// everything it read and wrote. Identical manifests (hashes aside) must
// reproduce byte-identical artifacts.
// ---------------------------------------------------------------------------

struct RunManifest {
  std::string subcommand;
  Json config;
  std::uint64_t seed = 0;
  std::vector<std::string> input_paths;
  std::vector<std::string> output_paths;

  Json to_json() const {
    Json j;
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["seed"] = seed;
    j["inputs"] = Json::object();
    for (const std::string& p : input_paths) j["inputs"][p] = file_hash_hex(p);
    j["outputs"] = Json::object();
    for (const std::string& p : output_paths) {
      j["outputs"][p] = file_hash_hex(p);
    }
    return j;
  }
};

}  // namespace dpvote

#endif  // DPVOTE_IO_H_

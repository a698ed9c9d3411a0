#ifndef CADLAB_IO_CSV_HPP
#define CADLAB_IO_CSV_HPP

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cadlab/ecf.hpp"
#include "cadlab/errors.hpp"
#include "cadlab/feature_model.hpp"
#include "cadlab/ood_eval.hpp"

namespace cadlab::io {

// Report tables print reals with 5 decimals.
inline std::string fixed5(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5f", v);
  return buf;
}

// Shortest text that parses back to the same double.
inline std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) { row(header); }

  CsvWriter& row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

// ---- datasets ----------------------------------------------------------------
//
// Line 1: "# blocks: edited=f_<a>..f_<b> unedited=... correlated=..." (empty
// blocks print as "edited=none"). Line 2: column header
// pair_id,environment,label,f_0,...,f_{D-1}. Features use full precision.

inline std::string block_header(const BlockDims& dims) {
  auto range = [](const char* name, std::size_t off, std::size_t n) {
    std::string s = std::string(name) + "=";
    if (n == 0) return s + "none";
    return s + "f_" + std::to_string(off) + "..f_" + std::to_string(off + n - 1);
  };
  return "# blocks: " + range("edited", dims.edited_offset(), dims.edited) + " " +
         range("unedited", dims.unedited_offset(), dims.unedited) + " " +
         range("correlated", dims.correlated_offset(), dims.correlated);
}

inline std::string dataset_csv(std::span<const Sample> samples, const BlockDims& dims) {
  std::ostringstream os;
  os << block_header(dims) << '\n' << "pair_id,environment,label";
  for (std::size_t i = 0; i < dims.total(); ++i) os << ",f_" << i;
  os << '\n';
  for (const auto& s : samples) {
    if (s.pair_id) os << *s.pair_id;
    os << ',' << to_string(s.environment) << ',' << static_cast<int>(s.label);
    for (Eigen::Index i = 0; i < s.features.size(); ++i) os << ',' << exact(s.features[i]);
    os << '\n';
  }
  return os.str();
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<Sample> parse_dataset_csv(const std::string& text, std::size_t dim) {
  std::istringstream in(text);
  std::string line;
  std::vector<Sample> out;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno <= 2) continue;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 3 + dim) {
      throw ValidationError("dataset csv line " + std::to_string(lineno) + ": expected " +
                            std::to_string(3 + dim) + " columns");
    }
    Sample s;
    if (!cells[0].empty()) s.pair_id = std::stoull(cells[0]);
    if (cells[1] == "ORIGINAL") s.environment = Environment::kOriginal;
    else if (cells[1] == "EDITED") s.environment = Environment::kEdited;
    else if (cells[1] == "OOD") s.environment = Environment::kOod;
    else throw ValidationError("dataset csv line " + std::to_string(lineno) + ": bad environment");
    s.label = std::stoi(cells[2]) > 0 ? Label::kPositive : Label::kNegative;
    s.features.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) s.features[static_cast<Eigen::Index>(i)] = std::stod(cells[3 + i]);
    out.push_back(std::move(s));
  }
  return out;
}

// ---- training history ---------------------------------------------------------

inline std::string history_csv(const TrainHistory& history) {
  CsvWriter w({"epoch", "loss_p", "loss_irm", "loss_ocd", "loss_total", "train_acc"});
  for (const auto& r : history) {
    w.row({std::to_string(r.epoch), fixed5(r.prediction_loss), fixed5(r.irm_penalty),
           fixed5(r.ocd_penalty), fixed5(r.total_loss), fixed5(r.train_accuracy)});
  }
  return w.str();
}

// ---- evaluation tables ---------------------------------------------------------

inline std::string table_csv(std::span<const TableRow> rows, bool with_pairs) {
  std::vector<std::string> header = {"variant"};
  if (with_pairs) header.push_back("pairs");
  for (const char* c : {"shift", "seed", "accuracy", "err_p2n", "err_n2p", "norm_e", "norm_u",
                        "norm_r"}) {
    header.push_back(c);
  }
  CsvWriter w(header);
  for (const auto& r : rows) {
    std::vector<std::string> cells = {r.variant};
    if (with_pairs) cells.push_back(std::to_string(r.pairs));
    for (auto& c : std::vector<std::string>{r.shift, std::to_string(r.seed),
                                            fixed5(r.report.accuracy()),
                                            std::to_string(r.report.errors_pos_to_neg),
                                            std::to_string(r.report.errors_neg_to_pos),
                                            fixed5(r.profile.norm_e), fixed5(r.profile.norm_u),
                                            fixed5(r.profile.norm_r)}) {
      cells.push_back(std::move(c));
    }
    w.row(cells);
  }
  return w.str();
}

}  // namespace cadlab::io

#endif  // CADLAB_IO_CSV_HPP

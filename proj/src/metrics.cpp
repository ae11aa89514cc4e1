#include "xmcaug/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "xmcaug/errors.hpp"

namespace xmcaug::metrics {

namespace {

std::string format_score(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", s);
  return buf;
}

void require_depth(const Predictions& pred, std::size_t k) {
  if (k > pred.depth)
    fail("KExceedsPredictionDepth", "k=" + std::to_string(k) +
                                        " but predictions have depth " +
                                        std::to_string(pred.depth));
}

void require_shape(const Predictions& pred, const SparseLabelMatrix& truth) {
  if (pred.n_rows() != truth.n_rows())
    fail("ShapeMismatch", "predictions have " + std::to_string(pred.n_rows()) +
                              " rows, truth has " +
                              std::to_string(truth.n_rows()));
}

bool is_positive(const SparseRow& row, LabelIndex l) {
  auto it = std::lower_bound(
      row.begin(), row.end(), l,
      [](const auto& e, LabelIndex v) { return e.first < v; });
  return it != row.end() && it->first == l;
}

}  // namespace

void Predictions::validate() const {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    std::unordered_set<LabelIndex> seen;
    double prev = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!seen.insert(row[i].first).second)
        fail("DuplicatePrediction", "row " + std::to_string(r) + " label " +
                                        std::to_string(row[i].first));
      if (i > 0 && row[i].second > prev)
        fail("UnsortedScores", "row " + std::to_string(r));
      prev = row[i].second;
    }
  }
}

Predictions read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("IoError", "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    fail("MalformedHeader", path.string() + ": empty file");
  std::size_t n = 0, depth = 0;
  {
    std::istringstream hs(line);
    std::string extra;
    if (!(hs >> n >> depth) || (hs >> extra))
      fail("MalformedHeader", path.string() + ":1: '" + line + "'");
  }
  Predictions pred;
  pred.depth = depth;
  pred.rows.reserve(n);
  std::size_t line_no = 1;
  while (pred.rows.size() < n && std::getline(in, line)) {
    ++line_no;
    std::vector<std::pair<LabelIndex, double>> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      std::uint64_t idx = 0;
      auto [next, ec] = std::from_chars(p, end, idx);
      if (ec != std::errc{} || next == end || *next != ':')
        fail("MalformedEntry",
             path.string() + ":" + std::to_string(line_no));
      char* wend = nullptr;
      errno = 0;
      double s = std::strtod(next + 1, &wend);
      if (wend == next + 1 || errno == ERANGE)
        fail("MalformedEntry",
             path.string() + ":" + std::to_string(line_no));
      row.emplace_back(static_cast<LabelIndex>(idx), s);
      p = wend;
    }
    pred.rows.push_back(std::move(row));
  }
  if (pred.rows.size() < n)
    fail("MalformedHeader", path.string() + ": truncated prediction file");
  pred.validate();
  return pred;
}

void write_predictions(const Predictions& pred,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoError", "cannot open " + path.string() + " for writing");
  out << pred.n_rows() << ' ' << pred.depth << '\n';
  for (const auto& row : pred.rows) {
    bool first = true;
    for (const auto& [l, s] : row) {
      if (!first) out << ' ';
      out << l << ':' << format_score(s);
      first = false;
    }
    out << '\n';
  }
  if (!out) fail("IoError", "write failed: " + path.string());
}

PropensityVector build_propensities(const SparseLabelMatrix& train_truth,
                                    double a, double b) {
  if (!(a > 0.0) || !(b >= 0.0))
    fail("InvalidConfig", "propensity requires A > 0 and B >= 0");
  PropensityVector prop;
  prop.a = a;
  prop.b = b;
  prop.n_train = train_truth.n_rows();
  const double n = static_cast<double>(prop.n_train);
  const double c = (std::log(n) - 1.0) * std::pow(1.0 + b, a);
  auto freq = train_truth.label_frequencies();
  prop.p.resize(freq.size());
  for (std::size_t l = 0; l < freq.size(); ++l) {
    double nl = static_cast<double>(freq[l]);
    prop.p[l] = 1.0 / (1.0 + c * std::exp(-a * std::log(nl + b)));
  }
  return prop;
}

double precision_at_k(const Predictions& pred, const SparseLabelMatrix& truth,
                      std::size_t k) {
  require_depth(pred, k);
  require_shape(pred, truth);
  if (pred.n_rows() == 0) return 0.0;
  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < pred.n_rows(); ++i) {
    const auto& row = pred.rows[i];
    std::size_t depth = std::min(k, row.size());
    for (std::size_t r = 0; r < depth; ++r)
      if (is_positive(truth.rows[i], row[r].first)) ++hits;
  }
  return static_cast<double>(hits) /
         (static_cast<double>(k) * static_cast<double>(pred.n_rows()));
}

double psp_at_k(const Predictions& pred, const SparseLabelMatrix& truth,
                const PropensityVector& prop, std::size_t k) {
  require_depth(pred, k);
  require_shape(pred, truth);
  double num = 0.0, den = 0.0;
  std::vector<double> inv_p;
  for (std::size_t i = 0; i < pred.n_rows(); ++i) {
    const auto& row = pred.rows[i];
    std::size_t depth = std::min(k, row.size());
    for (std::size_t r = 0; r < depth; ++r) {
      LabelIndex l = row[r].first;
      if (is_positive(truth.rows[i], l)) num += 1.0 / prop.p[l];
    }
    // Ideal ranking: positives by descending inverse propensity.
    inv_p.clear();
    for (const auto& [l, w] : truth.rows[i]) inv_p.push_back(1.0 / prop.p[l]);
    std::sort(inv_p.begin(), inv_p.end(), std::greater<>());
    std::size_t ideal_depth = std::min(k, inv_p.size());
    for (std::size_t r = 0; r < ideal_depth; ++r) den += inv_p[r];
  }
  return den > 0.0 ? num / den : 0.0;
}

double coverage_at_k(const Predictions& pred, const SparseLabelMatrix& truth,
                     std::size_t k, bool count_any_prediction) {
  require_depth(pred, k);
  require_shape(pred, truth);
  std::vector<char> has_positive(truth.n_labels, 0);
  std::vector<char> covered(truth.n_labels, 0);
  for (const auto& row : truth.rows)
    for (const auto& [l, w] : row) has_positive[l] = 1;

  std::size_t n_positive_labels = 0;
  for (char h : has_positive) n_positive_labels += h;
  if (n_positive_labels == 0)
    fail("EmptyTestPositives", "no label has a test positive");

  for (std::size_t i = 0; i < pred.n_rows(); ++i) {
    const auto& row = pred.rows[i];
    std::size_t depth = std::min(k, row.size());
    for (std::size_t r = 0; r < depth; ++r) {
      LabelIndex l = row[r].first;
      if (count_any_prediction || is_positive(truth.rows[i], l))
        covered[l] = 1;
    }
  }
  std::size_t n_covered = 0;
  for (LabelIndex l = 0; l < truth.n_labels; ++l)
    if (has_positive[l] && covered[l]) ++n_covered;
  return static_cast<double>(n_covered) /
         static_cast<double>(n_positive_labels);
}

std::vector<BinRow> bin_contributions(
    const Predictions& pred, const SparseLabelMatrix& truth,
    const std::vector<std::uint64_t>& train_freq, std::size_t n_bins,
    std::size_t k) {
  require_depth(pred, k);
  require_shape(pred, truth);
  if (n_bins < 1) fail("InvalidConfig", "n_bins >= 1");
  if (train_freq.size() != truth.n_labels)
    fail("ShapeMismatch", "train_freq size != n_labels");

  // Ascending frequency, ties by index; bins of equal total positive volume.
  std::vector<LabelIndex> order(truth.n_labels);
  for (LabelIndex l = 0; l < truth.n_labels; ++l) order[l] = l;
  std::stable_sort(order.begin(), order.end(),
                   [&](LabelIndex a, LabelIndex b) {
                     if (train_freq[a] != train_freq[b])
                       return train_freq[a] < train_freq[b];
                     return a < b;
                   });
  std::uint64_t total_volume = 0;
  for (auto f : train_freq) total_volume += f;

  std::vector<std::size_t> bin_of(truth.n_labels, 0);
  std::vector<BinRow> bins(n_bins);
  {
    std::uint64_t cum = 0;
    std::size_t bin_id = 0;
    std::vector<std::uint64_t> bin_volume(n_bins, 0);
    for (LabelIndex l : order) {
      cum += train_freq[l];
      bin_of[l] = bin_id;
      ++bins[bin_id].label_count;
      bin_volume[bin_id] += train_freq[l];
      auto boundary = static_cast<std::uint64_t>(
          (static_cast<unsigned __int128>(total_volume) * (bin_id + 1)) /
          n_bins);
      if (cum >= boundary && bin_id + 1 < n_bins) ++bin_id;
    }
    for (std::size_t b = 0; b < n_bins; ++b)
      bins[b].mean_positives =
          bins[b].label_count == 0
              ? 0.0
              : static_cast<double>(bin_volume[b]) /
                    static_cast<double>(bins[b].label_count);
  }

  // Integer hit counts keep the decomposition exact under one final divide.
  std::vector<std::uint64_t> hits(n_bins, 0);
  for (std::size_t i = 0; i < pred.n_rows(); ++i) {
    const auto& row = pred.rows[i];
    std::size_t depth = std::min(k, row.size());
    for (std::size_t r = 0; r < depth; ++r)
      if (is_positive(truth.rows[i], row[r].first))
        ++hits[bin_of[row[r].first]];
  }
  const double denom =
      static_cast<double>(k) * static_cast<double>(pred.n_rows());
  for (std::size_t b = 0; b < n_bins; ++b)
    bins[b].contribution =
        denom > 0.0 ? static_cast<double>(hits[b]) / denom : 0.0;
  return bins;
}

std::string EvalReport::to_json() const {
  // std::map iteration gives sorted keys; fixed float format keeps the
  // serialization byte-stable.
  std::string out = "{\n  \"metrics\": {";
  bool first = true;
  for (const auto& [name, value] : values) {
    if (!first) out += ',';
    char buf[64];
    std::snprintf(buf, sizeof(buf), "\n    \"%s\": %.6f", name.c_str(), value);
    out += buf;
    first = false;
  }
  out += "\n  }";
  if (bins) {
    out += ",\n  \"bins\": [";
    for (std::size_t b = 0; b < bins->size(); ++b) {
      const auto& row = (*bins)[b];
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "%s\n    {\"contribution\": %.6f, \"label_count\": %zu, "
                    "\"mean_positives\": %.6f}",
                    b ? "," : "", row.contribution, row.label_count,
                    row.mean_positives);
      out += buf;
    }
    out += "\n  ]";
  }
  out += "\n}\n";
  return out;
}

std::string EvalReport::to_csv() const {
  // Benchmark tables conventionally list P@1,3,5 then PSP@1,3,5 (then
  // coverage when present).
  std::vector<std::string> names;
  for (const char* prefix : {"P@", "PSP@", "C@"})
    for (const auto& [name, value] : values)
      if (name.rfind(prefix, 0) == 0 &&
          (prefix[1] != '@' || name[1] == '@'))  // "P@" must not match "PSP@"
        names.push_back(name);
  std::string header, row;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) {
      header += ',';
      row += ',';
    }
    header += names[i];
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", values.at(names[i]));
    row += buf;
  }
  return header + "\n" + row + "\n";
}

EvalReport evaluate(const Predictions& pred, const SparseLabelMatrix& truth,
                    const PropensityVector& prop,
                    const std::vector<std::uint64_t>& train_freq,
                    const std::vector<std::size_t>& ks, std::size_t n_bins) {
  EvalReport report;
  std::size_t max_k = 0;
  for (std::size_t k : ks) {
    report.values["P@" + std::to_string(k)] = precision_at_k(pred, truth, k);
    report.values["PSP@" + std::to_string(k)] =
        psp_at_k(pred, truth, prop, k);
    report.values["C@" + std::to_string(k)] = coverage_at_k(pred, truth, k);
    max_k = std::max(max_k, k);
  }
  if (n_bins > 0 && max_k > 0)
    report.bins = bin_contributions(pred, truth, train_freq, n_bins, max_k);
  return report;
}

}  // namespace xmcaug::metrics

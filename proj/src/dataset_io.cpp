#include "xmcaug/dataset_io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "xmcaug/errors.hpp"

namespace xmcaug {

void SparseLabelMatrix::validate() const {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    LabelIndex prev = 0;
    bool first = true;
    for (const auto& [idx, w] : rows[r]) {
      if (idx >= n_labels)
        fail("IndexOutOfRange", "row " + std::to_string(r) + ": index " +
                                    std::to_string(idx) + " >= n_labels " +
                                    std::to_string(n_labels));
      if (!first && idx <= prev)
        fail("NonAscendingIndices", "row " + std::to_string(r));
      if (!(w > 0.0 && w <= 1.0))
        fail("WeightOutOfRange", "row " + std::to_string(r) + ": weight " +
                                     std::to_string(w));
      prev = idx;
      first = false;
    }
  }
}

void Dataset::validate() const {
  y.validate();
  if (y.n_rows() != instances.size())
    fail("ShapeMismatch", "matrix has " + std::to_string(y.n_rows()) +
                              " rows but corpus has " +
                              std::to_string(instances.size()) + " texts");
  if (y.n_labels != label_features.size())
    fail("ShapeMismatch",
         "matrix has " + std::to_string(y.n_labels) +
             " labels but label-feature corpus has " +
             std::to_string(label_features.size()) + " texts");
}

}  // namespace xmcaug

namespace xmcaug::io {

namespace {

// Strips a single trailing '\r' so CRLF files parse like LF files.
void chomp_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool valid_utf8(const std::string& s) {
  const auto* p = reinterpret_cast<const unsigned char*>(s.data());
  std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n) {
    unsigned char c = p[i];
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((p[i + k] & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (p[i + k] & 0x3F);
    }
    // Reject overlong encodings, surrogates, and out-of-range points.
    static constexpr std::uint32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
      return false;
    i += len;
  }
  return true;
}

}  // namespace

SparseLabelMatrix read_label_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("IoError", "cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line))
    fail("MalformedHeader", path.string() + ": empty file");
  chomp_cr(line);

  std::size_t n_rows = 0, n_labels = 0;
  {
    std::istringstream hs(line);
    std::string extra;
    if (!(hs >> n_rows >> n_labels) || (hs >> extra))
      fail("MalformedHeader", path.string() + ":1: '" + line + "'");
  }

  SparseLabelMatrix m;
  m.n_labels = n_labels;
  m.rows.reserve(n_rows);

  std::size_t line_no = 1;
  while (m.rows.size() < n_rows && std::getline(in, line)) {
    ++line_no;
    chomp_cr(line);
    SparseRow row;
    const char* p = line.data();
    const char* end = p + line.size();
    bool first = true;
    LabelIndex prev = 0;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      std::uint64_t idx64 = 0;
      auto [next, ec] = std::from_chars(p, end, idx64);
      if (ec != std::errc{} || next == end || *next != ':')
        fail("MalformedEntry",
             path.string() + ":" + std::to_string(line_no) + ": '" + line + "'");
      if (idx64 >= n_labels)
        fail("IndexOutOfRange", path.string() + ":" + std::to_string(line_no) +
                                    ": index " + std::to_string(idx64));
      auto idx = static_cast<LabelIndex>(idx64);
      p = next + 1;
      char* wend = nullptr;
      errno = 0;
      double w = std::strtod(p, &wend);
      if (wend == p || errno == ERANGE)
        fail("MalformedEntry",
             path.string() + ":" + std::to_string(line_no) + ": '" + line + "'");
      if (!(w > 0.0 && w <= 1.0))
        fail("WeightOutOfRange", path.string() + ":" + std::to_string(line_no) +
                                     ": weight for index " + std::to_string(idx));
      if (!first && idx <= prev)
        fail("NonAscendingIndices",
             path.string() + ":" + std::to_string(line_no));
      row.emplace_back(idx, w);
      prev = idx;
      first = false;
      p = wend;
    }
    m.rows.push_back(std::move(row));
  }
  if (m.rows.size() < n_rows)
    fail("MalformedHeader", path.string() + ": header declares " +
                                std::to_string(n_rows) + " rows, found " +
                                std::to_string(m.rows.size()));
  return m;
}

std::string format_weight(double w) {
  if (w == 1.0) return "1";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", w);
  return buf;
}

void write_label_matrix(const SparseLabelMatrix& m,
                        const std::filesystem::path& path) {
  m.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoError", "cannot open " + path.string() + " for writing");
  out << m.n_rows() << ' ' << m.n_labels << '\n';
  for (const auto& row : m.rows) {
    bool first = true;
    for (const auto& [idx, w] : row) {
      if (!first) out << ' ';
      out << idx << ':' << format_weight(w);
      first = false;
    }
    out << '\n';
  }
  if (!out) fail("IoError", "write failed: " + path.string());
}

TextCorpus read_text_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("IoError", "cannot open " + path.string());
  TextCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    chomp_cr(line);
    if (!valid_utf8(line))
      fail("InvalidUtf8", path.string() + ":" + std::to_string(line_no));
    corpus.texts.push_back(line);
  }
  return corpus;
}

void write_text_corpus(const TextCorpus& corpus,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoError", "cannot open " + path.string() + " for writing");
  for (const auto& t : corpus.texts) out << t << '\n';
  if (!out) fail("IoError", "write failed: " + path.string());
}

Dataset concat_datasets(const Dataset& a, const Dataset& b) {
  if (a.y.n_labels != b.y.n_labels ||
      a.label_features.texts != b.label_features.texts)
    fail("LabelSpaceMismatch",
         "'" + a.name + "' and '" + b.name + "' have different label spaces");
  Dataset out = a;
  out.instances.texts.insert(out.instances.texts.end(),
                             b.instances.texts.begin(),
                             b.instances.texts.end());
  out.y.rows.insert(out.y.rows.end(), b.y.rows.begin(), b.y.rows.end());
  if (!b.name.empty() && !a.name.empty()) out.name = a.name + "+" + b.name;
  return out;
}

}  // namespace xmcaug::io

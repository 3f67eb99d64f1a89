#pragma once

// Minimal RFC-4180-style delimited text reader/writer (comma or tab).

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "espin/core.hpp"

namespace espin::csv {

struct Table {
  char delimiter = ',';
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// Leading '#' lines (provenance headers written by exporters).
  std::vector<std::string> comments;
};

/// Tab if the header line contains more tabs than commas, else comma.
inline char detect_delimiter(std::string_view first_line) {
  const auto tabs = std::count(first_line.begin(), first_line.end(), '\t');
  const auto commas = std::count(first_line.begin(), first_line.end(), ',');
  return tabs > commas ? '\t' : ',';
}

inline std::vector<std::vector<std::string>> split_records(std::string_view text, char delim) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == delim) {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        out.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (quoted) throw Error("csv_parse", "unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    out.push_back(std::move(row));
  }
  return out;
}

inline Table parse(std::string_view text) {
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF)
    text.remove_prefix(3);
  Table t;
  while (!text.empty() && text.front() == '#') {
    const auto nl = text.find('\n');
    std::string line(text.substr(1, nl == std::string_view::npos ? text.size() - 1 : nl - 1));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.comments.push_back(trim(line));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
  }
  const auto nl = text.find('\n');
  t.delimiter = detect_delimiter(text.substr(0, nl));
  auto records = split_records(text, t.delimiter);
  if (records.empty()) throw Error("csv_parse", "no header row");
  t.header = std::move(records.front());
  for (auto& h : t.header) h = trim(h);
  t.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  return t;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("file_not_found", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("file_write", "cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::string escape(std::string_view field, char delim) {
  const bool needs = field.find_first_of(std::string{delim, '"', '\n', '\r'}) != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

/// Incremental writer building a delimited document in memory.
class Writer {
 public:
  explicit Writer(char delim = ',') : delim_(delim) {}

  void comment(std::string_view line) {
    out_ << "# " << line << '\n';
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << delim_;
      out_ << escape(fields[i], delim_);
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  char delim_;
  std::ostringstream out_;
};

}  // namespace espin::csv

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace taxsim {

// Shortest round-trippable formatting, stable across runs.
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string csv_num(std::uint64_t v) { return std::to_string(v); }
inline std::string csv_num(std::int64_t v) { return std::to_string(v); }
inline std::string csv_num(int v) { return std::to_string(v); }
inline std::string csv_num(unsigned v) { return std::to_string(v); }

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : f_(std::fopen(path.c_str(), "wb")) {
    if (!f_) throw std::runtime_error("cannot open for writing: " + path);
  }
  ~CsvWriter() {
    if (f_) std::fclose(f_);
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  // Writes one line verbatim (header, comment, or prejoined row).
  void line(const std::string& s) {
    std::fputs(s.c_str(), f_);
    std::fputc('\n', f_);
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) std::fputc(',', f_);
      std::fputs(fields[i].c_str(), f_);
    }
    std::fputc('\n', f_);
  }

 private:
  std::FILE* f_;
};

}  // namespace taxsim
